"""Analytical entropy of dithered quantizer outputs.

Works entirely on exact mixture densities: a uniform source of width u
convolved with a dither density stays piecewise linear, so the cell
probabilities of an infinite mid-tread quantizer (and hence the output
entropy) are computed without sampling or quadrature error.  The same
machinery yields the density of the subtractively-decoded output
Y = Q(X+V) - V and its entropy after requantization on a fine grid, the
"recompression" rate of decoded data.
"""

from __future__ import annotations

import math

from .dither import DitherSpec, dither_pdf, optimal_alpha
from .errors import DomainError, InvalidInputError
from .mixture import (
    Atom,
    CellPMF,
    MixtureDensity,
    Segment,
    cell_probabilities,
    convolve_with_uniform,
    pmf_entropy,
)
from .quantizer import QuantizerSpec


def convolve_with_uniform_source(width: float, d: DitherSpec) -> MixtureDensity:
    """Exact density of X + V for X ~ uniform of width `width` centered at 0."""
    if not width > 0:
        raise DomainError(f"source width must be positive, got {width}")
    return convolve_with_uniform(dither_pdf(d), width)


def nsd_entropy_curve(ratios, d: DitherSpec) -> list[tuple[float, float, float]]:
    """Per resolution ratio u/delta: (ratio, H(Q(X)), H(Q(X+V))).

    X is uniform of width ratio*delta, quantized by the infinite mid-tread
    quantizer of step delta.
    """
    q = QuantizerSpec(delta=d.delta)
    rows = []
    for ratio in ratios:
        if not ratio > 0:
            raise DomainError(f"ratio must be positive, got {ratio}")
        u = ratio * d.delta
        plain = pmf_entropy(cell_probabilities(MixtureDensity.uniform(-u / 2, u / 2), q))
        if d.alpha == 0.0:
            dithered = plain
        else:
            dithered = pmf_entropy(cell_probabilities(convolve_with_uniform_source(u, d), q))
        rows.append((float(ratio), plain, dithered))
    return rows


def sd_output_density(width: float, d: DitherSpec, q: QuantizerSpec) -> MixtureDensity:
    """Exact density of Y = Q(X+V) - V for X ~ uniform of width `width`.

    Summing over reachable cells k, a dither atom at location a feeds an
    output atom at C_k - a weighted by the chance that X + a lands in cell
    k; a uniform dither piece feeds the window [C_k - hi, C_k - lo] with
    density  h * P(T_k < X + (C_k - y) <= T_{k+1}),  piecewise linear in y.
    """
    if not width > 0:
        raise DomainError(f"source width must be positive, got {width}")
    if q.bits is not None:
        raise InvalidInputError("subtractive output density requires an infinite quantizer")
    fv = dither_pdf(d)

    half_u = width / 2.0

    def source_cdf(t: float) -> float:
        return min(max((t + half_u) / width, 0.0), 1.0)

    v_lo, v_hi = fv.support()
    k_lo = q.cell_index(-half_u + v_lo) - 1
    k_hi = q.cell_index(half_u + v_hi) + 1

    atoms: list[Atom] = []
    segments: list[Segment] = []
    for k in range(k_lo, k_hi + 1):
        ck = q.value(k)
        t_lo = q.lower_threshold(k)
        t_hi = q.lower_threshold(k + 1)
        for a in fv.atoms:
            p = source_cdf(t_hi - a.location) - source_cdf(t_lo - a.location)
            if a.weight * p > 0.0:
                atoms.append(Atom(ck - a.location, a.weight * p))
        for s in fv.segments:
            if s.c1 != 0.0:
                raise InvalidInputError("dither density must have uniform segments only")
            y_lo, y_hi = ck - s.hi, ck - s.lo
            lo_off = t_lo - ck
            hi_off = t_hi - ck

            def window_mass(y: float) -> float:
                return source_cdf(y + hi_off) - source_cdf(y + lo_off)

            cuts = {y_lo, y_hi}
            for edge in (-half_u, half_u):
                cuts.add(edge - hi_off)
                cuts.add(edge - lo_off)
            grid = sorted(c for c in cuts if y_lo <= c <= y_hi)
            for lo, hi in zip(grid[:-1], grid[1:]):
                span = hi - lo
                if span <= 0:
                    continue
                f1 = s.c0 * window_mass(lo + 0.25 * span)
                f2 = s.c0 * window_mass(lo + 0.75 * span)
                c1 = (f2 - f1) / (0.5 * span)
                c0 = f1 - c1 * (lo + 0.25 * span)
                seg = Segment(lo, hi, c0, c1)
                if seg.weight > 0.0:
                    segments.append(seg)

    return MixtureDensity(atoms=tuple(atoms), segments=tuple(segments))


def recompression_entropy(bits: int, family: int, lam: float, fine_ratio: int = 256) -> float:
    """Entropy in bps of the subtractively decoded output requantized finely.

    The coarse stage is an infinite mid-tread quantizer with the source
    width set to (2**bits - 1) steps, so dithering by up to half a step
    reaches 2**bits levels.  The decoded variable is then requantized by a
    mid-tread quantizer whose step divides the full output support into
    `fine_ratio` parts (the fine stage keeps infinite levels, so values
    slightly above log2(fine_ratio) bps are possible).  The dither is the
    requested family at its own-formulation optimal alpha.
    """
    if bits < 1:
        raise DomainError(f"bits must be >= 1, got {bits}")
    alpha = optimal_alpha(family, family, lam)
    delta = 1.0
    d = DitherSpec(family, alpha, delta)
    q = QuantizerSpec(delta)
    width = (2**bits - 1) * delta
    fy = sd_output_density(width, d, q)
    lo, hi = fy.support()
    if hi - lo <= 0.0:
        return 0.0
    fine = QuantizerSpec((hi - lo) / fine_ratio)
    return pmf_entropy(cell_probabilities(fy, fine))
