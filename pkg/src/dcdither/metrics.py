"""Error statistics for dithered quantizers.

Two routes to the same figures of merit: exact conditional error moments
integrated by piecewise quadrature (`mse_numeric`, `mace2_numeric`,
`msce_numeric`, independent of the closed-form polynomials in
`dcdither.dither`), and Monte Carlo sample statistics over an input
sequence (`empirical_error_stats`).  The quadrature convention is a
uniform input over one interior cell [-delta/2, delta/2] of a mid-tread
quantizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dither import DitherSpec, dither_pdf, sample_dither
from .errors import InvalidInputError, NumericConvergenceError
from .quantizer import QuantizerSpec, quantize_array

QUAD_NODES = 4097
QUAD_SELF_TOL = 1e-8


def _conditional_moments(q: QuantizerSpec, d: DitherSpec, xs: np.ndarray):
    """Exact E[eps | x] and E[eps^2 | x] for the NSD error eps = Q(x+v) - x.

    The cell sum is truncated to cells reachable from x + support(dither),
    expanded by one step on each side; the dither mixture integrates in
    closed form against each cell, so the only approximation anywhere is
    the caller's quadrature over x.
    """
    fv = dither_pdf(d)
    xs = np.asarray(xs, dtype=float)
    v_lo, v_hi = fv.support()
    k_lo = q.cell_index(float(xs.min()) + v_lo) - 1
    k_hi = q.cell_index(float(xs.max()) + v_hi) + 1
    e1 = np.zeros_like(xs)
    e2 = np.zeros_like(xs)
    for k in range(k_lo, k_hi + 1):
        t_lo = q.lower_threshold(k)
        t_hi = q.lower_threshold(k + 1)
        err = q.value(k) - xs
        prob = np.zeros_like(xs)
        for s in fv.segments:
            if s.c1 != 0.0:
                raise InvalidInputError("dither density must have uniform segments only")
            width = np.minimum(s.hi, t_hi - xs) - np.maximum(s.lo, t_lo - xs)
            prob += s.c0 * np.clip(width, 0.0, None)
        for a in fv.atoms:
            inside = (t_lo - xs < a.location) & (a.location <= t_hi - xs)
            prob += a.weight * inside
        e1 += err * prob
        e2 += err * err * prob
    return e1, e2


def conditional_error(q: QuantizerSpec, d: DitherSpec, x: float) -> float:
    """E[eps | x]: the mean NSD error conditioned on the input value."""
    if not math.isfinite(x):
        raise InvalidInputError(f"x must be finite, got {x}")
    return float(_conditional_moments(q, d, np.array([x]))[0][0])


def _structure_breakpoints(q: QuantizerSpec, d: DitherSpec, lo: float, hi: float):
    """x values in (lo, hi) where a dither atom or segment edge crosses a cell
    threshold; the conditional moments jump or kink exactly there."""
    fv = dither_pdf(d)
    events = {a.location for a in fv.atoms}
    for s in fv.segments:
        events.update((s.lo, s.hi))
    points = {lo, hi}
    for e in events:
        j_lo = q.cell_index(lo + e) - 1
        j_hi = q.cell_index(hi + e) + 2
        for j in range(j_lo, j_hi + 1):
            x = q.lower_threshold(j) - e
            if lo < x < hi:
                points.add(x)
    return sorted(points)


def _simpson(vals: np.ndarray, h: float) -> float:
    return h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum())


def _piecewise_simpson(fvec, pieces, total_nodes: int) -> float:
    length = math.fsum(b - a for a, b in pieces)
    parts = []
    for a, b in pieces:
        if b <= a:
            continue
        n = max(64, int(round(total_nodes * (b - a) / length)))
        n += n % 2  # even interval count -> odd node count
        xs = np.linspace(a, b, n + 1)
        parts.append(_simpson(fvec(xs), (b - a) / n))
    return math.fsum(parts)


def _integrate(fvec, pieces, scale: float) -> float:
    """Composite Simpson over smooth pieces with a halved-resolution self-check."""
    fine = _piecewise_simpson(fvec, pieces, QUAD_NODES)
    coarse = _piecewise_simpson(fvec, pieces, QUAD_NODES // 2)
    if abs(fine - coarse) > QUAD_SELF_TOL * max(scale, abs(fine)):
        raise NumericConvergenceError(
            f"quadrature self-check failed: {fine!r} vs {coarse!r} over {len(pieces)} pieces"
        )
    return fine


def _sign_change_roots(g, pieces):
    """Roots of g inside each piece, located by scan plus bisection."""
    roots = []
    for a, b in pieces:
        xs = np.linspace(a, b, 129)
        vals = g(xs)
        for i in np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]:
            lo, hi = xs[i], xs[i + 1]
            flo = vals[i]
            for _ in range(90):
                mid = 0.5 * (lo + hi)
                fmid = g(np.array([mid]))[0]
                if flo * fmid <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            roots.append(0.5 * (lo + hi))
    return roots


def _split_pieces(points):
    return list(zip(points[:-1], points[1:]))


def mse_numeric(q: QuantizerSpec, d: DitherSpec) -> float:
    """Mean square NSD error by quadrature, uniform input over one cell."""
    lo, hi = -q.delta / 2.0, q.delta / 2.0
    pieces = _split_pieces(_structure_breakpoints(q, d, lo, hi))
    f = lambda xs: _conditional_moments(q, d, xs)[1]
    return _integrate(f, pieces, q.delta**2) / q.delta


def msce_numeric(q: QuantizerSpec, d: DitherSpec) -> float:
    """Mean square conditional error by quadrature."""
    lo, hi = -q.delta / 2.0, q.delta / 2.0
    pieces = _split_pieces(_structure_breakpoints(q, d, lo, hi))
    f = lambda xs: _conditional_moments(q, d, xs)[0] ** 2
    return _integrate(f, pieces, q.delta**2) / q.delta


def mace2_numeric(q: QuantizerSpec, d: DitherSpec) -> float:
    """Squared mean absolute conditional error by quadrature.

    The integrand |E[eps|x]| kinks at its zero crossings, so those roots
    join the structural breakpoints before integration.
    """
    lo, hi = -q.delta / 2.0, q.delta / 2.0
    points = _structure_breakpoints(q, d, lo, hi)
    g = lambda xs: _conditional_moments(q, d, xs)[0]
    points = sorted(set(points) | set(_sign_change_roots(g, _split_pieces(points))))
    f = lambda xs: np.abs(g(xs))
    mean_abs = _integrate(f, _split_pieces(points), q.delta**2) / q.delta
    return mean_abs**2


@dataclass(frozen=True)
class ErrorStats:
    """Sample statistics of an NSD error sequence plus its quadrature bounds."""

    n_samples: int
    mse: float
    autocorr: np.ndarray
    artifact_r1: float
    artifact_r2: float
    mace2: float
    msce: float


def empirical_error_stats(
    x_seq,
    q: QuantizerSpec,
    d: DitherSpec,
    n_lags: int = 10,
    rng: np.random.Generator | None = None,
) -> ErrorStats:
    """Monte Carlo error statistics over an input sequence.

    Draws one iid dither sample per input, forms the NSD error, and
    estimates the lag 1..n_lags autocorrelation with biased normalization
    (divide by the full sample count).  The quadrature values of the two
    artifact bounds ride along for comparison against the autocorrelation
    norms.
    """
    x = np.asarray(x_seq, dtype=float)
    if x.ndim != 1 or x.size < 100 * n_lags:
        raise InvalidInputError(
            f"need a 1-D sequence of at least {100 * n_lags} samples, got {x.size}"
        )
    if rng is None:
        rng = np.random.default_rng()
    v = sample_dither(d, rng, size=x.size)
    _, qv = quantize_array(x + v, q)
    eps = qv - x
    n = x.size
    autocorr = np.array([float(eps[: n - lag] @ eps[lag:]) / n for lag in range(1, n_lags + 1)])
    return ErrorStats(
        n_samples=n,
        mse=float(eps @ eps) / n,
        autocorr=autocorr,
        artifact_r1=float(np.abs(autocorr).mean()),
        artifact_r2=float(np.sqrt((autocorr**2).mean())),
        mace2=mace2_numeric(q, d),
        msce=msce_numeric(q, d),
    )


def empirical_entropy(symbols) -> float:
    """Entropy in bits per sample of the empirical symbol histogram."""
    arr = np.asarray(symbols).ravel()
    if arr.size == 0:
        raise InvalidInputError("empty symbol sequence")
    _, counts = np.unique(arr, return_counts=True)
    p = counts / arr.size
    return float(-(p * np.log2(p)).sum())
