"""Exact probability densities as mixtures of point masses and line segments.

Every density in this package is a finite mixture of atoms (location,
weight) and segments carrying a degree <= 1 polynomial density
c0 + c1*t on (lo, hi).  Convolving a uniform source with the dither
families stays inside this class, so cell probabilities and entropies
come out of closed-form integration instead of quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .quantizer import QuantizerSpec

MASS_TOL = 1e-12
PMF_TOL = 1e-10


@dataclass(frozen=True)
class Atom:
    location: float
    weight: float


@dataclass(frozen=True)
class Segment:
    """Density c0 + c1*t on (lo, hi)."""

    lo: float
    hi: float
    c0: float
    c1: float = 0.0

    @property
    def weight(self) -> float:
        return self.c0 * (self.hi - self.lo) + 0.5 * self.c1 * (self.hi**2 - self.lo**2)

    def density(self, t):
        return self.c0 + self.c1 * t

    def mass_on(self, a: float, b: float) -> float:
        """Integral of the density over (a, b) clipped to the segment."""
        a = max(a, self.lo)
        b = min(b, self.hi)
        if b <= a:
            return 0.0
        return self.c0 * (b - a) + 0.5 * self.c1 * (b * b - a * a)


@dataclass(frozen=True)
class MixtureDensity:
    """Normalized mixture of atoms and linear segments."""

    atoms: tuple[Atom, ...] = ()
    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        for a in self.atoms:
            if a.weight < 0:
                raise InvalidInputError(f"negative atom weight {a.weight}")
        for s in self.segments:
            if not s.lo < s.hi:
                raise InvalidInputError(f"segment must have lo < hi, got [{s.lo}, {s.hi}]")
            # linear density: checking the endpoints covers the whole span
            if s.density(s.lo) < -MASS_TOL or s.density(s.hi) < -MASS_TOL:
                raise InvalidInputError("segment density is negative")
        mass = self.total_mass()
        if abs(mass - 1.0) > MASS_TOL:
            raise InvalidInputError(f"mixture mass {mass!r} is not 1")

    def total_mass(self) -> float:
        return math.fsum([a.weight for a in self.atoms] + [s.weight for s in self.segments])

    def support(self) -> tuple[float, float]:
        points = [a.location for a in self.atoms]
        for s in self.segments:
            points.extend((s.lo, s.hi))
        if not points:
            raise InvalidInputError("empty mixture has no support")
        return min(points), max(points)

    def mass_between(self, a: float, b: float) -> float:
        """Mass on the half-open interval (a, b]."""
        parts = [s.mass_on(a, b) for s in self.segments]
        parts += [at.weight for at in self.atoms if a < at.location <= b]
        return math.fsum(parts)

    @classmethod
    def point_mass(cls, location: float = 0.0) -> "MixtureDensity":
        return cls(atoms=(Atom(location, 1.0),))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "MixtureDensity":
        if not hi > lo:
            raise InvalidInputError("uniform needs hi > lo")
        return cls(segments=(Segment(lo, hi, 1.0 / (hi - lo)),))


@dataclass(frozen=True)
class CellPMF:
    """Nonzero cell probabilities of a quantized variable, sorted by index."""

    entries: tuple[tuple[int, float], ...] = field(default=())

    def __post_init__(self):
        total = math.fsum(p for _, p in self.entries)
        if any(p < 0 for _, p in self.entries):
            raise InvalidInputError("negative cell probability")
        if abs(total - 1.0) > PMF_TOL:
            raise InvalidInputError(f"cell probabilities sum to {total!r}, not 1")

    def indices(self) -> np.ndarray:
        return np.array([k for k, _ in self.entries], dtype=np.int64)

    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])


def cell_probabilities(dens: MixtureDensity, q: QuantizerSpec) -> CellPMF:
    """Exact P(Q(Z) = C_k) for Z ~ dens; only nonzero cells are returned.

    Segment mass integrates in closed form against each cell; atoms follow
    the threshold-ties-to-lower-cell rule of the quantizer itself.
    """
    contrib: dict[int, list[float]] = {}

    def add(k, mass):
        if mass != 0.0:
            contrib.setdefault(int(k), []).append(mass)

    last = None if q.bits is None else q.n_levels - 1
    for at in dens.atoms:
        add(q.cell_index(at.location), at.weight)
    for s in dens.segments:
        k_lo = q.cell_index(s.lo)
        k_hi = q.cell_index(s.hi)
        for k in range(k_lo, k_hi + 1):
            a = -math.inf if (last is not None and k == 0) else q.lower_threshold(k)
            b = math.inf if (last is not None and k == last) else q.lower_threshold(k + 1)
            add(k, s.mass_on(a, b))

    entries = tuple(
        (k, math.fsum(parts)) for k, parts in sorted(contrib.items()) if math.fsum(parts) > 0.0
    )
    return CellPMF(entries)


def pmf_entropy(pmf) -> float:
    """Shannon entropy in bits per sample; 0*log(0) counts as 0."""
    if isinstance(pmf, CellPMF):
        p = pmf.probabilities()
    else:
        p = np.asarray(pmf, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def convolve_with_uniform(dens: MixtureDensity, width: float) -> MixtureDensity:
    """Exact density of Z + U with U ~ uniform(-width/2, width/2).

    Atoms become rectangles, uniform segments become trapezoids; the
    result is atom-free and piecewise linear.  Only degree-0 segments are
    accepted (a second convolution would leave the linear class).
    """
    if not width > 0:
        raise InvalidInputError("width must be positive")
    for s in dens.segments:
        if s.c1 != 0.0:
            raise InvalidInputError("convolution input must have uniform segments only")

    half = width / 2.0
    breakpoints = set()
    for a in dens.atoms:
        breakpoints.update((a.location - half, a.location + half))
    for s in dens.segments:
        breakpoints.update((s.lo - half, s.lo + half, s.hi - half, s.hi + half))
    grid = sorted(breakpoints)

    def density_at(t: float) -> float:
        total = 0.0
        for a in dens.atoms:
            if abs(t - a.location) < half:
                total += a.weight / width
        for s in dens.segments:
            overlap = min(t + half, s.hi) - max(t - half, s.lo)
            if overlap > 0:
                total += s.c0 * overlap / width
        return total

    segments = []
    for lo, hi in zip(grid[:-1], grid[1:]):
        span = hi - lo
        if span <= 0:
            continue
        # interior probes avoid the breakpoints, where rectangle edges jump
        f1 = density_at(lo + 0.25 * span)
        f2 = density_at(lo + 0.75 * span)
        c1 = (f2 - f1) / (0.5 * span)
        c0 = f1 - c1 * (lo + 0.25 * span)
        seg = Segment(lo, hi, c0, c1)
        if seg.weight > 0.0:
            segments.append(seg)
    return MixtureDensity(segments=tuple(segments))
