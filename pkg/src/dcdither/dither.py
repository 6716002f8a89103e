"""Parametric dither families and their closed-form trade-off objectives.

Two one-parameter families cover the designs in scope, indexed by
family m in {1, 2} with width parameter alpha in [0, 1]:

  m=1: uniform core of total mass alpha on [-alpha*delta/2, alpha*delta/2]
       plus two point masses of (1-alpha)/2 at the interval edges.
  m=2: plain uniform on [-alpha*delta/2, alpha*delta/2].

Costs (mean square error) and artifact bounds (squared mean absolute
conditional error, mean square conditional error) admit the polynomial
closed forms below, all normalized to delta**2 = 1; multiply by delta**2
for physical units.  The convex trade-off
(1-lam)*cost + lam*artifact is minimized in closed form by
`optimal_alpha`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mixture import Atom, MixtureDensity, Segment


def make_rng(seed: int, stream: str = "") -> np.random.Generator:
    """Deterministic named stream: equal (seed, stream) gives equal draws."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + list(stream.encode())
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class DitherSpec:
    """A member of one of the two parametric dither families."""

    family: int
    alpha: float
    delta: float = 1.0

    def __post_init__(self):
        if self.family not in (1, 2):
            raise DomainError(f"family must be 1 or 2, got {self.family}")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"delta must be positive, got {self.delta}")

    @property
    def half_support(self) -> float:
        return 0.5 * self.alpha * self.delta


def sample_dither(d: DitherSpec, rng: np.random.Generator, size=None):
    """Draw iid dither samples by inverse CDF.

    Both families map the same uniform draw u through a monotone transform
    (family 1 is the full-width sample clipped to the alpha support, which
    reproduces the edge point masses exactly), so sweeps over alpha with a
    fixed seed are smoothly coupled.
    """
    u = rng.random(size)
    if d.family == 2:
        v = d.alpha * d.delta * (u - 0.5)
    else:
        v = np.clip(d.delta * (u - 0.5), -d.half_support, d.half_support)
    return float(v) if size is None else v


def dither_pdf(d: DitherSpec) -> MixtureDensity:
    """Exact mixture representation of the dither density."""
    if d.alpha == 0.0:
        return MixtureDensity.point_mass(0.0)
    h = d.half_support
    if d.family == 2:
        return MixtureDensity(segments=(Segment(-h, h, 1.0 / (2 * h)),))
    atoms = ()
    if d.alpha < 1.0:
        w = 0.5 * (1.0 - d.alpha)
        atoms = (Atom(-h, w), Atom(h, w))
    return MixtureDensity(atoms=atoms, segments=(Segment(-h, h, 1.0 / d.delta),))


def _check_unit(name, value):
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must be in [0, 1], got {value}")


def _check_family(family):
    if family not in (1, 2):
        raise DomainError(f"family must be 1 or 2, got {family}")


def _check_formulation(formulation):
    if formulation not in (1, 2):
        raise DomainError(f"formulation must be 1 or 2, got {formulation}")


def cost_closed_form(family: int, alpha: float) -> float:
    """Mean square quantization error, in units of delta**2."""
    _check_family(family)
    _check_unit("alpha", alpha)
    if family == 1:
        return (-2.0 * alpha**3 + 3.0 * alpha**2 + 1.0) / 12.0
    return (alpha**2 + 1.0) / 12.0


def artifact_closed_form(formulation: int, family: int, alpha: float) -> float:
    """Artifact bound A_{p,m}(alpha), in units of delta**2.

    formulation 1 is the squared mean absolute conditional error,
    formulation 2 the mean square conditional error.
    """
    _check_formulation(formulation)
    _check_family(family)
    _check_unit("alpha", alpha)
    r = 1.0 - alpha
    if family == 1:
        return r**4 / 16.0 if formulation == 1 else r**3 / 12.0
    return r**2 / 16.0 if formulation == 1 else r**2 / 12.0


def optimal_alpha(formulation: int, family: int, lam: float) -> float:
    """Closed-form minimizer of the convex trade-off at weight lam."""
    _check_formulation(formulation)
    _check_family(family)
    _check_unit("lam", lam)
    if family == 1:
        if formulation == 1:
            # continuous extension of (1 - sqrt(1 - lam^2))/lam at lam = 0
            return 0.0 if lam == 0.0 else (1.0 - math.sqrt(1.0 - lam * lam)) / lam
        return lam / (2.0 - lam)
    if formulation == 1:
        return 3.0 * lam / (4.0 - lam)
    return lam


def objective(formulation: int, family: int, alpha: float, lam: float) -> float:
    """(1-lam)*cost + lam*artifact, in units of delta**2."""
    _check_unit("lam", lam)
    return (1.0 - lam) * cost_closed_form(family, alpha) + lam * artifact_closed_form(
        formulation, family, alpha
    )


@dataclass(frozen=True)
class TradeoffPoint:
    """One evaluated trade-off: the optimum of a family at a given weight."""

    lam: float
    family: int
    alpha_star: float
    cost: float
    artifact_l1: float
    artifact_l2: float
    objective: float


def pareto_front(formulation: int, lambda_grid, families=(1, 2)) -> list[TradeoffPoint]:
    """Evaluate each family at its optimal alpha over the weight grid."""
    points = []
    for family in families:
        for lam in lambda_grid:
            a = optimal_alpha(formulation, family, lam)
            points.append(
                TradeoffPoint(
                    lam=float(lam),
                    family=family,
                    alpha_star=a,
                    cost=cost_closed_form(family, a),
                    artifact_l1=artifact_closed_form(1, family, a),
                    artifact_l2=artifact_closed_form(2, family, a),
                    objective=objective(formulation, family, a, lam),
                )
            )
    return points
