"""Uniform scalar quantizers and the dithered quantization operations.

A mid-tread quantizer has a codebook point at the origin, a mid-riser
quantizer has a threshold there.  Cells are half-open intervals
(T_k, T_{k+1}]; an input landing exactly on a threshold belongs to the
lower cell.  Finite quantizers saturate (clamp) to the extreme codebook
values instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError


class QuantizerStyle(Enum):
    MID_TREAD = "mid-tread"
    MID_RISER = "mid-riser"


@dataclass(frozen=True)
class QuantizerSpec:
    """Geometry of a uniform scalar quantizer.

    delta: cell width in signal units.
    style: mid-tread or mid-riser alignment.
    bits: None for an infinite quantizer, otherwise b in 1..16 for a
        codebook of 2**b values whose first cell starts at `offset`.
    offset: codebook origin (shifts all values and thresholds).
    """

    delta: float
    style: QuantizerStyle = QuantizerStyle.MID_TREAD
    bits: int | None = None
    offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise InvalidInputError(f"delta must be positive and finite, got {self.delta}")
        if self.bits is not None and not 1 <= int(self.bits) <= 16:
            raise InvalidInputError(f"bits must be in 1..16, got {self.bits}")
        if not math.isfinite(self.offset):
            raise InvalidInputError("offset must be finite")

    @property
    def n_levels(self) -> int | None:
        return None if self.bits is None else 2 ** self.bits

    def value(self, k):
        """Codebook value of cell k (works on scalars and arrays)."""
        if self.style is QuantizerStyle.MID_TREAD:
            return self.offset + k * self.delta
        return self.offset + (k + 0.5) * self.delta

    def lower_threshold(self, k) -> float:
        """T_k, the open lower edge of cell k."""
        if self.style is QuantizerStyle.MID_TREAD:
            return self.offset + (k - 0.5) * self.delta
        return self.offset + k * self.delta

    def codebook(self) -> np.ndarray:
        if self.bits is None:
            raise InvalidInputError("infinite quantizer has no finite codebook")
        return self.value(np.arange(self.n_levels))

    def thresholds(self) -> np.ndarray:
        if self.bits is None:
            raise InvalidInputError("infinite quantizer has no finite threshold vector")
        return np.array([self.lower_threshold(k) for k in range(self.n_levels + 1)])

    def cell_index(self, w):
        """Index of the half-open cell containing w; clamps when finite.

        Exact thresholds resolve to the lower cell.  Scalar inputs return a
        Python int (unbounded, so extreme inputs to an infinite quantizer
        cannot overflow); arrays return int64.
        """
        if isinstance(w, np.ndarray):
            t = (w - self.offset) / self.delta
            if self.style is QuantizerStyle.MID_TREAD:
                k = np.ceil(t - 0.5)
            else:
                k = np.ceil(t) - 1.0
            if self.bits is not None:
                k = np.clip(k, 0, self.n_levels - 1)
            return k.astype(np.int64)
        t = (w - self.offset) / self.delta
        if self.style is QuantizerStyle.MID_TREAD:
            k = math.ceil(t - 0.5)
        else:
            k = math.ceil(t) - 1
        if self.bits is not None:
            k = min(max(k, 0), self.n_levels - 1)
        return k


@dataclass(frozen=True)
class QuantizedSample:
    """One quantized value: codebook index k and codebook value C_k."""

    index: int
    value: float


def quantize(w: float, q: QuantizerSpec) -> QuantizedSample:
    """Quantize a single sample: Q(w) = C_k for the cell with T_k < w <= T_{k+1}."""
    if not math.isfinite(w):
        raise InvalidInputError(f"quantizer input must be finite, got {w}")
    k = q.cell_index(w)
    return QuantizedSample(index=k, value=q.value(k))


def quantize_array(w: np.ndarray, q: QuantizerSpec):
    """Vectorized quantization; returns (indices, values)."""
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("quantizer input must be finite")
    k = q.cell_index(w)
    return k, q.value(k)


def nsd_output(x: float, v: float, q: QuantizerSpec) -> float:
    """Non-subtractive dithered output Q(x + v)."""
    if not (math.isfinite(x) and math.isfinite(v)):
        raise InvalidInputError("inputs must be finite")
    return quantize(x + v, q).value


def sd_output(x: float, v: float, q: QuantizerSpec) -> float:
    """Subtractive dithered output Q(x + v) - v.

    The decoder must regenerate the same v; the residual error
    Q(x+v) - (x+v) stays within (-delta/2, delta/2] on interior cells.
    """
    if not (math.isfinite(x) and math.isfinite(v)):
        raise InvalidInputError("inputs must be finite")
    return quantize(x + v, q).value - v
