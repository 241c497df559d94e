"""Case-adaptive gain curves that suppress gray levels typical of healthy tissue.

The curve is derived from the 1D gray histogram of the hemisphere with fewer
bright voxels: bins that are densely populated there get a gain near
``alpha``, sparsely populated (bright) bins get a gain near 1.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, InvalidArgumentError
from .histogram import Histogram1D, Histogram2D, collapse_gray

ADAPTIVE = "adaptive"
STEP = "step"
STEP_CUT = 0.3


@dataclass(frozen=True)
class ModulationParams:
    max_T: float = 0.48
    min_T: float = 0.05
    gamma: float = 1.8
    alpha: float = 0.02
    smooth_radius: int = 5
    upper_section_lo: float = 0.55

    def __post_init__(self):
        if not 0 < self.min_T < self.max_T <= 1:
            raise InvalidArgumentError("need 0 < min_T < max_T <= 1")
        if not self.gamma > 0:
            raise InvalidArgumentError("gamma must be positive")
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError("alpha must lie in (0, 1)")
        if self.smooth_radius < 1 or self.smooth_radius % 2 == 0:
            raise InvalidArgumentError("smooth_radius must be an odd kernel edge")
        if not 0 <= self.upper_section_lo < 1:
            raise InvalidArgumentError("upper_section_lo must lie in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "ModulationParams":
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


#: Milder curve for the final prediction: higher truncation levels, lower
#: gamma and a higher floor keep more mid/low gray mass.
FM2_DEFAULTS = ModulationParams(max_T=0.56, min_T=0.08, gamma=1.2, alpha=0.06)


@dataclass(frozen=True, eq=False)
class ModulationFunction:
    """Per-bin gains. ``truncated`` and ``inverted`` keep the intermediate
    curves of the adaptive construction (``None`` in step mode)."""

    gains: np.ndarray
    params: ModulationParams
    mode: str = ADAPTIVE
    truncated: np.ndarray | None = None
    inverted: np.ndarray | None = None

    @property
    def bins(self) -> int:
        return self.gains.shape[0]


@dataclass(frozen=True, eq=False)
class HalfSelection:
    side: str
    n_left: float
    n_right: float
    h_tf: Histogram1D


def upper_section(edges: np.ndarray, lo: float) -> np.ndarray:
    """Bins overlapping ``[lo, 1]``, i.e. whose upper edge lies above ``lo``."""
    return edges[1:] > lo


def identify_tumor_free_half(h_left: Histogram2D, h_right: Histogram2D,
                             params: ModulationParams) -> HalfSelection:
    """Pick the half with fewer bright voxels; ties go to the left half."""
    if h_left.counts.shape != h_right.counts.shape:
        raise InvalidArgumentError("half histograms differ in shape")
    upper = upper_section(h_left.bin_edges, params.upper_section_lo)
    n_left = float(h_left.counts[upper].sum())
    n_right = float(h_right.counts[upper].sum())
    side = "left" if n_left <= n_right else "right"
    chosen = h_left if side == "left" else h_right
    return HalfSelection(side, n_left, n_right, collapse_gray(chosen))


def _smooth(x: np.ndarray, edge: int) -> np.ndarray:
    return ndimage.uniform_filter1d(x, size=edge, mode="nearest")


def _peak_normalize(counts: np.ndarray) -> np.ndarray:
    peak = counts.max()
    if not peak > 0:
        raise DegenerateInputError("histogram has no mass")
    return counts / peak


def truncate_bins(h_tf: Histogram1D, params: ModulationParams) -> Histogram1D:
    """Peak-normalize, then clamp every bin into ``[min_T, max_T]``."""
    normed = _peak_normalize(np.asarray(h_tf.counts, dtype=np.float64))
    return Histogram1D(np.clip(normed, params.min_T, params.max_T), h_tf.bin_edges)


def build_modulation(h_tf: Histogram1D, params: ModulationParams) -> ModulationFunction:
    """Smooth, truncate, invert with exponent ``gamma``, smooth again, and
    rescale so the gains span ``[alpha, 1]``.

    A flat inverted curve (nothing to discriminate) maps to ``alpha``
    everywhere.
    """
    counts = np.asarray(h_tf.counts, dtype=np.float64)
    if not counts.sum() > 0:
        raise DegenerateInputError("tumor-free half histogram is empty")
    smoothed = _smooth(counts, params.smooth_radius)
    truncated = truncate_bins(Histogram1D(smoothed, h_tf.bin_edges), params).counts
    inverted = (1.0 / truncated) ** params.gamma
    curve = _smooth(inverted, params.smooth_radius)

    lo, hi = curve.min(), curve.max()
    span = hi - lo
    # Relative test so rounding noise on a flat curve does not count as shape.
    if span <= 1e-12 * hi:
        gains = np.full_like(curve, params.alpha)
    else:
        gains = params.alpha + (1.0 - params.alpha) * (curve - lo) / span
        np.clip(gains, params.alpha, 1.0, out=gains)
    return ModulationFunction(gains, params, ADAPTIVE, truncated, inverted)


def step_modulation(edges: np.ndarray, params: ModulationParams, cut: float = STEP_CUT) -> ModulationFunction:
    """Fixed unit step at ``cut`` (by bin center), ignoring the data."""
    centers = 0.5 * (edges[:-1] + edges[1:])
    gains = (centers >= cut).astype(np.float64)
    return ModulationFunction(gains, params, STEP)


def apply_modulation(h: Histogram2D, f: ModulationFunction) -> Histogram2D:
    if h.bins != f.bins:
        raise InvalidArgumentError(f"histogram has {h.bins} bins, modulation {f.bins}")
    return h.with_counts(h.counts * f.gains[:, None])
