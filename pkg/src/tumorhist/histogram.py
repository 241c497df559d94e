"""Gray-level x slice-index histograms and their 1D reductions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .volume import NormalizedVolume, Volume3, role_of

DEFAULT_BINS = 64


def uniform_edges(bins: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, bins + 1)


@dataclass(frozen=True, eq=False)
class Histogram2D:
    """``counts[i, j]``: voxels of gray bin ``i`` in slice ``j``."""

    counts: np.ndarray
    axis_role: str
    bin_edges: np.ndarray

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    @property
    def n_slices(self) -> int:
        return self.counts.shape[1]

    def total(self) -> float:
        return float(self.counts.sum())

    def with_counts(self, counts: np.ndarray) -> "Histogram2D":
        return Histogram2D(counts, self.axis_role, self.bin_edges)


@dataclass(frozen=True, eq=False)
class Histogram1D:
    counts: np.ndarray
    bin_edges: np.ndarray

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    def total(self) -> float:
        return float(self.counts.sum())

    def scaled(self, factor: float) -> "Histogram1D":
        return Histogram1D(self.counts * factor, self.bin_edges)


@dataclass(frozen=True, eq=False)
class LocationalProfile:
    values: np.ndarray

    @property
    def n_slices(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class CDFCurve:
    values: np.ndarray
    bin_edges: np.ndarray

    @property
    def bins(self) -> int:
        return self.values.shape[0]


def bin_index(gray: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Half-open bins ``[e_k, e_k+1)``; the last bin also takes gray == 1."""
    idx = np.searchsorted(edges, gray, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def histogram2d(
    vol: NormalizedVolume,
    axis: str,
    bins: int = DEFAULT_BINS,
    restrict: np.ndarray | Volume3 | None = None,
) -> Histogram2D:
    """Count included voxels by (gray bin, slice index along ``axis``).

    ``restrict`` limits counting to voxels where it is true; this is how the
    ground-truth tumor histograms are built from a truth mask.
    """
    if bins < 2:
        raise InvalidArgumentError("need at least 2 gray bins")
    role = role_of(axis)
    ax = vol.axis(role)
    edges = uniform_edges(bins)
    n_slices = vol.dims[ax]

    keep = vol.included
    if restrict is not None:
        r = restrict.data if isinstance(restrict, Volume3) else np.asarray(restrict)
        if r.shape != vol.dims:
            raise InvalidArgumentError("restrict mask shape differs from volume")
        keep = keep & r.astype(bool)

    # Move the slice axis first so the flat index is slice-major.
    gray = np.moveaxis(vol.data, ax, 0)
    keep = np.moveaxis(keep, ax, 0)
    slice_idx = np.broadcast_to(np.arange(n_slices)[:, None, None], gray.shape)[keep]
    gbin = bin_index(gray[keep], edges)
    flat = np.bincount(gbin * n_slices + slice_idx, minlength=bins * n_slices)
    return Histogram2D(flat.reshape(bins, n_slices).astype(np.float64), role, edges)


def collapse_gray(h: Histogram2D) -> Histogram1D:
    return Histogram1D(h.counts.sum(axis=1), h.bin_edges)


def collapse_slice(h: Histogram2D) -> LocationalProfile:
    return LocationalProfile(h.counts.sum(axis=0))


def asymmetry_map(h_left: Histogram2D, h_right: Histogram2D) -> Histogram2D:
    """Unsigned bin-wise difference of the two half histograms."""
    if h_left.counts.shape != h_right.counts.shape or h_left.axis_role != h_right.axis_role:
        raise InvalidArgumentError(
            f"histogram mismatch: {h_left.counts.shape}/{h_left.axis_role} vs "
            f"{h_right.counts.shape}/{h_right.axis_role}"
        )
    return h_left.with_counts(np.abs(h_left.counts - h_right.counts))


def cdf_from_h1d(h: Histogram1D) -> CDFCurve:
    total = h.total()
    if not total > 0:
        raise DegenerateInputError("cannot build a CDF from an empty histogram")
    # Clip so rounding past 1 cannot make the forced final 1.0 a dip.
    values = np.minimum(np.cumsum(h.counts) / total, 1.0)
    values[-1] = 1.0
    return CDFCurve(values, h.bin_edges)


def embed_slices(h: Histogram2D, n_slices: int, offset: int) -> Histogram2D:
    """Zero-pad ``h`` along the slice axis so it sits at ``offset`` in ``n_slices``."""
    if offset < 0 or offset + h.n_slices > n_slices:
        raise InvalidArgumentError("histogram does not fit in the requested slice range")
    out = np.zeros((h.bins, n_slices))
    out[:, offset:offset + h.n_slices] = h.counts
    return h.with_counts(out)


def full_range_normalize(vol: Volume3, mask) -> NormalizedVolume:
    """Min-max normalization over the brain region, no mean anchoring.

    Only used for exploratory histogram dumps of whole-brain distributions.
    """
    m = mask.data if isinstance(mask, Volume3) else np.asarray(mask, dtype=bool)
    values = vol.data[m].astype(np.float64)
    if values.size == 0:
        raise DegenerateInputError("brain mask is empty")
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        raise DegenerateInputError("brain region has constant gray level")
    out = np.full(vol.dims, -1.0)
    out[m] = (vol.data[m] - lo) / (hi - lo)
    return NormalizedVolume(out, vol.axis_roles, vol.voxel_origin, mu_brain=lo, v_max=hi)
