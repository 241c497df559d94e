"""Dense 3D volumes, preprocessing, gray normalization and axis-aware cropping.

Grids are numpy arrays indexed ``data[i, j, k]``. Which anatomical direction
each grid axis runs along is recorded in ``axis_roles``; the default
``("LR", "AP", "SI")`` matches the usual RAS-like layout of BraTS NIfTI files
(left-right fastest on disk). All operations look axes up by role, so a
volume with permuted roles is handled without transposing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, InvalidArgumentError

ROLES = ("LR", "AP", "SI")
DEFAULT_AXIS_ROLES = ROLES

# Slice-series name -> axis role indexing the slices.
SERIES = {"axial": "SI", "coronal": "AP", "sagittal": "LR"}

#: Gray value marking voxels left out of a :class:`NormalizedVolume`.
EXCLUDED = -1.0


def role_of(axis: str) -> str:
    """Accept either a role (``"SI"``) or a series name (``"axial"``)."""
    if axis in ROLES:
        return axis
    try:
        return SERIES[axis]
    except KeyError:
        raise InvalidArgumentError(f"unknown axis {axis!r}") from None


@dataclass(frozen=True, eq=False)
class Volume3:
    data: np.ndarray
    axis_roles: tuple[str, str, str] = DEFAULT_AXIS_ROLES
    voxel_origin: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        if self.data.ndim != 3:
            raise InvalidArgumentError(f"expected a 3D grid, got shape {self.data.shape}")
        if sorted(self.axis_roles) != sorted(ROLES):
            raise InvalidArgumentError(f"axis_roles must be a permutation of {ROLES}")
        object.__setattr__(self, "axis_roles", tuple(self.axis_roles))
        object.__setattr__(self, "voxel_origin", tuple(int(v) for v in self.voxel_origin))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    def axis(self, role: str) -> int:
        """Grid axis index carrying ``role`` (role or series name)."""
        return self.axis_roles.index(role_of(role))

    def length(self, role: str) -> int:
        return self.data.shape[self.axis(role)]

    def with_data(self, data: np.ndarray, **changes):
        return dataclasses.replace(self, data=data, **changes)


@dataclass(frozen=True, eq=False)
class BinaryMask3(Volume3):
    def __post_init__(self):
        super().__post_init__()
        if self.data.dtype != bool:
            object.__setattr__(self, "data", self.data.astype(bool))

    @property
    def positive_count(self) -> int:
        return int(np.count_nonzero(self.data))


@dataclass(frozen=True, eq=False)
class BrainMask(BinaryMask3):
    @property
    def voxel_count(self) -> int:
        return self.positive_count


@dataclass(frozen=True, eq=False)
class NormalizedVolume(Volume3):
    """Mean-anchored gray levels in [0, 1]; ``EXCLUDED`` elsewhere.

    ``mu_brain`` and ``v_max`` are the source-scale anchors mapped to 0 and 1.
    """

    mu_brain: float = 0.0
    v_max: float = 1.0

    @property
    def included(self) -> np.ndarray:
        return self.data >= 0.0


def _check_kernel(edge: int, name: str = "kernel edge") -> None:
    if edge < 1 or edge % 2 == 0:
        raise InvalidArgumentError(f"{name} must be odd and >= 1, got {edge}")


def preprocess(vol: Volume3, lp_radius: int = 3, ds_factor: int = 2) -> Volume3:
    """Box-mean low-pass filter, then downsample the two in-plane axes.

    ``lp_radius`` is the edge of the cubic box kernel (replicate-edge
    padding). The LR and AP axes are reduced by ``ds_factor`` with block
    means (see :func:`downsample`); the SI axis is untouched so slice
    indices stay comparable to the raw scan.
    """
    _check_kernel(lp_radius, "lp_radius")
    if ds_factor < 1:
        raise InvalidArgumentError(f"ds_factor must be >= 1, got {ds_factor}")
    if min(vol.dims) < lp_radius:
        raise InvalidArgumentError(f"kernel edge {lp_radius} exceeds volume dims {vol.dims}")

    smoothed = ndimage.uniform_filter(vol.data.astype(np.float64), size=lp_radius, mode="nearest")
    return downsample(Volume3(smoothed, vol.axis_roles), ds_factor)


def _blocks(data: np.ndarray, ax: int, ds: int) -> np.ndarray:
    """Reshape axis ``ax`` into ``(n // ds, ds)``, dropping a trailing remainder."""
    n = data.shape[ax] // ds
    data = np.take(data, np.arange(n * ds), axis=ax)
    return data.reshape(data.shape[:ax] + (n, ds) + data.shape[ax + 1:])


def downsample(vol: Volume3, ds_factor: int):
    """In-plane reduction by ``ds_factor`` using non-overlapping blocks.

    Gray volumes take the block mean; masks keep a voxel only if its whole
    block is set. Blocks start at index 0 and a remainder shorter than
    ``ds_factor`` is dropped. Unlike keeping every ``ds_factor``-th sample,
    this keeps an even-width grid mirror-symmetric about its midplane.
    """
    if ds_factor < 1:
        raise InvalidArgumentError(f"ds_factor must be >= 1, got {ds_factor}")
    data = vol.data
    if ds_factor > 1:
        for role in ("LR", "AP"):
            ax = vol.axis(role)
            blocks = _blocks(data, ax, ds_factor)
            data = blocks.all(axis=ax + 1) if data.dtype == bool else blocks.mean(axis=ax + 1)
    return vol.with_data(data, voxel_origin=(0, 0, 0))


def brain_region(vol: Volume3) -> BrainMask:
    """Brain support of a skull-stripped scan: every strictly positive voxel."""
    return BrainMask(vol.data > 0, vol.axis_roles, vol.voxel_origin)


def normalize_gray(vol: Volume3, mask: BrainMask) -> NormalizedVolume:
    """Map brain grays so the brain mean goes to 0 and the brain max to 1.

    Voxels outside ``mask`` or darker than the brain mean are set to
    ``EXCLUDED``.
    """
    if mask.dims != vol.dims:
        raise InvalidArgumentError("mask and volume dims differ")
    if mask.voxel_count == 0:
        raise DegenerateInputError("brain mask is empty")
    values = vol.data[mask.data].astype(np.float64)
    mu = float(values.mean())
    v_max = float(values.max())
    if not v_max > mu:
        raise DegenerateInputError("brain region has constant gray level")

    src = vol.data.astype(np.float64)
    keep = mask.data & (src >= mu)
    out = np.full(vol.dims, EXCLUDED)
    out[keep] = (src[keep] - mu) / (v_max - mu)
    np.clip(out, EXCLUDED, 1.0, out=out)
    return NormalizedVolume(out, vol.axis_roles, vol.voxel_origin, mu_brain=mu, v_max=v_max)


def split_halves(vol: Volume3):
    """Split at the LR midplane into ``(left, right)``.

    Left is the low-index side of the LR axis. With an odd LR length the
    center plane belongs to neither half.
    """
    ax = vol.axis("LR")
    n = vol.dims[ax]
    if n < 2:
        raise InvalidArgumentError("LR axis needs at least 2 planes to split")
    half = n // 2
    left = crop_axis(vol, "LR", (0, half - 1))
    right = crop_axis(vol, "LR", (n - half, n - 1))
    return left, right


def crop_axis(vol: Volume3, axis: str, bounds: tuple[int, int]):
    """Keep slices ``lo..hi`` (inclusive) along ``axis``; same type as ``vol``."""
    ax = vol.axis(axis)
    lo, hi = int(bounds[0]), int(bounds[1])
    n = vol.dims[ax]
    if not 0 <= lo <= hi < n:
        raise InvalidArgumentError(f"crop range {(lo, hi)} invalid for axis of length {n}")
    index = [slice(None)] * 3
    index[ax] = slice(lo, hi + 1)
    origin = list(vol.voxel_origin)
    origin[ax] += lo
    return vol.with_data(vol.data[tuple(index)], voxel_origin=tuple(origin))


def embed(vol: Volume3, parent_dims, fill=0):
    """Place ``vol`` back at its ``voxel_origin`` inside a grid of ``parent_dims``."""
    out = np.full(parent_dims, fill, dtype=vol.data.dtype)
    region = tuple(slice(o, o + d) for o, d in zip(vol.voxel_origin, vol.dims))
    if any(s.stop > p for s, p in zip(region, parent_dims)):
        raise InvalidArgumentError("volume does not fit inside parent grid")
    out[region] = vol.data
    return out
