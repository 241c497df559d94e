"""Turn the bounding box and predicted CDF into a full-resolution tumor mask."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError
from .histogram import CDFCurve
from .volume import BinaryMask3, NormalizedVolume


@dataclass(frozen=True)
class DetectionParams:
    cdf_fraction: float = 0.20
    morph_kernel_edge: int = 5
    morph_floor: float = 0.5

    def __post_init__(self):
        if self.morph_kernel_edge < 3 or self.morph_kernel_edge % 2 == 0:
            raise InvalidArgumentError("morph_kernel_edge must be odd and >= 3")
        if not 0 < self.morph_floor < 1:
            raise InvalidArgumentError("morph_floor must lie in (0, 1)")
        if not 0 < self.cdf_fraction < 1:
            raise InvalidArgumentError("cdf_fraction must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionParams":
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def threshold_from_cdf(cdf: CDFCurve, fraction: float) -> float:
    """Lower edge of the first bin where the CDF reaches ``fraction``."""
    # Guard against the terminal value sitting a hair under 1.
    k = int(np.searchsorted(cdf.values, fraction, side="left"))
    k = min(k, cdf.bins - 1)
    return float(cdf.bin_edges[k])


def binarize(bbox_vol: NormalizedVolume, threshold: float) -> BinaryMask3:
    data = bbox_vol.included & (bbox_vol.data >= threshold)
    return BinaryMask3(data, bbox_vol.axis_roles, bbox_vol.voxel_origin)


def morph_smooth(m: BinaryMask3, p: DetectionParams = DetectionParams()) -> BinaryMask3:
    """Box-average the 0/1 grid (zero padding) and keep voxels above the floor."""
    if m.data.size == 0:
        return m
    mean = ndimage.uniform_filter(m.data.astype(np.float64), size=p.morph_kernel_edge,
                                  mode="constant", cval=0.0)
    # Slack absorbs summation rounding: a mean exactly at the floor stays false.
    return BinaryMask3(mean > p.morph_floor + 1e-12, m.axis_roles, m.voxel_origin)


def embed_mask(m: BinaryMask3, original_dims, ds_factor: int, clip: bool = False) -> BinaryMask3:
    """Nearest-neighbor upsample the in-plane axes and place the mask in the
    original grid at its (scaled) ``voxel_origin``.

    With ``clip`` any part of the upsampled block overhanging the original
    grid is dropped instead of raising.
    """
    if ds_factor < 1:
        raise InvalidArgumentError("ds_factor must be >= 1")
    data = m.data
    origin = list(m.voxel_origin)
    for role in ("LR", "AP"):
        ax = m.axis(role)
        data = np.repeat(data, ds_factor, axis=ax)
        origin[ax] *= ds_factor

    out = np.zeros(tuple(original_dims), dtype=bool)
    region = []
    block = []
    for o, d, n in zip(origin, data.shape, original_dims):
        if o < 0 or o > n or (o + d > n and not clip):
            raise InvalidArgumentError(
                f"mask of extent {data.shape} at {tuple(origin)} does not fit in {tuple(original_dims)}")
        stop = min(o + d, n)
        region.append(slice(o, stop))
        block.append(slice(0, stop - o))
    out[tuple(region)] = data[tuple(block)]
    return BinaryMask3(out, m.axis_roles, (0, 0, 0))


def detect(prediction, original_dims, ds_factor: int, params: DetectionParams = DetectionParams()):
    """Threshold, morphology and re-embedding for one pipeline result.

    Returns ``(mask, threshold)``; ``mask`` lives on the original grid.
    """
    threshold = threshold_from_cdf(prediction.cdf_pred, params.cdf_fraction)
    coarse = binarize(prediction.bbox_volume, threshold)
    smooth = morph_smooth(coarse, params)
    return embed_mask(smooth, original_dims, ds_factor, clip=True), threshold
