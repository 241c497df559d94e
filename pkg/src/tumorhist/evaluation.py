"""Scoring a pipeline run against a known truth mask (phantoms, labeled scans)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import DetectionParams, detect
from .prediction import PipelineConfig, PredictionResult, run_pipeline
from .runner import case_metrics
from .volume import BinaryMask3, Volume3, downsample


@dataclass(frozen=True)
class CaseScore:
    metrics: dict
    threshold: float
    bbox_error: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]
    retention: float

    @property
    def bbox_max_error(self) -> int:
        return max(abs(v) for pair in self.bbox_error for v in pair)


def truth_bbox_working(truth: BinaryMask3, ds_factor: int):
    """Inclusive truth extent per grid axis, mapped onto the working grid.

    In-plane axes are floor-divided by ``ds_factor`` (the block a truth voxel
    falls in); the SI axis is untouched.
    """
    idx = np.nonzero(truth.data)
    if not idx[0].size:
        return None
    out = []
    for ax, ii in enumerate(idx):
        lo, hi = int(ii.min()), int(ii.max())
        if truth.axis_roles[ax] in ("LR", "AP"):
            lo, hi = lo // ds_factor, hi // ds_factor
        out.append((lo, hi))
    return tuple(out)


def bbox_of(result: PredictionResult):
    v = result.bbox_volume
    return tuple((o, o + d - 1) for o, d in zip(v.voxel_origin, v.dims))


def retained_fraction(result: PredictionResult, truth: BinaryMask3, ds_factor: int) -> float:
    """Share of (working-grid) truth voxels inside the bounding box."""
    t = downsample(truth, ds_factor).data
    total = int(t.sum())
    if total == 0:
        return 1.0
    region = tuple(slice(lo, hi + 1) for lo, hi in bbox_of(result))
    return float(t[region].sum()) / total


def score_case(vol: Volume3, truth: BinaryMask3, cfg: PipelineConfig | None = None) -> CaseScore:
    cfg = cfg or PipelineConfig()
    result = run_pipeline(vol, cfg)
    mask, threshold = detect(result, vol.dims, cfg.ds_factor, DetectionParams(cdf_fraction=cfg.cdf_fraction))
    metrics = case_metrics(result, mask, truth, cfg.ds_factor, cfg.bins)
    tb = truth_bbox_working(truth, cfg.ds_factor)
    bb = bbox_of(result)
    err = tuple((b[0] - t[0], b[1] - t[1]) for b, t in zip(bb, tb)) if tb else ((0, 0),) * 3
    return CaseScore(metrics, threshold, err, retained_fraction(result, truth, cfg.ds_factor))
