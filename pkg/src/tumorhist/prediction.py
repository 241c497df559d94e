"""Three predict-and-crop passes followed by the final tumor histogram prediction."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import (DegenerateInputError, InvalidArgumentError, NoSignalError,
                     StageError, TumorHistError)
from .histogram import (DEFAULT_BINS, CDFCurve, Histogram1D, Histogram2D,
                        LocationalProfile, asymmetry_map, cdf_from_h1d,
                        collapse_gray, collapse_slice, histogram2d)
from .modulation import (ADAPTIVE, FM2_DEFAULTS, STEP, HalfSelection,
                         ModulationFunction, ModulationParams, apply_modulation,
                         build_modulation, identify_tumor_free_half,
                         step_modulation)
from .volume import (NormalizedVolume, Volume3, brain_region, crop_axis, downsample,
                     normalize_gray, preprocess, role_of, split_halves)

# Fixed order of the coarse passes: (series, slice axis role, uses asymmetry).
STEPS = (("axial", "SI", True), ("coronal", "AP", True), ("sagittal", "LR", False))


@dataclass(frozen=True)
class PipelineConfig:
    fm1: ModulationParams = field(default_factory=ModulationParams)
    fm2: ModulationParams = FM2_DEFAULTS
    bins: int = DEFAULT_BINS
    crop_steps: int = 3
    modulation_mode: str = ADAPTIVE
    cdf_fraction: float = 0.20
    profile_smooth_radius: int = 3
    minima_epsilon: float = 0.02
    lp_radius: int = 3
    ds_factor: int = 2

    def __post_init__(self):
        if self.crop_steps not in (0, 1, 2, 3):
            raise InvalidArgumentError("crop_steps must be 0, 1, 2 or 3")
        if self.modulation_mode not in (ADAPTIVE, STEP):
            raise InvalidArgumentError(f"unknown modulation mode {self.modulation_mode!r}")
        if not 0 < self.cdf_fraction < 1:
            raise InvalidArgumentError("cdf_fraction must lie in (0, 1)")
        if self.profile_smooth_radius < 1 or self.profile_smooth_radius % 2 == 0:
            raise InvalidArgumentError("profile_smooth_radius must be an odd kernel edge")
        if not self.minima_epsilon >= 0:
            raise InvalidArgumentError("minima_epsilon must be non-negative")
        if self.bins < 2:
            raise InvalidArgumentError("bins must be >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        for key in ("fm1", "fm2"):
            if key in d and isinstance(d[key], dict):
                base = ModulationParams() if key == "fm1" else FM2_DEFAULTS
                d[key] = replace(base, **d[key])
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CropRange:
    axis_role: str
    lo: int
    hi: int
    lo_orig: int
    hi_orig: int

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1


@dataclass(eq=False)
class PredictionResult:
    h_pa: Histogram2D
    h_pc: Histogram2D
    h_ps: Histogram2D
    h1d_pred: Histogram1D
    cdf_pred: CDFCurve
    bbox: dict[str, CropRange]
    half: HalfSelection
    fm1_used: ModulationFunction
    fm2_used: ModulationFunction
    bbox_volume: NormalizedVolume
    normalized: NormalizedVolume
    crops: list[CropRange] = field(default_factory=list)
    intermediate: dict[str, Histogram2D] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def predicted(self) -> dict[str, Histogram2D]:
        return {"axial": self.h_pa, "coronal": self.h_pc, "sagittal": self.h_ps}


def smooth_profile(values: np.ndarray, edge: int) -> np.ndarray:
    return ndimage.uniform_filter1d(np.asarray(values, dtype=np.float64), size=edge, mode="nearest")


def _walk(s: np.ndarray, start: int, step: int, tol: float, ceiling: float) -> int:
    """Walk from ``start`` in direction ``step`` to the first local minimum.

    While the curve is above ``ceiling`` (the upper half of the peak) every
    slice is taken. Below it the walk stops at the first index whose next
    value rises or drops by no more than ``tol``; a slowly sinking floor of
    background counts therefore does not drag the bound outward.
    """
    n = len(s)
    k = start
    while 0 <= k + step < n:
        nxt = s[k + step]
        if s[k] <= ceiling and s[k] - nxt <= tol:
            break
        k += step
    return k


def find_tumor_slice_range(p: LocationalProfile | np.ndarray, cfg: PipelineConfig,
                           axis_role: str = "SI", origin: int = 0) -> CropRange:
    """Slices between the two local minima bracketing the profile maximum."""
    values = p.values if isinstance(p, LocationalProfile) else np.asarray(p, dtype=np.float64)
    n = len(values)
    if n < 3:
        raise InvalidArgumentError("profile needs at least 3 slices")
    if not values.max() > 0:
        raise NoSignalError("locational profile is all zero")
    s = smooth_profile(values, cfg.profile_smooth_radius)
    peak = int(np.argmax(s))
    tol = cfg.minima_epsilon * s[peak]
    ceiling = 0.5 * s[peak]
    lo = _walk(s, peak, -1, tol, ceiling)
    hi = _walk(s, peak, +1, tol, ceiling)
    return CropRange(role_of(axis_role), lo, hi, lo + origin, hi + origin)


def _full_range(vol: Volume3, role: str) -> CropRange:
    ax = vol.axis(role)
    n = vol.dims[ax]
    o = vol.voxel_origin[ax]
    return CropRange(role, 0, n - 1, o, o + n - 1)


def coarse_histogram(state: NormalizedVolume, role: str, bins: int, use_asymmetry: bool) -> Histogram2D:
    if use_asymmetry:
        if role == "LR":
            raise InvalidArgumentError("asymmetry maps need an axial or coronal series")
        left, right = split_halves(state)
        return asymmetry_map(histogram2d(left, role, bins), histogram2d(right, role, bins))
    return histogram2d(state, role, bins)


def coarse_step(state: NormalizedVolume, axis: str, f: ModulationFunction, cfg: PipelineConfig,
                use_asymmetry: bool):
    """One predict-and-crop pass. Returns ``(h_m, crop_range, cropped_state)``.

    With no signal in the modulated histogram nothing is cropped.
    """
    role = role_of(axis)
    h_m = apply_modulation(coarse_histogram(state, role, cfg.bins, use_asymmetry), f)
    origin = state.voxel_origin[state.axis(role)]
    try:
        rng = find_tumor_slice_range(collapse_slice(h_m), cfg, role, origin)
    except NoSignalError:
        return h_m, _full_range(state, role), state
    return h_m, rng, crop_axis(state, role, (rng.lo, rng.hi))


def final_predict(bbox_vol: NormalizedVolume, fm2: ModulationFunction, cfg: PipelineConfig):
    """Modulated bounding-box histograms per series plus the 1D prediction and CDF."""
    if bbox_vol.data.size == 0 or not bbox_vol.included.any():
        raise NoSignalError("bounding box holds no included voxels")
    out = {}
    for name, role, _ in STEPS:
        out[name] = apply_modulation(histogram2d(bbox_vol, role, cfg.bins), fm2)
    h1d = collapse_gray(out["axial"])
    cdf = cdf_from_h1d(h1d)
    return out["axial"], out["coronal"], out["sagittal"], h1d, cdf


def build_modulations(h_tf: Histogram1D, cfg: PipelineConfig):
    if cfg.modulation_mode == STEP:
        return (step_modulation(h_tf.bin_edges, cfg.fm1), step_modulation(h_tf.bin_edges, cfg.fm2))
    return build_modulation(h_tf, cfg.fm1), build_modulation(h_tf, cfg.fm2)


class _Stage:
    """Times a pipeline stage and tags escaping errors with its name."""

    def __init__(self, name: str, timings: dict):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = 1000.0 * (time.perf_counter() - self.t0)
        if exc is not None and isinstance(exc, (TumorHistError, ValueError)) \
                and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def run_pipeline(vol: Volume3, cfg: PipelineConfig | None = None) -> PredictionResult:
    """Preprocess a raw Flair scan and predict its tumor histograms."""
    cfg = cfg or PipelineConfig()
    timings: dict[str, float] = {}

    with _Stage("preprocess", timings):
        work = preprocess(vol, cfg.lp_radius, cfg.ds_factor)
        # Brain support comes from the raw scan: the low-pass leaks a dim
        # halo past the skull-stripped boundary that would drag the mean down.
        mask = downsample(brain_region(vol), cfg.ds_factor)
        norm = normalize_gray(work, mask)

    with _Stage("modulation", timings):
        left, right = split_halves(norm)
        half = identify_tumor_free_half(histogram2d(left, "SI", cfg.bins),
                                        histogram2d(right, "SI", cfg.bins), cfg.fm1)
        fm1, fm2 = build_modulations(half.h_tf, cfg)

    state = norm
    crops: list[CropRange] = []
    intermediate: dict[str, Histogram2D] = {}
    with _Stage("coarse", timings):
        for name, role, use_asym in STEPS[:cfg.crop_steps]:
            h_m, rng, state = coarse_step(state, role, fm1, cfg, use_asym)
            intermediate[f"h_m_{name}"] = h_m
            crops.append(rng)

    with _Stage("final", timings):
        h_pa, h_pc, h_ps, h1d, cdf = final_predict(state, fm2, cfg)
        for name, role, _ in STEPS:
            intermediate[f"h_b_{name}"] = histogram2d(state, role, cfg.bins)

    bbox = {role: _full_range(state, role) for role in ("SI", "AP", "LR")}
    for c in crops:
        bbox[c.axis_role] = c
    return PredictionResult(h_pa, h_pc, h_ps, h1d, cdf, bbox, half, fm1, fm2, state, norm,
                            crops, intermediate, timings)
