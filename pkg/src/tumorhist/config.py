"""JSON run configuration.

Schema (every section and key optional; unknown keys are an error)::

    {
      "pipeline": {
        "bins": 64, "crop_steps": 3, "modulation_mode": "adaptive",
        "cdf_fraction": 0.2, "profile_smooth_radius": 3,
        "minima_epsilon": 0.02, "lp_radius": 3, "ds_factor": 2,
        "fm1": {"max_T": 0.48, "min_T": 0.05, "gamma": 1.8, "alpha": 0.02,
                "smooth_radius": 5, "upper_section_lo": 0.55},
        "fm2": {"max_T": 0.56, "min_T": 0.08, "gamma": 1.2, "alpha": 0.06}
      },
      "detection": {"morph_kernel_edge": 5, "morph_floor": 0.5},
      "io": {"axis_roles": null, "heatmaps": true, "heatmap_log": true,
             "write_mask": true}
    }

``pipeline.cdf_fraction`` also drives the detection threshold.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

from .detection import DetectionParams
from .errors import InvalidArgumentError
from .prediction import PipelineConfig
from .volume import ROLES


@dataclass(frozen=True)
class IOOptions:
    axis_roles: tuple[str, str, str] | None = None
    heatmaps: bool = True
    heatmap_log: bool = True
    write_mask: bool = True

    def __post_init__(self):
        if self.axis_roles is not None:
            roles = tuple(self.axis_roles)
            if sorted(roles) != sorted(ROLES):
                raise InvalidArgumentError(f"io.axis_roles must be a permutation of {ROLES}")
            object.__setattr__(self, "axis_roles", roles)


@dataclass(frozen=True)
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    detection: DetectionParams = field(default_factory=DetectionParams)
    io: IOOptions = field(default_factory=IOOptions)

    def __post_init__(self):
        # One knob for the CDF fraction, owned by the pipeline section.
        if self.detection.cdf_fraction != self.pipeline.cdf_fraction:
            object.__setattr__(self, "detection",
                               replace(self.detection, cdf_fraction=self.pipeline.cdf_fraction))

    def to_dict(self) -> dict:
        det = asdict(self.detection)
        det.pop("cdf_fraction")
        io = asdict(self.io)
        if io["axis_roles"] is not None:
            io["axis_roles"] = list(io["axis_roles"])
        return {"pipeline": self.pipeline.to_dict(), "detection": det, "io": io}

    def with_overrides(self, crop_steps=None, modulation=None, cdf_fraction=None) -> "RunConfig":
        changes = {}
        if crop_steps is not None:
            changes["crop_steps"] = crop_steps
        if modulation is not None:
            changes["modulation_mode"] = modulation
        if cdf_fraction is not None:
            changes["cdf_fraction"] = cdf_fraction
        if not changes:
            return self
        return replace(self, pipeline=replace(self.pipeline, **changes))


def _check_keys(section: str, d, allowed) -> None:
    if not isinstance(d, dict):
        raise InvalidArgumentError(f"config section {section!r} must be an object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise InvalidArgumentError(f"unknown keys in {section!r}: {', '.join(unknown)}")


def config_from_dict(d: dict) -> RunConfig:
    _check_keys("<root>", d, ("pipeline", "detection", "io"))
    pipe = dict(d.get("pipeline", {}))
    _check_keys("pipeline", pipe, [f.name for f in fields(PipelineConfig)])
    for key in ("fm1", "fm2"):
        if key in pipe:
            _check_keys(f"pipeline.{key}", pipe[key],
                        ("max_T", "min_T", "gamma", "alpha", "smooth_radius", "upper_section_lo"))
    det = dict(d.get("detection", {}))
    _check_keys("detection", det, ("morph_kernel_edge", "morph_floor"))
    io = dict(d.get("io", {}))
    _check_keys("io", io, [f.name for f in fields(IOOptions)])
    try:
        return RunConfig(PipelineConfig.from_dict(pipe), DetectionParams.from_dict(det), IOOptions(**io))
    except TypeError as exc:
        raise InvalidArgumentError(f"bad config value: {exc}") from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise InvalidArgumentError(f"{path}: cannot read config ({exc.strerror})") from exc
    return config_from_dict(d)
