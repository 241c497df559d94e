"""Per-case orchestration, batch runs and JSON/CSV reporting.

Input layout: one ``<id>_flair.nii[.gz]`` per case, optionally next to a
``<id>_seg.nii[.gz]`` ground-truth label map (any label > 0 counts as tumor).
Cases may sit directly in the input directory or one level down, as in the
BraTS release.
"""

from __future__ import annotations

import csv
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .detection import detect
from .errors import InvalidArgumentError, StageError, TumorHistError
from .heatmap import render_heatmap
from .histogram import embed_slices, histogram2d
from .metrics import confusion_metrics, similarity_scores, ssim2d, summarize
from .nifti import read_nifti, write_nifti_mask
from .prediction import STEPS, run_pipeline
from .volume import BinaryMask3, downsample

SCAN_RE = re.compile(r"^(?P<id>.+)_flair\.nii(\.gz)?$")

METRIC_NAMES = (
    "dice", "sensitivity", "fdr",
    "ssim_axial", "ssim_coronal", "ssim_sagittal",
    "cc_axial", "cc_coronal", "cc_sagittal",
    "mse_axial", "mse_coronal", "mse_sagittal",
)

#: Column order of ``cases.csv``.
CSV_COLUMNS = ("case_id", "status", *METRIC_NAMES, "threshold", "predicted_voxels",
               "bbox_lr_lo", "bbox_lr_hi", "bbox_ap_lo", "bbox_ap_hi",
               "bbox_si_lo", "bbox_si_hi", "tumor_free_half", "error")


@dataclass(frozen=True)
class CaseInput:
    case_id: str
    scan: str
    truth: str | None = None


@dataclass
class CaseRecord:
    case_id: str
    scan: str
    truth: str | None
    status: str = "ok"
    error: str | None = None
    summary: dict = field(default_factory=dict)
    metrics: dict | None = None
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class RunReport:
    config: dict
    cases: list[CaseRecord]
    summary: dict
    tool_version: str = __version__
    wall_time_s: float = 0.0

    @property
    def failed(self) -> list[str]:
        return [c.case_id for c in self.cases if not c.ok]

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "config": self.config,
            "n_cases": len(self.cases),
            "n_failed": len(self.failed),
            "failed": self.failed,
            "summary": self.summary,
            "cases": [asdict(c) for c in self.cases],
            "wall_time_s": self.wall_time_s,
        }


def _find(folder: Path, stem: str):
    for ext in (".nii.gz", ".nii"):
        p = folder / f"{stem}{ext}"
        if p.is_file():
            return p
    return None


def discover_cases(root) -> list[CaseInput]:
    """All cases under ``root`` (flat or one directory per case), sorted by id."""
    root = Path(root)
    if not root.is_dir():
        raise InvalidArgumentError(f"{root} is not a directory")
    found = {}
    candidates = list(root.iterdir()) + [p for d in root.iterdir() if d.is_dir() for p in d.iterdir()]
    for p in candidates:
        m = SCAN_RE.match(p.name)
        if not m or not p.is_file():
            continue
        cid = m.group("id")
        if cid in found:
            raise InvalidArgumentError(f"case id {cid!r} appears more than once under {root}")
        truth = _find(p.parent, f"{cid}_seg")
        found[cid] = CaseInput(cid, str(p), str(truth) if truth else None)
    return [found[k] for k in sorted(found)]


def _clean(x):
    """JSON-safe floats: NaN/inf become null."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def case_metrics(result, mask: BinaryMask3, truth: BinaryMask3, ds_factor: int, bins: int) -> dict:
    """Detection scores on the original grid plus histogram similarity per series.

    Truth histograms are built on the working grid from the downsampled truth
    mask; each predicted histogram is zero-padded back to the full slice range.
    """
    _, dice, sens, fdr = confusion_metrics(mask, truth)
    out = {"dice": dice, "sensitivity": sens, "fdr": fdr}
    t_work = downsample(truth, ds_factor).data
    norm = result.normalized
    for name, role, _ in STEPS:
        ax = norm.axis(role)
        h_t = histogram2d(norm, role, bins, restrict=t_work)
        h_p = embed_slices(result.predicted[name], norm.dims[ax], result.bbox_volume.voxel_origin[ax])
        cc, mse = similarity_scores(h_p, h_t)
        out[f"ssim_{name}"] = ssim2d(h_p, h_t)
        out[f"cc_{name}"] = cc
        out[f"mse_{name}"] = mse
    return {k: out[k] for k in METRIC_NAMES}


def run_case(inp: CaseInput, cfg: RunConfig, out_dir=None) -> CaseRecord:
    """Run one case end to end; failures are captured in the record."""
    rec = CaseRecord(inp.case_id, inp.scan, inp.truth)
    t0 = time.perf_counter()
    stage = "read"
    try:
        vol, hdr = read_nifti(inp.scan, cfg.io.axis_roles)
        rec.timings["read"] = 1000.0 * (time.perf_counter() - t0)

        result = run_pipeline(vol, cfg.pipeline)
        rec.timings.update(result.timings)

        stage = "detection"
        t1 = time.perf_counter()
        mask, threshold = detect(result, vol.dims, cfg.pipeline.ds_factor, cfg.detection)
        rec.timings["detection"] = 1000.0 * (time.perf_counter() - t1)

        rec.summary = {
            "threshold": threshold,
            "predicted_voxels": mask.positive_count,
            "tumor_free_half": result.half.side,
            "mu_brain": result.normalized.mu_brain,
            "v_max": result.normalized.v_max,
            # Bounding box on the working grid (in-plane axes downsampled).
            "bbox": {r.axis_role: [r.lo_orig, r.hi_orig] for r in result.bbox.values()},
            "working_dims": list(result.normalized.dims),
        }

        if inp.truth is not None:
            stage = "metrics"
            t2 = time.perf_counter()
            seg, _ = read_nifti(inp.truth, vol.axis_roles)
            if seg.dims != vol.dims:
                raise InvalidArgumentError(f"truth dims {seg.dims} differ from scan dims {vol.dims}")
            truth = BinaryMask3(seg.data > 0, vol.axis_roles)
            rec.metrics = case_metrics(result, mask, truth, cfg.pipeline.ds_factor, cfg.pipeline.bins)
            rec.timings["metrics"] = 1000.0 * (time.perf_counter() - t2)

        if out_dir is not None:
            stage = "write"
            t3 = time.perf_counter()
            case_dir = Path(out_dir) / inp.case_id
            case_dir.mkdir(parents=True, exist_ok=True)
            if cfg.io.write_mask:
                p = case_dir / f"{inp.case_id}_pred.nii.gz"
                write_nifti_mask(p, mask, hdr)
                rec.outputs["mask"] = p.name
            if cfg.io.heatmaps:
                for key, h in (("h_pa", result.h_pa), ("h_pc", result.h_pc), ("h_ps", result.h_ps)):
                    p = case_dir / f"{inp.case_id}_{key}.pgm"
                    render_heatmap(h, p, cfg.io.heatmap_log)
                    rec.outputs[key] = p.name
            rec.timings["write"] = 1000.0 * (time.perf_counter() - t3)
    except StageError as exc:
        rec.status, rec.error = "failed", f"{exc.stage}: {exc.cause}"
    except (TumorHistError, ValueError, OSError) as exc:
        rec.status, rec.error = "failed", f"{stage}: {exc}"
    rec.timings["total"] = 1000.0 * (time.perf_counter() - t0)
    rec.summary = _clean(rec.summary)
    rec.metrics = _clean(rec.metrics)
    return rec


def _run_one(args):
    return run_case(*args)


def summarize_cases(records) -> dict:
    """Cohort summary per metric over the successful cases that have truth.

    NaN entries (undefined CC) are left out of that metric's summary.
    """
    out = {}
    scored = [r for r in records if r.ok and r.metrics is not None]
    for name in METRIC_NAMES:
        vals = [r.metrics[name] for r in scored if r.metrics[name] is not None]
        if vals:
            s = summarize(vals).to_dict()
            s["n"] = len(vals)
            out[name] = s
    return out


def run_batch(inputs, cfg: RunConfig, out_dir=None, jobs: int = 1, stable: bool = False) -> RunReport:
    """Run every case; one failing case never stops the others.

    Records come back sorted by case id whatever ``jobs`` is. With ``stable``
    every timing is zeroed so repeated runs give byte-identical reports.
    """
    t0 = time.perf_counter()
    inputs = sorted(inputs, key=lambda c: c.case_id)
    work = [(inp, cfg, out_dir) for inp in inputs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, work))
    else:
        records = [_run_one(w) for w in work]
    records.sort(key=lambda r: r.case_id)
    wall = time.perf_counter() - t0
    if stable:
        for r in records:
            r.timings = {k: 0.0 for k in r.timings}
        wall = 0.0
    return RunReport(cfg.to_dict(), records, _clean(summarize_cases(records)), wall_time_s=wall)


def _csv_row(r: CaseRecord) -> dict:
    row = {c: "" for c in CSV_COLUMNS}
    row["case_id"], row["status"] = r.case_id, r.status
    row["error"] = r.error or ""
    for k, v in (r.metrics or {}).items():
        row[k] = "" if v is None else repr(float(v))
    s = r.summary
    if s:
        row["threshold"] = repr(float(s["threshold"]))
        row["predicted_voxels"] = str(s["predicted_voxels"])
        row["tumor_free_half"] = s["tumor_free_half"]
        for role in ("LR", "AP", "SI"):
            lo, hi = s["bbox"][role]
            row[f"bbox_{role.lower()}_lo"], row[f"bbox_{role.lower()}_hi"] = str(lo), str(hi)
    return row


def write_report(report: RunReport, out_dir) -> dict:
    """Write ``report.json``, ``cases.csv`` and ``summary.csv``; return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "report.json", "cases": out / "cases.csv", "summary": out / "summary.csv"}
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(_clean(report.to_dict()), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    with open(paths["cases"], "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in report.cases:
            w.writerow(_csv_row(r))
    with open(paths["summary"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "n", "mean", "median", "q25", "q75"])
        for name in METRIC_NAMES:
            s = report.summary.get(name)
            if s:
                w.writerow([name, s["n"], *(repr(s[k]) for k in ("mean", "median", "q25", "q75"))])
    return {k: str(v) for k, v in paths.items()}
