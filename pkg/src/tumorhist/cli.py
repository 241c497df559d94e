"""Command-line entry point: ``tumorhist <subcommand> ...``.

Exit codes: 0 success, 1 at least one case failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import InvalidArgumentError, TumorHistError
from .heatmap import render_heatmap
from .histogram import full_range_normalize, histogram2d
from .metrics import confusion_metrics
from .nifti import read_nifti, write_nifti, write_nifti_mask
from .phantom import generate_phantom, standard_suite
from .runner import CaseInput, discover_cases, run_batch, run_case, write_report
from .volume import SERIES, BinaryMask3, brain_region, normalize_gray

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out-dir", required=True, help="directory for masks, heatmaps and reports")
    p.add_argument("--crop-steps", type=int, choices=(0, 1, 2, 3), help="coarse crop passes (default 3)")
    p.add_argument("--modulation", choices=("adaptive", "step"), help="gain curve (default adaptive)")
    p.add_argument("--cdf-fraction", type=float, help="CDF level of the threshold (default 0.2)")
    p.add_argument("--stable-report", action="store_true",
                   help="zero all timings so reruns give byte-identical reports")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tumorhist", description="Histogram-based brain tumor detection on Flair MRI.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run one case")
    p.add_argument("scan", help="Flair volume (.nii or .nii.gz)")
    p.add_argument("--truth", help="ground-truth label map; enables metrics")
    p.add_argument("--case-id", help="defaults to the scan file name stem")
    _add_run_flags(p)

    p = sub.add_parser("batch", help="run every case under a directory")
    p.add_argument("input_dir")
    p.add_argument("--jobs", type=int, default=1, help="cases run in parallel")
    _add_run_flags(p)

    p = sub.add_parser("phantom", help="write synthetic cases in the batch input layout")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=1, help="number of cases")
    p.add_argument("--seed", type=int, default=2024, help="case k uses seed + k")
    p.add_argument("--dims", type=int, nargs=3, metavar=("LR", "AP", "SI"), default=(96, 112, 72),
                   help="grid size (default 96 112 72)")

    p = sub.add_parser("eval", help="detection scores of a predicted mask against truth")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--out-dir", help="also write metrics.json here")

    p = sub.add_parser("histogram", help="dump a 2D gray x slice histogram and its heatmap")
    p.add_argument("scan")
    p.add_argument("--axis", choices=sorted(SERIES), default="axial")
    p.add_argument("--bins", type=int, default=64, help="gray-level bins")
    p.add_argument("--full-range", action="store_true",
                   help="min-max normalization instead of mean-anchored")
    p.add_argument("--linear", action="store_true", help="linear rather than log1p heatmap")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="JSON config (only io.axis_roles is used)")
    return ap


def _run_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    return cfg.with_overrides(getattr(args, "crop_steps", None), getattr(args, "modulation", None),
                              getattr(args, "cdf_fraction", None))


def _cmd_detect(args) -> int:
    cfg = _run_config(args)
    scan = Path(args.scan)
    cid = args.case_id or scan.name.split(".nii")[0].removesuffix("_flair")
    report = run_batch([CaseInput(cid, str(scan), args.truth)], cfg, args.out_dir,
                       stable=args.stable_report)
    write_report(report, args.out_dir)
    rec = report.cases[0]
    print(json.dumps({"case_id": rec.case_id, "status": rec.status, "error": rec.error,
                      "metrics": rec.metrics}, indent=2))
    return EXIT_FAILED if report.failed else EXIT_OK


def _cmd_batch(args) -> int:
    if args.jobs < 1:
        raise _UsageError("--jobs must be >= 1")
    cfg = _run_config(args)
    inputs = discover_cases(args.input_dir)
    if not inputs:
        raise _UsageError(f"no *_flair.nii[.gz] files under {args.input_dir}")
    report = run_batch(inputs, cfg, args.out_dir, jobs=args.jobs, stable=args.stable_report)
    paths = write_report(report, args.out_dir)
    print(f"{len(report.cases)} cases, {len(report.failed)} failed; report: {paths['json']}")
    for cid in report.failed:
        print(f"  failed: {cid}", file=sys.stderr)
    return EXIT_FAILED if report.failed else EXIT_OK


def _cmd_phantom(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be >= 1")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, spec in enumerate(standard_suite(args.count, seed=args.seed, dims=tuple(args.dims))):
        vol, truth = generate_phantom(spec)
        cid = f"phantom_{k:03d}"
        write_nifti(out / f"{cid}_flair.nii.gz", vol, datatype=16)
        write_nifti(out / f"{cid}_seg.nii.gz", truth.with_data(truth.data.astype(np.uint8)), datatype=2)
    print(f"wrote {args.count} phantom cases to {out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    pred, _ = read_nifti(args.pred)
    truth, _ = read_nifti(args.truth)
    c, dice, sens, fdr = confusion_metrics(BinaryMask3(pred.data > 0), BinaryMask3(truth.data > 0))
    out = {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
           "dice": dice, "sensitivity": sens, "fdr": fdr}
    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.out_dir:
        d = Path(args.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "metrics.json").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_histogram(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    vol, _ = read_nifti(args.scan, cfg.io.axis_roles)
    mask = brain_region(vol)
    norm = full_range_normalize(vol, mask) if args.full_range else normalize_gray(vol, mask)
    h = histogram2d(norm, args.axis, args.bins)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scan).name.split(".nii")[0] + f"_{args.axis}"
    # Rows are gray bins, columns slices.
    np.savetxt(out / f"{stem}.csv", h.counts, fmt="%d", delimiter=",")
    render_heatmap(h, out / f"{stem}.pgm", log_scale=not args.linear)
    print(f"{stem}: {h.bins} bins x {h.n_slices} slices, {int(h.total())} voxels")
    return EXIT_OK


COMMANDS = {"detect": _cmd_detect, "batch": _cmd_batch, "phantom": _cmd_phantom,
            "eval": _cmd_eval, "histogram": _cmd_histogram}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (_UsageError, InvalidArgumentError) as exc:
        print(f"tumorhist: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TumorHistError, OSError) as exc:
        print(f"tumorhist: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
