"""Detection overlap scores, histogram similarity scores and cohort summaries."""

from __future__ import annotations

from dataclasses import asdict, dataclass
import math

import numpy as np

from .errors import InvalidArgumentError
from .histogram import Histogram2D
from .volume import Volume3


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class SSIMParams:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    c1: float = 1e-4
    c2: float = 1e-4
    c3: float = 1e-4

    def __post_init__(self):
        if min(self.c1, self.c2, self.c3) <= 0:
            raise InvalidArgumentError("SSIM stabilizers must be positive")


@dataclass(frozen=True)
class CohortSummary:
    mean: float
    median: float
    q25: float
    q75: float

    def to_dict(self) -> dict:
        return asdict(self)


def _grid(m) -> np.ndarray:
    return m.data if isinstance(m, Volume3) else np.asarray(m)


def confusion_counts(pred, truth) -> ConfusionCounts:
    p = _grid(pred).astype(bool)
    t = _grid(truth).astype(bool)
    if p.shape != t.shape:
        raise InvalidArgumentError(f"mask shapes differ: {p.shape} vs {t.shape}")
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    return ConfusionCounts(tp, fp, fn, p.size - tp - fp - fn)


def scores_from_counts(c: ConfusionCounts):
    """``(dice, sensitivity, fdr)``.

    Empty denominators score as perfect: nothing to find gives sensitivity 1,
    nothing predicted gives FDR 0, and two empty masks give Dice 1.
    """
    denom = (c.tp + c.fn) + (c.tp + c.fp)
    dice = 2.0 * c.tp / denom if denom else 1.0
    sensitivity = c.tp / (c.tp + c.fn) if c.tp + c.fn else 1.0
    fdr = c.fp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    return dice, sensitivity, fdr


def confusion_metrics(pred, truth):
    """``(counts, dice, sensitivity, fdr)`` of a predicted vs. true mask."""
    c = confusion_counts(pred, truth)
    return (c, *scores_from_counts(c))


def ssim(x, y, p: SSIMParams = SSIMParams()) -> float:
    """Single-window SSIM over two arrays of equal shape (no rescaling)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise InvalidArgumentError("SSIM inputs differ in shape")
    mx, my = x.mean(), y.mean()
    sx, sy = x.std(), y.std()
    sxy = np.mean((x - mx) * (y - my))
    lum = (2 * mx * my + p.c1) / (mx * mx + my * my + p.c1)
    con = (2 * sx * sy + p.c2) / (sx * sx + sy * sy + p.c2)
    struct = (sxy + p.c3) / (sx * sy + p.c3)
    return float(lum ** p.alpha * con ** p.beta * struct ** p.gamma)


def _counts(h) -> np.ndarray:
    return np.asarray(h.counts if isinstance(h, Histogram2D) else h, dtype=np.float64)


def peak_normalized(h) -> np.ndarray:
    """Scale so the largest cell is 1; an all-zero input stays zero."""
    c = _counts(h)
    peak = c.max() if c.size else 0.0
    return c / peak if peak > 0 else c.copy()


def _pair(x, y):
    a, b = _counts(x), _counts(y)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"histogram shapes differ: {a.shape} vs {b.shape}")
    return peak_normalized(a), peak_normalized(b)


def ssim2d(x, y, p: SSIMParams = SSIMParams()) -> float:
    """SSIM of two histograms after scaling each to unit peak."""
    a, b = _pair(x, y)
    return ssim(a, b, p)


def similarity_scores(x, y):
    """``(cc, mse)`` on unit-peak histograms; ``cc`` is NaN if either is flat."""
    a, b = _pair(x, y)
    a, b = a.ravel(), b.ravel()
    mse = float(np.mean((a - b) ** 2))
    da, db = a - a.mean(), b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    cc = float(np.dot(da, db) / denom) if denom > 0 else math.nan
    return cc, mse


def summarize(values) -> CohortSummary:
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise InvalidArgumentError("cannot summarize an empty sequence")
    q25, med, q75 = np.percentile(v, [25, 50, 75], method="linear")
    return CohortSummary(float(v.mean()), float(med), float(q25), float(q75))
