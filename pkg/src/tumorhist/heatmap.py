"""Binary PGM (P5) renderings of 2D histograms."""

from __future__ import annotations

import os

import numpy as np

from .histogram import Histogram2D


def heatmap_pixels(h: Histogram2D, log_scale: bool = False) -> np.ndarray:
    """``(n_slices, bins)`` uint8 image: row ``j`` is slice ``j``, column ``i`` is bin ``i``.

    The largest cell maps to 255; an all-zero histogram gives a black image.
    """
    v = np.asarray(h.counts, dtype=np.float64).T
    if log_scale:
        v = np.log1p(v)
    peak = v.max() if v.size else 0.0
    if peak <= 0:
        return np.zeros(v.shape, dtype=np.uint8)
    return np.rint(255.0 * v / peak).astype(np.uint8)


def render_heatmap(h: Histogram2D, path, log_scale: bool = False) -> None:
    img = heatmap_pixels(h, log_scale)
    height, width = img.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read back a P5 file written by :func:`render_heatmap`."""
    with open(os.fspath(path), "rb") as fh:
        blob = fh.read()
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) < 4:
        raise ValueError("not a binary PGM file")
    width, height = (int(t) for t in parts[1].split())
    data = np.frombuffer(parts[3], dtype=np.uint8, count=width * height)
    return data.reshape(height, width)
