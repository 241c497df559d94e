# %% [markdown]
# # 2D histograms and the asymmetry map
#
# H(i, j) counts voxels of gray bin i in slice j. Summing over slices gives
# the gray distribution; summing over bins gives a locational profile. The
# asymmetry map compares the two brain halves bin by bin.

# %%
from pathlib import Path

import numpy as np

from tumorhist import (asymmetry_map, brain_region, collapse_gray, collapse_slice, downsample,
                       generate_phantom, histogram2d, normalize_gray, preprocess, split_halves,
                       standard_suite)
from tumorhist.heatmap import render_heatmap

vol, truth = generate_phantom(standard_suite(1)[0])
norm = normalize_gray(preprocess(vol), downsample(brain_region(vol), 2))

h = histogram2d(norm, "axial", bins=64)
print("H shape (bins, slices):", h.counts.shape, "total", int(h.total()))
print("gray distribution, first 8 bins:", collapse_gray(h).counts[:8].astype(int))

# %%
left, right = split_halves(norm)
d = asymmetry_map(histogram2d(left, "axial", 64), histogram2d(right, "axial", 64))
prof = collapse_slice(d).values
si = np.nonzero(truth.data)[2]
print(f"asymmetry profile peaks at axial slice {int(np.argmax(prof))}; "
      f"truth spans slices {si.min()}..{si.max()}")

# %%
out = Path("demo_out")
out.mkdir(exist_ok=True)
render_heatmap(h, out / "h_axial.pgm", log_scale=True)
render_heatmap(d, out / "asym_axial.pgm", log_scale=True)
print("wrote", sorted(p.name for p in out.glob("*.pgm")))
