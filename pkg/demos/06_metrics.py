# %% [markdown]
# # Metrics
#
# Overlap metrics compare masks; SSIM, correlation and MSE compare predicted
# and ground-truth histograms after scaling each to a peak of 1.

# %%
import numpy as np

from tumorhist.metrics import ConfusionCounts, scores_from_counts, ssim, ssim2d, summarize

print("tp=3 fp=1 fn=2 ->", [round(v, 4) for v in scores_from_counts(ConfusionCounts(3, 1, 2, 0))])

rng = np.random.default_rng(0)
x = rng.random((64, 40))
print("SSIM(x, x) =", ssim(x, x))
print("SSIM(x, 500 x) on peak-normalized histograms =", ssim2d(x, 500 * x))
print("SSIM(x, noise) =", round(ssim2d(x, rng.random((64, 40))), 4))
print("summary of 1..4:", summarize([1, 2, 3, 4]).to_dict())
