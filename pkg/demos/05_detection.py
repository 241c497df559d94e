# %% [markdown]
# # From predicted histogram to mask
#
# The threshold is the gray level where the predicted tumor CDF reaches 20%.
# Thresholded voxels are smoothed by a 5x5x5 majority vote and mapped back
# to the original grid.

# %%
from tumorhist import DetectionParams, PipelineConfig, detect, generate_phantom, run_pipeline, standard_suite
from tumorhist.metrics import confusion_metrics

vol, truth = generate_phantom(standard_suite(3)[2])
res = run_pipeline(vol, PipelineConfig())
for frac in (0.1, 0.2, 0.4):
    mask, thr = detect(res, vol.dims, 2, DetectionParams(cdf_fraction=frac))
    _, dice, sens, fdr = confusion_metrics(mask, truth)
    print(f"cdf_fraction {frac:.1f}: threshold {thr:.3f}, {mask.positive_count} voxels, "
          f"Dice {dice:.3f}, sensitivity {sens:.3f}, FDR {fdr:.3f}")
