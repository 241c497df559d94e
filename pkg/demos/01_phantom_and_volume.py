# %% [markdown]
# # Phantoms and volume preprocessing
#
# A phantom is an ellipsoidal "brain" with smooth, mirror-symmetric healthy
# texture, optional noise, a bright tumor on one side and, in the standard
# suite, a faint bilateral decoy pair. Everything is seeded, so the same spec
# always gives the same voxels.

# %%
import numpy as np

from tumorhist import (brain_region, downsample, generate_phantom, normalize_gray, preprocess,
                       split_halves, standard_suite)

spec = standard_suite(3)[1]
vol, truth = generate_phantom(spec)
print("dims", vol.dims, "roles", vol.axis_roles)
print("tumor center", np.round(spec.tumor_center, 1), "semi-axes", np.round(spec.tumor_semi_axes, 1))
print("truth voxels", truth.positive_count)

# %% [markdown]
# Preprocessing: a 3x3x3 box low-pass, then 2x block means in-plane. The
# brain support is taken from the raw scan and reduced with "whole block
# set", so the low-pass halo at the skull edge never counts as brain.

# %%
work = preprocess(vol, lp_radius=3, ds_factor=2)
mask = downsample(brain_region(vol), 2)
norm = normalize_gray(work, mask)
print("working grid", work.dims)
print(f"brain mean {norm.mu_brain:.1f}, brain max {norm.v_max:.1f}")
print(f"voxels kept after mean-anchoring: {norm.included.mean():.1%} of the grid")

# %%
left, right = split_halves(norm)
print("left half", left.dims, "origin", left.voxel_origin)
print("right half", right.dims, "origin", right.voxel_origin)
