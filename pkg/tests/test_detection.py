import numpy as np
import pytest

from tumorhist.detection import (DetectionParams, binarize, embed_mask, morph_smooth,
                                 threshold_from_cdf)
from tumorhist.errors import InvalidArgumentError
from tumorhist.histogram import CDFCurve, uniform_edges
from tumorhist.volume import BinaryMask3, NormalizedVolume


def mean_filter_oracle(m, edge, floor):
    r = edge // 2
    p = np.pad(m.astype(float), r)
    out = np.zeros(m.shape, bool)
    for idx in np.ndindex(m.shape):
        i, j, k = idx
        out[idx] = p[i:i + edge, j:j + edge, k:k + edge].sum() / edge ** 3 > floor
    return out


def test_params_validation():
    with pytest.raises(InvalidArgumentError):
        DetectionParams(morph_kernel_edge=4)
    with pytest.raises(InvalidArgumentError):
        DetectionParams(morph_floor=1.0)
    with pytest.raises(InvalidArgumentError):
        DetectionParams(cdf_fraction=0.0)


def test_threshold_is_lower_edge_of_first_bin_reaching_fraction():
    cdf = CDFCurve(np.array([0.05, 0.15, 0.2, 0.6, 1.0]), uniform_edges(5))
    assert threshold_from_cdf(cdf, 0.2) == 0.4
    assert threshold_from_cdf(cdf, 0.16) == 0.4
    assert threshold_from_cdf(cdf, 0.01) == 0.0
    assert threshold_from_cdf(cdf, 0.99) == 0.8


def test_binarize_ignores_excluded():
    d = np.array([-1.0, 0.1, 0.5, 0.9]).reshape(4, 1, 1)
    m = binarize(NormalizedVolume(d, voxel_origin=(3, 0, 1)), 0.5)
    assert m.data.ravel().tolist() == [False, False, True, True]
    assert m.voxel_origin == (3, 0, 1)


def test_morph_smooth_matches_oracle():
    rng = np.random.default_rng(2)
    m = rng.random((9, 8, 7)) < 0.55
    out = morph_smooth(BinaryMask3(m))
    np.testing.assert_array_equal(out.data, mean_filter_oracle(m, 5, 0.5))


def test_morph_smooth_removes_specks_keeps_cores():
    m = np.zeros((15, 15, 15), bool)
    m[2, 2, 2] = True
    m[5:12, 5:12, 5:12] = True
    out = morph_smooth(BinaryMask3(m)).data
    assert not out[2, 2, 2]
    assert out[6:11, 6:11, 6:11].all()
    # Corners of the cube erode (fewer than half the 5^3 neighbors set).
    assert not out[5, 5, 5]


def test_morph_mean_at_floor_is_dropped():
    # Every other plane set: the best window (centered on a set plane, fully
    # inside in-plane) averages exactly 3/5, which must not pass a 0.6 floor.
    m = np.zeros((20, 5, 5), bool)
    m[::2] = True
    out = morph_smooth(BinaryMask3(m), DetectionParams(morph_floor=0.6)).data
    assert not out.any()


def test_embed_mask_upsamples_in_plane():
    m = np.zeros((2, 2, 3), bool)
    m[1, 0, 2] = True
    bm = BinaryMask3(m, voxel_origin=(1, 2, 4))
    out = embed_mask(bm, (8, 10, 9), 2)
    assert out.positive_count == 4
    assert out.data[4:6, 4:6, 6].all()
    assert out.voxel_origin == (0, 0, 0)


def test_embed_mask_overhang():
    bm = BinaryMask3(np.ones((2, 1, 1), bool), voxel_origin=(2, 0, 0))
    with pytest.raises(InvalidArgumentError):
        embed_mask(bm, (5, 2, 1), 2)
    out = embed_mask(bm, (5, 2, 1), 2, clip=True)
    assert out.data[4:, :, 0].all() and out.positive_count == 2
