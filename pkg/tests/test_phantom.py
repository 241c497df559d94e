import numpy as np
import pytest

from tumorhist.errors import InvalidArgumentError
from tumorhist.phantom import (PhantomSpec, ellipsoid_volume, generate_phantom, mirror_volume,
                               standard_suite, symmetric_spec)

SMALL = dict(dims=(40, 44, 32), brain_semi_axes=(16.0, 18.0, 13.0),
             tumor_center=(-7.0, 2.0, 1.0), tumor_semi_axes=(4.0, 5.0, 4.0))


def test_same_seed_same_volume():
    a, ta = generate_phantom(PhantomSpec(seed=5, **SMALL))
    b, tb = generate_phantom(PhantomSpec(seed=5, **SMALL))
    c, _ = generate_phantom(PhantomSpec(seed=6, **SMALL))
    np.testing.assert_array_equal(a.data, b.data)
    np.testing.assert_array_equal(ta.data, tb.data)
    assert not np.array_equal(a.data, c.data)


def test_truth_inside_brain_and_brighter():
    vol, truth = generate_phantom(PhantomSpec(seed=1, **SMALL))
    brain = vol.data > 0
    assert truth.positive_count > 0
    assert np.all(brain[truth.data])
    assert vol.data[truth.data].mean() > vol.data[brain & ~truth.data].mean()
    expect = ellipsoid_volume(SMALL["tumor_semi_axes"])
    assert abs(truth.positive_count - expect) / expect <= 0.05


def test_tumor_lands_on_requested_side():
    vol, truth = generate_phantom(PhantomSpec(seed=1, **SMALL))
    lr = np.nonzero(truth.data)[0]
    assert lr.max() < SMALL["dims"][0] / 2


def test_symmetric_spec_is_exact_mirror():
    vol, truth = generate_phantom(symmetric_spec(4))
    np.testing.assert_array_equal(vol.data, mirror_volume(vol).data)
    assert truth.positive_count == 0


def test_decoys_are_mirror_pair():
    spec = PhantomSpec(seed=2, noise_amplitude=0.0, tumor_semi_axes=None,
                       decoy_center=(8.0, 0.0, 0.0), decoy_semi_axes=(3.0, 6.0, 5.0),
                       **{k: v for k, v in SMALL.items() if not k.startswith("tumor")})
    vol, _ = generate_phantom(spec)
    np.testing.assert_array_equal(vol.data, vol.data[::-1])
    assert vol.data.max() >= spec.decoy_band[0]


@pytest.mark.parametrize("bad", [
    dict(dims=(3, 10, 10)),
    dict(brain_semi_axes=(60.0, 10.0, 10.0)),
    dict(base_band=(10.0, 5.0)),
    dict(noise_amplitude=-1.0),
    dict(tumor_band=(10.0, 20.0)),
    dict(tumor_center=(-35.0, 0.0, 0.0)),
    dict(tumor_semi_axes=(30.0, 30.0, 25.0)),
])
def test_spec_validation(bad):
    with pytest.raises(InvalidArgumentError):
        PhantomSpec(**bad)


def test_standard_suite_is_fixed_and_off_midline():
    a = standard_suite(6)
    assert a == standard_suite(6)
    assert [s.seed for s in a] == list(range(2024, 2030))
    for s in a:
        inner = abs(s.tumor_center[0]) - s.tumor_semi_axes[0]
        assert inner > 0
        # The decoy pair stays medial to the tumor.
        assert s.decoy_center[0] + s.decoy_semi_axes[0] < inner


def test_suite_truth_sizes_and_containment():
    for spec in standard_suite(50):
        vol, truth = generate_phantom(spec)
        expect = ellipsoid_volume(spec.tumor_semi_axes)
        assert abs(truth.positive_count - expect) / expect <= 0.05
        assert np.all(vol.data[truth.data] > 0)
