import numpy as np
import pytest

from maskedkrr import (
    MissingSpec,
    ParameterError,
    ShapeError,
    double_mask,
    inject_missing,
    to_masked,
)
from _synth import make_dataset


def test_to_masked_zeroes_missing_entries():
    v = to_masked([3.0, 7.0, 2.0], [True, False, True])
    assert v.values.tolist() == [3.0, 0.0, 2.0]


def test_to_masked_identity_when_fully_present():
    assert to_masked([5.0], [True]).values.tolist() == [5.0]


def test_to_masked_all_missing():
    assert to_masked([5.0, 5.0], [False, False]).values.tolist() == [0.0, 0.0]


def test_to_masked_length_mismatch():
    with pytest.raises(ShapeError):
        to_masked([1.0, 2.0], [True])


def test_to_masked_idempotent():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rng.integers(1, 20)
        vals = rng.normal(size=m)
        mask = rng.random(m) < 0.6
        once = to_masked(vals, mask)
        twice = to_masked(once.values, once.mask)
        np.testing.assert_array_equal(once.values, twice.values)
        np.testing.assert_array_equal(once.mask, twice.mask)


def test_double_mask_intersection():
    a = to_masked([1, 2, 3], [True, True, False])
    b = to_masked([4, 5, 6], [False, True, True])
    da, db = double_mask(a, b)
    assert da.values.tolist() == [0.0, 2.0, 0.0]
    assert db.values.tolist() == [0.0, 5.0, 0.0]


def test_double_mask_fully_present_unchanged():
    a = to_masked([1.0, -2.0], [True, True])
    b = to_masked([3.0, 4.0], [True, True])
    da, db = double_mask(a, b)
    np.testing.assert_array_equal(da.values, a.values)
    np.testing.assert_array_equal(db.values, b.values)


def test_double_mask_disjoint_supports():
    a = to_masked([1.0, 0.0], [True, False])
    b = to_masked([0.0, 2.0], [False, True])
    da, db = double_mask(a, b)
    assert not da.values.any() and not db.values.any()
    assert not da.mask.any()


def test_double_mask_support_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = rng.integers(1, 15)
        a = to_masked(rng.normal(size=m), rng.random(m) < 0.5)
        b = to_masked(rng.normal(size=m), rng.random(m) < 0.5)
        da, db = double_mask(a, b)
        np.testing.assert_array_equal(da.mask, db.mask)
        # on the common support the original values survive exactly
        np.testing.assert_array_equal(da.values[da.mask], a.values[da.mask])
        np.testing.assert_array_equal(db.values[db.mask], b.values[db.mask])


def test_double_mask_dim_mismatch():
    with pytest.raises(ShapeError):
        double_mask(to_masked([1.0], [True]), to_masked([1.0, 2.0], [True, True]))


def test_missing_spec_rate_range():
    with pytest.raises(ParameterError):
        MissingSpec(1.0, 0)
    with pytest.raises(ParameterError):
        MissingSpec(-0.1, 0)


def test_inject_rate_zero_is_identity():
    d = make_dataset(np.arange(12.0).reshape(4, 3))
    out = inject_missing(d, MissingSpec(0.0, 5))
    np.testing.assert_array_equal(out.presence, d.presence)
    np.testing.assert_array_equal(out.features, d.features)


def test_inject_rate_concentrates():
    d = make_dataset(np.ones((100, 100)))
    out = inject_missing(d, MissingSpec(0.4, 123))
    frac = 1.0 - out.presence.mean()
    assert abs(frac - 0.4) < 0.02


def test_inject_deterministic():
    d = make_dataset(np.random.default_rng(3).normal(size=(30, 8)))
    a = inject_missing(d, MissingSpec(0.3, 77))
    b = inject_missing(d, MissingSpec(0.3, 77))
    np.testing.assert_array_equal(a.presence, b.presence)


def test_inject_different_seeds_differ():
    d = make_dataset(np.ones((50, 20)))
    a = inject_missing(d, MissingSpec(0.3, 1))
    b = inject_missing(d, MissingSpec(0.3, 2))
    assert (a.presence != b.presence).any()


def test_inject_keeps_already_missing():
    presence = np.ones((40, 10), dtype=bool)
    presence[:, 0] = False
    d = make_dataset(np.ones((40, 10)), presence)
    out = inject_missing(d, MissingSpec(0.5, 9))
    assert not out.presence[:, 0].any()
    # zero-padding holds after injection
    assert (out.features[~out.presence] == 0).all()
