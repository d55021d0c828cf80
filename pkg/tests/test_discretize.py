"""Equal-width binning with IQR outlier fencing."""

import numpy as np
import pytest

from pdbpe import NumericError, apply_discretizer, fit_discretizer


def test_fences_from_linear_interpolation_quartiles():
    # For 1..8: Q1 = 2.75, Q3 = 6.25 (linear interpolation at (n-1)q),
    # IQR = 3.5, fences at 1.5 IQR: [-2.5, 11.5].
    values = np.arange(1.0, 9.0)
    disc = fit_discretizer(values, K=4)
    assert disc.lower_fence == pytest.approx(-2.5)
    assert disc.upper_fence == pytest.approx(11.5)
    # No value is fenced out here, so edges span the data range.
    assert disc.edges[0] == pytest.approx(1.0)
    assert disc.edges[-1] == pytest.approx(8.0)
    assert len(disc.edges) == 5


def test_outliers_excluded_from_edge_fitting_but_still_binnable():
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 1000.0])
    disc = fit_discretizer(values, K=5)
    # The outlier lies beyond the upper fence and must not stretch the grid.
    assert disc.edges[-1] == pytest.approx(5.0)
    # Applying is still total: the outlier clamps into the top bin.
    assert apply_discretizer(1000.0, disc) == 4
    assert apply_discretizer(-50.0, disc) == 0


def test_apply_floor_and_boundaries():
    disc = fit_discretizer(np.array([0.0, 4.0]), K=4)
    assert np.array_equal(disc.edges, [0.0, 1.0, 2.0, 3.0, 4.0])
    assert apply_discretizer(0.0, disc) == 0
    assert apply_discretizer(0.999, disc) == 0
    # Interior edges belong to the bin on their right.
    assert apply_discretizer(1.0, disc) == 1
    assert apply_discretizer(3.0, disc) == 3
    # The top edge itself clamps into the last bin.
    assert apply_discretizer(4.0, disc) == 3


def test_apply_vector_and_dtype():
    disc = fit_discretizer(np.array([0.0, 10.0]), K=5)
    out = apply_discretizer(np.array([-1.0, 0.0, 4.0, 9.99, 10.0, 11.0]), disc)
    assert out.dtype == np.int64
    assert out.tolist() == [0, 0, 2, 4, 4, 4]


def test_constant_pool_is_numeric_error():
    with pytest.raises(NumericError):
        fit_discretizer(np.full(10, 2.0), K=4)


def test_empty_pool_is_numeric_error():
    with pytest.raises(NumericError):
        fit_discretizer(np.array([]), K=4)


def test_all_values_fenced_identical_is_numeric_error():
    # One extreme outlier cannot leave a degenerate single-point pool.
    values = np.array([5.0] * 9 + [1e9])
    with pytest.raises(NumericError):
        fit_discretizer(values, K=3)


def test_iqr_multiplier_widens_fences():
    values = np.concatenate([np.arange(1.0, 9.0), [30.0]])
    narrow = fit_discretizer(values, K=4, iqr_multiplier=1.5)
    wide = fit_discretizer(values, K=4, iqr_multiplier=10.0)
    assert narrow.edges[-1] < 30.0
    assert wide.edges[-1] == pytest.approx(30.0)


def test_bin_bounds_tile_the_fitted_range():
    rng = np.random.default_rng(21)
    values = rng.normal(size=500)
    disc = fit_discretizer(values, K=7)
    for k in range(7):
        lo, hi = disc.bin_bounds(k)
        assert lo == pytest.approx(disc.edges[k])
        assert hi == pytest.approx(disc.edges[k + 1])
    widths = np.diff(disc.edges)
    assert np.allclose(widths, widths[0])


def test_randomized_bins_agree_with_searchsorted():
    rng = np.random.default_rng(33)
    for _ in range(50):
        n = int(rng.integers(5, 400))
        K = int(rng.integers(2, 12))
        values = rng.normal(rng.uniform(-3, 3), rng.uniform(0.5, 4), size=n)
        disc = fit_discretizer(values, K=K)
        probes = rng.uniform(disc.edges[0], disc.edges[-1], size=64)
        got = apply_discretizer(probes, disc)
        want = np.clip(np.searchsorted(disc.edges, probes, side="right") - 1,
                       0, K - 1)
        # Allow off-by-one only where floating point puts a probe exactly on
        # an edge; otherwise the two derivations agree.
        diff = np.flatnonzero(got != want)
        for idx in diff:
            assert np.any(np.isclose(probes[idx], disc.edges))
        assert np.all(got >= 0) and np.all(got <= K - 1)
