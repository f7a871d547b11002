import csv
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from sarfourier.kernels import dirichlet
from sarfourier.phasestats import (
    KC_DELTA_WARN,
    correlated_phase_power,
    expected_coefficient_power,
    expected_partial_sum_power,
    monte_carlo_coefficient_power,
    monte_carlo_partial_sum_power,
    probe_indices,
    write_power_csv,
)
from sarfourier.scene import apply_random_phases, step_signal

STEP = np.abs(step_signal(256).samples)


def test_expected_coefficient_power_examples():
    assert expected_coefficient_power(np.ones(16)) == 16.0
    assert expected_coefficient_power(np.zeros(5)) == 0.0
    assert expected_coefficient_power([3.0, -4.0]) == 25.0


def test_coefficient_power_monte_carlo_is_flat():
    rng = np.random.default_rng(0)
    mags = rng.uniform(0.5, 2.0, 128)
    ks = [0, 1, 5, 17, 40, 63, 64, 100]
    mean, err = monte_carlo_coefficient_power(mags, ks, trials=10_000, seed=1)
    target = expected_coefficient_power(mags)
    assert np.all(np.abs(mean - target) < 3 * err)
    assert np.max(np.abs(mean - target)) / target < 0.05


def test_coefficient_power_single_trial_is_plain_power():
    mags = np.linspace(1, 2, 16)
    mean, err = monte_carlo_coefficient_power(mags, [3], trials=1, seed=4)
    phases = np.angle(apply_random_phases(mags.astype(complex), 4))
    direct = abs(np.fft.fft(mags * np.exp(1j * phases))[3]) ** 2
    assert mean[0] == pytest.approx(direct, rel=1e-12)
    assert np.isnan(err[0])


def test_full_band_returns_magnitudes_squared():
    rng = np.random.default_rng(2)
    mags = rng.uniform(0, 3, 64)
    np.testing.assert_allclose(expected_partial_sum_power(mags, 63), mags ** 2, atol=1e-12)
    assert np.all(expected_partial_sum_power(np.zeros(64), 10) == 0)


def test_partial_sum_power_equals_direct_sum():
    rng = np.random.default_rng(3)
    n, b = 48, 10
    mags = rng.uniform(0, 1, n)
    m = np.arange(n)
    d2 = dirichlet(b / 2, 2 * np.pi * (m[:, None] - m[None, :]) / n) ** 2
    direct = d2 @ mags ** 2 / n ** 2
    np.testing.assert_allclose(expected_partial_sum_power(mags, b), direct, rtol=1e-10)
    dense = expected_partial_sum_power(mags, b, n_points=4 * n)
    np.testing.assert_allclose(dense[::4], direct, rtol=1e-10)


def test_partial_sum_power_validation():
    with pytest.raises(ValueError):
        expected_partial_sum_power(np.ones(8), 8)
    with pytest.raises(ValueError):
        expected_partial_sum_power(np.ones(8), -1)
    with pytest.raises(ValueError):
        monte_carlo_partial_sum_power(np.ones(8), 0, 3, 0, 1)
    with pytest.raises(ValueError):
        monte_carlo_partial_sum_power(np.ones(8), 0, 8, 10, 1)


def test_single_trial_is_one_partial_sum():
    mags = STEP
    out = monte_carlo_partial_sum_power(mags, -25, 25, trials=1, seed=9)
    f = mags * np.exp(1j * np.angle(apply_random_phases(mags.astype(complex), 9)))
    fhat = np.fft.fft(f)
    ks = np.arange(-25, 26)
    s = np.exp(2j * np.pi * np.outer(np.arange(256), ks) / 256) @ fhat[ks % 256] / 256
    np.testing.assert_allclose(out, np.abs(s) ** 2, atol=1e-12)
    assert np.all(out >= 0)


@pytest.mark.parametrize("k_c", [0, 125, 200])
def test_partial_sum_power_matches_theory(k_c):
    mean, err = monte_carlo_partial_sum_power(STEP, k_c - 25, k_c + 25, 10_000, seed=7,
                                              return_stderr=True)
    theory = expected_partial_sum_power(STEP, 50)
    idx = probe_indices(256)
    assert idx.size == 10
    assert np.all(np.abs(mean[idx] - theory[idx]) <= 3 * err[idx])


def test_band_centre_invariance_pairwise():
    runs = {k_c: monte_carlo_partial_sum_power(STEP, k_c - 25, k_c + 25, 10_000, seed=11 + k_c,
                                               return_stderr=True)
            for k_c in (0, 125, 200)}
    idx = probe_indices(256)
    keys = sorted(runs)
    # 30 comparisons: two-sided z bound with 1% family-wise error
    z = norm.ppf(1 - 0.01 / (2 * 3 * idx.size))
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            (ma, ea), (mb, eb) = runs[a], runs[b]
            gap = np.abs(ma[idx] - mb[idx])
            assert np.all(gap <= z * np.hypot(ea[idx], eb[idx]))


def test_monte_carlo_error_shrinks_with_trials():
    theory = expected_partial_sum_power(STEP, 50)
    errs = [np.mean(np.abs(monte_carlo_partial_sum_power(STEP, -25, 25, t, seed=5) - theory))
            for t in (100, 1000, 10_000)]
    assert errs[0] > errs[1] > errs[2]
    # 1/sqrt(trials): a factor ~10 over two decades
    assert 4 < errs[0] / errs[2] < 25


def test_trials_do_not_depend_on_batching():
    # trial t always uses stream t, so a longer run extends a shorter one
    a, _ = monte_carlo_coefficient_power(STEP, [3], trials=600, seed=2)
    b, _ = monte_carlo_coefficient_power(STEP, [3], trials=1200, seed=2)
    c, _ = monte_carlo_coefficient_power(STEP, [3], trials=600, seed=2)
    assert a[0] == c[0] and a[0] != b[0]


def smooth(n=256):
    x = 2 * np.pi * np.arange(n) / n
    return 1 + 0.5 * np.cos(x)


def test_correlated_phases_unit_block_is_independent_case():
    mags = smooth()
    emp, pred = correlated_phase_power(mags, 1, 0, 50, 2000, seed=3)
    np.testing.assert_allclose(pred, expected_partial_sum_power(mags, 50))
    ind = monte_carlo_partial_sum_power(mags, -25, 25, 2000, seed=3)
    np.testing.assert_allclose(emp, ind, rtol=1e-12)


def test_correlated_phases_zero_signal():
    emp, pred = correlated_phase_power(np.zeros(64), 4, 0, 10, 10, seed=1)
    assert np.all(emp == 0) and np.all(pred == 0)


@pytest.mark.parametrize("k_c", [0, 2])
def test_correlated_phases_block_scaling(k_c):
    emp, pred = correlated_phase_power(smooth(), 4, k_c, 50, 10_000, seed=8)
    ratio = emp.sum() / pred.sum()
    assert 0.7 <= ratio <= 1.3


def test_correlated_phases_warns_for_large_band_centre():
    with pytest.warns(RuntimeWarning, match="exceeds"):
        correlated_phase_power(smooth(64), 4, 20, 10, 4, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        correlated_phase_power(smooth(64), 4, 0, 10, 4, seed=1)
        correlated_phase_power(smooth(64), 4, 20, 10, 4, seed=1, warn_factor=10.0)
    assert KC_DELTA_WARN == 0.25


def test_correlated_phases_validation():
    with pytest.raises(ValueError):
        correlated_phase_power(smooth(64), 0, 0, 10, 4, seed=1)
    with pytest.raises(ValueError):
        correlated_phase_power(smooth(64), 2.5, 0, 10, 4, seed=1)
    with pytest.raises(ValueError, match="even"):
        correlated_phase_power(smooth(64), 2, 0, 11, 4, seed=1)


@settings(max_examples=20)
@given(st.integers(2, 400), st.integers(2, 12))
def test_probe_indices(n, count):
    idx = probe_indices(n, count)
    assert idx[0] == 0 and idx[-1] == n - 1
    assert np.all(np.diff(idx) > 0) and idx.size <= count


def test_power_csv(tmp_path):
    path = tmp_path / "p.csv"
    write_power_csv(path, [1.0, 0.1], [1.5, 1 / 3])
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["index", "empirical", "analytic"]
    assert float(rows[2][2]) == 1 / 3
