"""KDE, kernel and in-sample mode estimators, modal linear regression, clustering."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from modalkit.criteria import amse_ratio
from modalkit.density import GaussianMixture, asymptotics, cdf_1d, find_antimode_1d, find_mode, preset
from modalkit.errors import DesignError, DomainError, SearchFailureError, ShapeError, TopologyError
from modalkit.estimators import (
    KDE,
    cluster_1d,
    isme,
    kde,
    kde_grad,
    kde_hess,
    kme,
    least_squares,
    mlr_amse_oracle,
    mlr_fit,
    mlr_objective,
)
from modalkit.kernels import gaussian_profile, make_kernel

KERNELS = ["biweight", "epanechnikov", "gaussian", "laplace"]


def brute_kde(sample, spec, h, x):
    """Direct O(n) sum per point, independent of the windowed evaluator."""
    sample = np.atleast_2d(sample)
    n, d = sample.shape
    return np.array([np.sum(spec.value((p - sample) / h)) / (n * h**d) for p in np.atleast_2d(x)])


# -- KDE ----------------------------------------------------------------------------


@pytest.mark.parametrize("name", KERNELS + ["pk-biweight"])
@pytest.mark.parametrize("d", [1, 2])
def test_single_point_kde_is_kernel_at_origin(name, d):
    spec = make_kernel(name, d, 2)
    x = np.full(d, 0.7)
    h = 0.4
    assert kde(x[None, :], spec, h, x) == pytest.approx(spec.value(np.zeros((1, d)))[0] / h**d, rel=1e-14)


@pytest.mark.parametrize("name", KERNELS)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_kde_matches_brute_force(name, d):
    rng = np.random.default_rng(d)
    sample = rng.normal(size=(300, d))
    spec = make_kernel(name, d, 2)
    pts = rng.normal(size=(25, d))
    est = KDE(sample, spec, 0.6)
    np.testing.assert_allclose(est.evaluate(pts, 0)[0], brute_kde(sample, spec, 0.6, pts), rtol=1e-12, atol=1e-15)


def test_gaussian_kde_integrates_to_one():
    sample = preset("skewed").sample(200, np.random.default_rng(1))
    spec = make_kernel("gaussian", 1, 2)
    grid = np.linspace(-12, 14, 20001)
    vals = KDE(sample, spec, 0.3).evaluate(grid[:, None], 0)[0]
    assert np.all(vals >= 0)
    assert integrate.trapezoid(vals, grid) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", ["biweight", "gaussian", "pk-biweight"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_kde_derivatives_against_finite_differences(name, d):
    rng = np.random.default_rng(40 + d)
    sample = rng.normal(size=(200, d))
    spec = make_kernel(name, d, 2)
    h = 0.8
    pts = rng.normal(scale=0.7, size=(50, d))
    eps = 1e-6
    est = KDE(sample, spec, h)
    f, g, H = est.evaluate(pts, 2)
    for j in range(d):
        e = np.zeros(d)
        e[j] = eps
        fp, gp, _ = est.evaluate(pts + e, 1)
        fm, gm, _ = est.evaluate(pts - e, 1)
        np.testing.assert_allclose((fp - fm) / (2 * eps), g[:, j], rtol=1e-6, atol=1e-6 * np.max(np.abs(g)))
        np.testing.assert_allclose((gp - gm) / (2 * eps), H[:, :, j], rtol=1e-5, atol=1e-5 * np.max(np.abs(H)))


def test_point_helpers_agree_with_evaluator():
    sample = np.random.default_rng(2).normal(size=(50, 2))
    spec = make_kernel("gaussian", 2, 2)
    x = np.array([0.1, 0.2])
    f, g, H = KDE(sample, spec, 0.5).evaluate(x[None], 2)
    assert kde(sample, spec, 0.5, x) == f[0]
    np.testing.assert_array_equal(kde_grad(sample, spec, 0.5, x), g[0])
    np.testing.assert_array_equal(kde_hess(sample, spec, 0.5, x), H[0])


def test_kde_input_validation():
    spec = make_kernel("biweight", 1, 2)
    with pytest.raises(DomainError):
        KDE(np.zeros((3, 1)), spec, -1.0)
    with pytest.raises(ShapeError):
        KDE(np.zeros((3, 2)), spec, 1.0)
    with pytest.raises(DomainError):
        KDE(np.array([[0.0], [np.nan]]), spec, 1.0)


# -- KME ----------------------------------------------------------------------------


@pytest.mark.parametrize("name", KERNELS)
def test_kme_of_repeated_point(name):
    sample = np.full((25, 2), 1.25)
    rep = kme(sample, make_kernel(name, 2, 2), 0.5)
    np.testing.assert_allclose(rep.estimate, [1.25, 1.25], atol=1e-12)
    assert rep.converged


@pytest.mark.parametrize("name", KERNELS)
@pytest.mark.parametrize("d", [1, 2])
def test_kme_translation_equivariance(name, d):
    sample = preset("skewed", d).sample(400, np.random.default_rng(3))
    spec = make_kernel(name, d, 2)
    c = np.linspace(-3.0, 5.0, d)
    a = kme(sample, spec, 0.5).estimate
    b = kme(sample + c, spec, 0.5).estimate
    np.testing.assert_allclose(b, a + c, atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0), st.sampled_from(KERNELS))
def test_kme_scale_consistency(s, name):
    sample = preset("skewed", 1).sample(300, np.random.default_rng(4))
    spec = make_kernel(name, 1, 2)
    a = kme(sample, spec, 0.5).estimate
    b = kme(s * sample, spec, s * 0.5).estimate
    np.testing.assert_allclose(b, s * a, atol=1e-9 * max(1.0, s))


@pytest.mark.parametrize("name", KERNELS)
@pytest.mark.parametrize("d", [1, 2])
def test_kme_is_stationary_and_beats_isme(name, d):
    sample = preset("skewed", d).sample(500, np.random.default_rng(5))
    spec = make_kernel(name, d, 2)
    h = 0.6
    rep = kme(sample, spec, h)
    est = KDE(sample, spec, h)
    assert rep.objective_value >= isme(sample, spec, h).objective_value
    assert rep.objective_value == pytest.approx(est.evaluate(rep.estimate[None], 0)[0][0], rel=1e-14)
    # No sample point and no small perturbation does better.
    assert rep.objective_value >= np.max(est.evaluate(sample, 0)[0])
    rng = np.random.default_rng(6)
    nearby = rep.estimate + rng.normal(scale=1e-3, size=(200, d))
    assert np.all(est.evaluate(nearby, 0)[0] <= rep.objective_value + 1e-14)


def test_kme_respects_explicit_starts():
    sample = preset("bimodal").sample(2000, np.random.default_rng(7))
    spec = make_kernel("gaussian", 1, 2)
    # Starting only near the lower mode finds the lower local maximum.
    local = kme(sample, spec, 0.4, starts=[[4.2]]).estimate[0]
    glob = kme(sample, spec, 0.4).estimate[0]
    assert abs(local - 4.0) < 0.6
    assert abs(glob) < 0.6


def test_kme_start_dimension_checked():
    with pytest.raises(ShapeError):
        kme(np.zeros((4, 1)), make_kernel("gaussian", 1, 2), 1.0, starts=[[0.0, 0.0]])


@pytest.mark.slow
def test_kme_within_three_root_amse():
    f = preset("skewed", 1)
    spec = make_kernel("biweight", 1, 2)
    n = 6400
    a = asymptotics(f, spec, n)
    theta = find_mode(f)
    hits = 0
    for t in range(200):
        x = f.sample(n, np.random.default_rng(1000 + t))
        hits += np.linalg.norm(kme(x, spec, a.h_opt).estimate - theta) <= 3 * math.sqrt(a.amse_opt)
    assert hits >= 190


# -- ISME ---------------------------------------------------------------------------


def brute_isme(sample, spec, h):
    n, d = sample.shape
    best, best_val = 0, -np.inf
    for i in range(n):
        v = sum(float(spec.value(((sample[i] - sample[j]) / h)[None, :])[0]) for j in range(n)) / (n * h**d)
        if v > best_val + 1e-14:
            best, best_val = i, v
    return best, best_val


@pytest.mark.parametrize("name", KERNELS)
@pytest.mark.parametrize("d", [1, 2])
def test_isme_against_quadratic_reference(name, d):
    sample = preset("skewed", d).sample(150, np.random.default_rng(8))
    spec = make_kernel(name, d, 2)
    rep = isme(sample, spec, 0.7)
    idx, val = brute_isme(sample, spec, 0.7)
    assert rep.extras["index"] == idx
    assert rep.objective_value == pytest.approx(val, rel=1e-12)
    np.testing.assert_array_equal(rep.estimate, sample[idx])


def test_isme_single_point_and_membership():
    spec = make_kernel("biweight", 2, 2)
    assert isme([[0.3, -0.1]], spec, 1.0).estimate.tolist() == [0.3, -0.1]
    sample = np.random.default_rng(9).normal(size=(100, 2))
    est = isme(sample, spec, 0.5).estimate
    assert any(np.array_equal(est, row) for row in sample)


def test_isme_ties_break_to_lowest_index():
    sample = np.array([[-1.0], [1.0]])
    rep = isme(sample, make_kernel("gaussian", 1, 2), 0.5)
    assert rep.extras["index"] == 0
    assert rep.ties >= 1


def test_isme_close_to_kme_in_one_dimension():
    f = preset("skewed", 1)
    spec = make_kernel("biweight", 1, 2)
    n = 1600
    a = asymptotics(f, spec, n)
    gaps = []
    for t in range(20):
        x = f.sample(n, np.random.default_rng(200 + t))
        gaps.append(abs(isme(x, spec, a.h_opt).estimate[0] - kme(x, spec, a.h_opt).estimate[0]))
    assert np.mean(gaps) < 0.2 * math.sqrt(a.amse_opt)


# -- modal linear regression --------------------------------------------------------


def _design(n, rng):
    z = rng.normal(size=n)
    return np.column_stack([np.ones(n), z])


def test_mlr_noiseless_recovery():
    rng = np.random.default_rng(10)
    X = _design(500, rng)
    theta = np.array([1.0, 2.0])
    y = X @ theta
    for name in KERNELS:
        spec = make_kernel(name, 1, 2)
        rep = mlr_fit(X, y, spec, 0.3)
        np.testing.assert_allclose(rep.estimate, theta, atol=1e-8)
        assert mlr_objective(X, y, spec, 0.3, theta) == pytest.approx(spec.value(np.zeros((1, 1)))[0] / 0.3, rel=1e-14)


def test_mlr_objective_zero_outside_truncated_support():
    rng = np.random.default_rng(11)
    X = _design(100, rng)
    y = X @ np.array([1.0, 2.0])
    # Every residual equals 5 > h * support.
    assert mlr_objective(X, y - 5.0, make_kernel("biweight", 1, 2), 1.0, [1.0, 2.0]) == 0.0


def test_mlr_design_and_shape_errors():
    X = np.column_stack([np.ones(10), np.ones(10)])
    with pytest.raises(DesignError):
        least_squares(X, np.arange(10.0))
    with pytest.raises(ShapeError):
        mlr_objective(X, np.arange(9.0), make_kernel("biweight", 1, 2), 1.0, [0, 0])
    with pytest.raises(DomainError):
        mlr_fit(_design(10, np.random.default_rng(0)), np.arange(10.0), make_kernel("biweight", 1, 2), 0.0)


def test_mlr_symmetric_noise_tracks_least_squares():
    rng = np.random.default_rng(12)
    spec = make_kernel("biweight", 1, 2)
    theta = np.array([1.0, 2.0])
    diffs = []
    for _ in range(40):
        X = _design(2000, rng)
        y = X @ theta + rng.normal(size=2000)
        diffs.append(mlr_fit(X, y, spec, 1.0).estimate - least_squares(X, y)[0])
    diffs = np.array(diffs)
    # Both are consistent for theta; their difference is centred at zero.
    t = diffs.mean(axis=0) / (diffs.std(axis=0, ddof=1) / math.sqrt(len(diffs)))
    assert np.all(np.abs(t) < 4)


def test_mlr_skew_noise_bias_gap_is_mean_minus_mode():
    noise = preset("skewed", 1)
    offset = find_mode(noise)[0]
    noise0 = noise.shifted(-offset)
    gap_expected = noise0.mean()[0]
    rng = np.random.default_rng(13)
    spec = make_kernel("biweight", 1, 2)
    theta = np.array([1.0, 2.0])
    h = mlr_amse_oracle(GaussianMixture([1.0], [[0.0]], [[1.0]]), noise0, theta, spec, 5000).h_opt
    mlr_err, ls_err = [], []
    for _ in range(30):
        X = _design(5000, rng)
        y = X @ theta + noise0.sample(5000, rng)[:, 0]
        mlr_err.append(mlr_fit(X, y, spec, h).estimate - theta)
        ls_err.append(least_squares(X, y)[0] - theta)
    mlr_err, ls_err = np.array(mlr_err), np.array(ls_err)
    # Least squares converges to the conditional mean, so its intercept is shifted by the mean-mode gap.
    assert ls_err[:, 0].mean() == pytest.approx(gap_expected, abs=4 * ls_err[:, 0].std() / math.sqrt(30) + 0.01)
    assert abs(mlr_err[:, 0].mean()) < abs(gap_expected) / 2


def test_mlr_oracle_kernel_ratio_and_power_law():
    x_dist = GaussianMixture([1.0], [[0.0]], [[1.0]])
    noise = preset("skewed", 1)
    noise = noise.shifted(-find_mode(noise)[0])
    theta = np.array([1.0, 2.0])
    bw = mlr_amse_oracle(x_dist, noise, theta, make_kernel("biweight", 1, 2), 5000)
    ga = mlr_amse_oracle(x_dist, noise, theta, make_kernel("gaussian", 1, 2), 5000)
    assert ga.amse_opt / bw.amse_opt == pytest.approx(amse_ratio(gaussian_profile(1, 2)), rel=1e-10)
    assert bw.with_n(10000).h_opt / bw.h_opt == pytest.approx(2 ** (-1 / 7), rel=1e-12)


def test_mlr_oracle_requires_noise_mode_at_zero():
    with pytest.raises(DomainError):
        mlr_amse_oracle(
            GaussianMixture([1.0], [[0.0]], [[1.0]]), preset("skewed", 1), [1.0, 2.0], make_kernel("biweight", 1, 2), 100
        )


# -- clustering ---------------------------------------------------------------------


def test_cluster_estimate_close_and_cer_matches_empirical_frequency():
    f = preset("bimodal")
    zeta = find_antimode_1d(f)
    rng = np.random.default_rng(14)
    x = f.sample(3000, rng)
    zn, cer = cluster_1d(x, make_kernel("biweight", 1, 2), 0.8, truth=f)
    assert abs(zn - zeta) < 0.5
    assert cer == pytest.approx(abs(cdf_1d(f, zn) - cdf_1d(f, zeta)), rel=1e-14)
    fresh = f.sample(100000, rng)[:, 0]
    lo, hi = sorted((zn, zeta))
    freq = np.mean((fresh >= lo) & (fresh < hi))
    se = math.sqrt(max(cer * (1 - cer), 1e-12) / fresh.size)
    assert abs(freq - cer) <= 3 * se + 1e-12


def test_cluster_antimode_is_local_kde_minimum():
    f = preset("bimodal")
    x = f.sample(2000, np.random.default_rng(15))
    spec = make_kernel("gaussian", 1, 2)
    zn, cer = cluster_1d(x, spec, 0.5)
    assert cer is None
    est = KDE(x, spec, 0.5)
    _, g, H = est.evaluate(np.array([[zn]]), 2)
    assert abs(g[0, 0]) < 1e-8
    assert H[0, 0, 0] > 0


def test_cluster_unimodal_sample_rejected():
    x = np.random.default_rng(16).normal(size=(500, 1))
    with pytest.raises(TopologyError):
        cluster_1d(x, make_kernel("gaussian", 1, 2), 2.0)


def test_cluster_requires_univariate():
    with pytest.raises(ShapeError):
        cluster_1d(np.zeros((5, 2)), make_kernel("gaussian", 2, 2), 1.0)


def test_mlr_error_differs_from_least_squares_under_skew_noise():
    # The intercept error distributions of MLR and least squares differ under skew noise.
    noise = preset("skewed", 1)
    noise = noise.shifted(-find_mode(noise)[0])
    rng = np.random.default_rng(17)
    spec = make_kernel("biweight", 1, 2)
    theta = np.array([1.0, 2.0])
    a, b = [], []
    for _ in range(25):
        X = _design(3000, rng)
        y = X @ theta + noise.sample(3000, rng)[:, 0]
        a.append(np.linalg.norm(mlr_fit(X, y, spec, 0.6).estimate - theta))
        b.append(np.linalg.norm(least_squares(X, y)[0] - theta))
    assert stats.ttest_ind(a, b, equal_var=False).pvalue < 0.05
