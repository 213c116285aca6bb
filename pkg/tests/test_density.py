"""Gaussian-mixture oracle: derivatives, CDF, critical points, plug-in asymptotics."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from modalkit.criteria import amse_ratio
from modalkit.density import (
    GaussianMixture,
    asymptotics,
    bbar_closed,
    bbar_direct,
    btilde,
    cdf_1d,
    find_antimode_1d,
    find_critical_points_1d,
    find_mode,
    mixture_partial,
    preset,
)
from modalkit.errors import DegenerateBiasError, DomainError, SearchFailureError, ShapeError, TopologyError
from modalkit.kernels import gaussian_profile, make_kernel
from modalkit.moments import v_d


def _random_mixture(rng, d, k=3):
    w = rng.dirichlet(np.ones(k))
    return GaussianMixture(w, rng.normal(0, 1.5, (k, d)), rng.uniform(0.6, 1.8, (k, d)))


# -- partial derivatives ------------------------------------------------------------


def test_pdf_of_standard_normal():
    f = GaussianMixture([1.0], [[0.0]], [[1.0]])
    assert f.pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    assert mixture_partial(f, (0,), 0.0) == f.pdf(0.0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_partials_against_central_differences(d):
    rng = np.random.default_rng(10 + d)
    f = _random_mixture(rng, d)
    pts = rng.normal(0, 1.5, (30, d))
    eps = 1e-5
    for _ in range(12):
        idx = rng.integers(0, 3, d)
        if idx.sum() > 6:
            continue
        for j in range(d):
            up = idx.copy()
            up[j] += 1
            step = np.zeros(d)
            step[j] = eps
            fd = (f.partial(idx, pts + step) - f.partial(idx, pts - step)) / (2 * eps)
            exact = f.partial(up, pts)
            scale = np.max(np.abs(exact)) + 1e-12
            np.testing.assert_allclose(fd, exact, rtol=1e-5, atol=1e-5 * scale)


@pytest.mark.parametrize("order", range(0, 8))
def test_univariate_partials_against_mpmath(order):
    f = preset("bimodal")
    mpmath.mp.dps = 30

    def pdf(x):
        return sum(
            w * mpmath.npdf(x, m, s) for w, m, s in zip(f.weights, f.means[:, 0], f.scales[:, 0])
        )

    for x in (-1.3, 0.4, 2.05, 5.5):
        ref = float(mpmath.diff(pdf, x, order))
        assert f.partial((order,), x) == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_partial_index_validation():
    f = preset("skewed", 2)
    with pytest.raises(ShapeError):
        f.partial((1,), [0.0, 0.0])
    with pytest.raises(DomainError):
        f.partial((-1, 0), [0.0, 0.0])


def test_gradient_and_hessian_shapes_and_symmetry():
    f = preset("skewed", 3)
    x = np.array([[0.1, -0.2, 0.3], [1.0, 0.5, -0.5]])
    assert f.grad(x).shape == (2, 3)
    H = f.hess(x)
    np.testing.assert_array_equal(H, np.transpose(H, (0, 2, 1)))


def test_mixture_validation():
    with pytest.raises(DomainError):
        GaussianMixture([0.5, 0.6], [[0.0], [1.0]], [[1.0], [1.0]])
    with pytest.raises(DomainError):
        GaussianMixture([1.0], [[0.0]], [[0.0]])
    with pytest.raises(ShapeError):
        GaussianMixture([0.5, 0.5], [[0.0], [1.0]], [[1.0, 1.0]])
    with pytest.raises(DomainError):
        preset("no-such-density")


def test_json_round_trip():
    f = preset("skewed", 2)
    g = GaussianMixture.from_dict(f.to_dict())
    np.testing.assert_array_equal(f.means, g.means)
    np.testing.assert_array_equal(f.scales, g.scales)


# -- normalization and CDF ----------------------------------------------------------


def test_cdf_limits_and_symmetry():
    f = GaussianMixture([1.0], [[0.0]], [[1.0]])
    assert cdf_1d(f, 0.0) == 0.5
    assert cdf_1d(f, -60.0) == 0.0
    assert cdf_1d(f, 60.0) == 1.0


@pytest.mark.parametrize("name", ["skewed", "bimodal"])
def test_cdf_against_quadrature(name):
    f = preset(name)
    for x in (find_mode(f)[0], -1.0, 2.5):
        ref, _ = integrate.quad(lambda t: f.pdf(t), -np.inf, x, epsabs=1e-13, epsrel=1e-13)
        assert cdf_1d(f, x) == pytest.approx(ref, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(-8, 8), st.floats(0, 5))
def test_cdf_monotone(x, dx):
    f = preset("bimodal")
    assert cdf_1d(f, x + dx) >= cdf_1d(f, x)


def test_two_dimensional_mass():
    f = preset("skewed", 2)
    mass, _ = integrate.dblquad(lambda y, x: f.pdf([x, y]), -10, 12, -10, 12, epsabs=1e-9)
    assert mass == pytest.approx(1.0, abs=1e-6)


# -- critical points ----------------------------------------------------------------


@pytest.mark.parametrize("d,ref", [(1, 0.2395), (2, 0.1514), (3, 0.0874)])
def test_skewed_preset_modes(d, ref):
    theta = find_mode(preset("skewed", d))
    np.testing.assert_allclose(np.round(theta, 4), np.full(d, ref), atol=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mode_is_stationary_maximum(d):
    f = preset("skewed", d)
    theta = find_mode(f)
    assert np.max(np.abs(f.grad(theta))) <= 1e-12
    assert np.all(np.linalg.eigvalsh(f.hess(theta)) < 0)


def test_mode_matches_scalar_root_finder():
    f = preset("skewed", 1)
    root = optimize.brentq(lambda t: f.partial((1,), t), -0.5, 1.0, xtol=1e-15)
    assert find_mode(f)[0] == pytest.approx(root, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.3, 3.0))
def test_single_gaussian_mode_is_mean(m1, m2, s):
    f = GaussianMixture([1.0], [[m1, m2]], [[s, 2 * s]])
    np.testing.assert_allclose(find_mode(f), [m1, m2], atol=1e-10)


def test_tied_modes_rejected():
    f = GaussianMixture([0.5, 0.5], [[-4.0], [4.0]], [[1.0], [1.0]])
    with pytest.raises(SearchFailureError):
        find_mode(f)


def test_bimodal_antimode():
    f = preset("bimodal")
    zeta = find_antimode_1d(f)
    assert zeta == pytest.approx(2.05530, abs=1e-5)
    assert abs(f.partial((1,), zeta)) <= 1e-13
    assert f.partial((2,), zeta) > 0
    maxima, minima = find_critical_points_1d(f)
    assert len(maxima) == 2 and len(minima) == 1


def test_antimode_requires_two_modes():
    with pytest.raises(TopologyError):
        find_antimode_1d(preset("skewed", 1))


# -- bias reductions ----------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("q", [2, 4])
def test_bbar_closed_equals_direct_sum(d, q):
    f = _random_mixture(np.random.default_rng(d * 10 + q), d)
    at = np.full(d, 0.3)
    np.testing.assert_allclose(bbar_closed(f, q, at), bbar_direct(f, q, at), rtol=1e-8, atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_bbar_is_half_sphere_volume_times_btilde_at_q2(d):
    f = _random_mixture(np.random.default_rng(7 + d), d)
    at = np.linspace(-0.2, 0.2, d)
    np.testing.assert_allclose(bbar_closed(f, 2, at), v_d(d) / 2 * btilde(f, 2, at), rtol=1e-12)


# -- asymptotics --------------------------------------------------------------------

GRID = [(d, q) for d in (1, 2, 3) for q in (2, 4, 6)]


@pytest.mark.parametrize("d,q", GRID)
def test_bandwidth_power_law(d, q):
    a = asymptotics(preset("skewed", d), make_kernel("biweight", d, q), 1000)
    assert a.with_n(4000).h_opt / a.h_opt == pytest.approx(4 ** (-1 / (d + 2 * q + 2)), rel=1e-12)


@pytest.mark.parametrize("d,q", GRID)
@pytest.mark.parametrize("kernel", ["biweight", "pk-biweight"])
def test_amse_stationary_at_optimal_bandwidth(d, q, kernel):
    a = asymptotics(preset("skewed", d), make_kernel(kernel, d, q), 5000)
    best = a.amse(a.h_opt)
    assert best == pytest.approx(a.amse_opt, rel=1e-12)
    assert a.amse(a.h_opt * (1 + 1e-3)) > best
    assert a.amse(a.h_opt * (1 - 1e-3)) > best


def test_optimal_bandwidth_matches_numerical_minimizer():
    a = asymptotics(preset("skewed", 2), make_kernel("gaussian", 2, 2), 6400)
    res = optimize.minimize_scalar(lambda lh: a.amse(math.exp(lh)), bracket=(-3, 0), tol=1e-12)
    assert math.exp(res.x) == pytest.approx(a.h_opt, rel=1e-6)


def test_gaussian_over_biweight_amse_equals_criterion_ratio():
    f = preset("skewed", 1)
    ga = asymptotics(f, make_kernel("gaussian", 1, 2), 1600)
    bw = asymptotics(f, make_kernel("biweight", 1, 2), 1600)
    assert ga.amse_opt / bw.amse_opt == pytest.approx(amse_ratio(gaussian_profile(1, 2)), rel=1e-6)
    assert ga.amse_opt / bw.amse_opt == pytest.approx(1.1198, abs=5e-5)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_rk_and_pk_agree_for_gaussian_kernel(d):
    # The Gaussian RK and PK are the same function, so their asymptotics coincide.
    f = preset("skewed", d)
    rk = asymptotics(f, make_kernel("gaussian", d, 2), 800)
    pk = asymptotics(f, make_kernel("pk-gaussian", d, 2), 800)
    assert rk.h_opt == pytest.approx(pk.h_opt, rel=1e-10)
    assert rk.amse_opt == pytest.approx(pk.amse_opt, rel=1e-10)


def test_symmetric_density_has_degenerate_bias():
    f = GaussianMixture([1.0], [[0.0]], [[1.0]])
    with pytest.raises(DegenerateBiasError):
        asymptotics(f, make_kernel("biweight", 1, 2), 100)


# -- sampling -----------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3])
def test_sample_moments_within_four_standard_errors(d):
    f = preset("skewed", d)
    n = 40000
    x = f.sample(n, np.random.default_rng(123))
    cov = f.covariance()
    se = np.sqrt(np.diag(cov) / n)
    assert np.all(np.abs(x.mean(axis=0) - f.mean()) < 4 * se)
    np.testing.assert_allclose(np.cov(x.T).reshape(d, d), cov, rtol=0.05)


def test_sample_distribution_ks():
    f = preset("bimodal")
    x = f.sample(5000, np.random.default_rng(5))[:, 0]
    assert stats.kstest(x, lambda t: cdf_1d(f, t)).pvalue > 1e-3
