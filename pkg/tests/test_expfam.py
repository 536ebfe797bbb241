import math

import numpy as np
import pytest
from scipy import integrate, stats

from helpers import FAMILY_CASES, random_source, random_theta
from smexpfam.errors import FamilyMismatch, InvalidOrder, InvalidSample, OutOfDomain
from smexpfam.estimation import sample
from smexpfam.expfam import (
    NaturalParam,
    family_spec,
    grad_log_normalizer,
    log_density,
    log_density_batch,
    log_normalizer,
    mix_natural,
    sample_points,
    scale_natural,
    sufficient_stat,
)
from smexpfam.families import GaussianSource, PoissonSource, to_natural

STD_NORMAL = NaturalParam("gaussian", [0.0], [[-0.5]])


def _fd_gradient(theta, h=1e-5):
    """Central differences of F along each coordinate; symmetric perturbation of M."""
    f = lambda t: log_normalizer(t)
    grad_v = np.empty_like(theta.vec)
    for i in range(theta.vec.size):
        e = np.zeros_like(theta.vec)
        e[i] = h
        grad_v[i] = (f(NaturalParam(theta.family, theta.vec + e, theta.mat))
                     - f(NaturalParam(theta.family, theta.vec - e, theta.mat))) / (2 * h)
    if theta.mat is None:
        return grad_v, None
    d = theta.dim
    grad_m = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] += 0.5 * h
            e[j, i] += 0.5 * h
            grad_m[i, j] = (f(NaturalParam("gaussian", theta.vec, theta.mat + e))
                            - f(NaturalParam("gaussian", theta.vec, theta.mat - e))) / (2 * h)
    return grad_v, grad_m


def _rel_err(approx, exact):
    return np.abs(approx - exact) / np.maximum(np.abs(exact), 1e-3)


class TestNaturalParam:
    def test_gaussian_requires_negative_definite(self):
        with pytest.raises(OutOfDomain):
            NaturalParam("gaussian", [0.0], [[0.5]])
        with pytest.raises(OutOfDomain):
            NaturalParam("gaussian", [0.0, 0.0], [[-1.0, 2.0], [2.0, -1.0]])

    def test_exponential_requires_negative(self):
        with pytest.raises(OutOfDomain):
            NaturalParam("exponential", [0.0])

    def test_poisson_accepts_any_real(self):
        for t in (-30.0, 0.0, 4.0):
            NaturalParam("poisson", [t])

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            NaturalParam("wishart", [1.0])

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_gaussian_order(self, d):
        spec = family_spec("gaussian", d)
        assert spec.order == d * (d + 3) // 2
        theta = to_natural(GaussianSource.from_arrays(np.zeros(d), np.eye(d)))
        assert theta.coordinates().size == spec.order

    def test_family_flags(self):
        assert not family_spec("gaussian", 2).has_carrier
        assert not family_spec("exponential").has_carrier
        assert family_spec("poisson").has_carrier
        assert all(family_spec(f).theta_is_cone for f in ("gaussian", "exponential", "poisson"))


class TestLogNormalizer:
    def test_standard_normal(self):
        assert log_normalizer(STD_NORMAL) == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-15)
        assert log_normalizer(STD_NORMAL) == pytest.approx(0.918939, abs=1e-6)

    def test_gaussian_against_quadrature(self, rng):
        for _ in range(5):
            theta = random_theta(rng, "gaussian", 1)
            v, m = theta.vec[0], theta.mat[0, 0]
            val, _ = integrate.quad(lambda x: math.exp(v * x + m * x * x), -np.inf, np.inf)
            assert log_normalizer(theta) == pytest.approx(math.log(val), rel=1e-9)

    def test_exponential(self):
        assert log_normalizer(NaturalParam("exponential", [-1.0])) == 0.0

    def test_poisson(self):
        assert log_normalizer(NaturalParam("poisson", [0.0])) == 1.0
        # oracle: log sum_x e^(theta x) / x!
        theta = 0.7
        series = sum(math.exp(theta * x) / math.factorial(x) for x in range(80))
        assert log_normalizer(NaturalParam("poisson", [theta])) == pytest.approx(math.log(series), rel=1e-14)

    @pytest.mark.parametrize("family,d", FAMILY_CASES)
    def test_strict_convexity(self, rng, family, d):
        for _ in range(10):
            t1, t2 = random_theta(rng, family, d), random_theta(rng, family, d)
            for a in (0.25, 0.5, 0.75):
                mixed = log_normalizer(mix_natural(t1, t2, a))
                assert mixed < a * log_normalizer(t1) + (1 - a) * log_normalizer(t2)


class TestGradient:
    def test_standard_normal(self):
        eta = grad_log_normalizer(STD_NORMAL)
        np.testing.assert_allclose(eta.vec, [0.0], atol=1e-15)
        np.testing.assert_allclose(eta.mat, [[1.0]], rtol=1e-15)

    def test_exponential(self):
        assert grad_log_normalizer(NaturalParam("exponential", [-2.0])).vec[0] == 0.5

    def test_poisson(self):
        assert grad_log_normalizer(NaturalParam("poisson", [math.log(3.0)])).vec[0] == pytest.approx(3.0, rel=1e-15)

    @pytest.mark.parametrize("family,d", FAMILY_CASES)
    def test_finite_differences(self, rng, family, d):
        for _ in range(5):
            theta = random_theta(rng, family, d)
            eta = grad_log_normalizer(theta)
            fd_v, fd_m = _fd_gradient(theta)
            assert np.all(_rel_err(fd_v, eta.vec) <= 1e-5)
            if fd_m is not None:
                assert np.all(_rel_err(fd_m, eta.mat) <= 1e-5)


class TestScaleAndMix:
    def test_scale_gaussian(self):
        theta = to_natural(GaussianSource.from_arrays([1.0, 2.0], [[2.0, 0.5], [0.5, 1.0]]))
        scaled = scale_natural(theta, 2.0)
        np.testing.assert_array_equal(scaled.vec, 2 * theta.vec)
        np.testing.assert_array_equal(scaled.mat, 2 * theta.mat)

    def test_scale_exponential(self):
        assert scale_natural(NaturalParam("exponential", [-1.0]), 0.5).vec[0] == -0.5

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_scale_rejects_nonpositive(self, a):
        with pytest.raises(InvalidOrder):
            scale_natural(STD_NORMAL, a)

    def test_mix_idempotent(self, rng):
        theta = random_theta(rng, "gaussian", 3)
        assert mix_natural(theta, theta, 0.3).allclose(theta, rtol=1e-15)

    def test_mix_average(self):
        mixed = mix_natural(STD_NORMAL, NaturalParam("gaussian", [0.0], [[-1.0]]), 0.5)
        assert mixed.vec[0] == 0.0 and mixed.mat[0, 0] == -0.75

    def test_mix_outside_unit_interval_leaves_domain(self):
        with pytest.raises(OutOfDomain):
            mix_natural(STD_NORMAL, NaturalParam("gaussian", [0.0], [[-1.0]]), 3.0)

    def test_mix_family_mismatch(self):
        with pytest.raises(FamilyMismatch):
            mix_natural(STD_NORMAL, NaturalParam("poisson", [0.0]), 0.5)
        with pytest.raises(FamilyMismatch):
            mix_natural(STD_NORMAL, to_natural(GaussianSource.from_arrays([0, 0], np.eye(2))), 0.5)


class TestLogDensity:
    def test_standard_normal_peak(self):
        assert log_density(STD_NORMAL, 0.0) == pytest.approx(-0.918939, abs=1e-6)

    def test_exponential_origin(self):
        assert log_density(NaturalParam("exponential", [-1.0]), 0.0) == 0.0

    def test_poisson_zero(self):
        assert log_density(NaturalParam("poisson", [0.0]), 0) == pytest.approx(-1.0, abs=1e-15)

    def test_invalid_samples(self):
        with pytest.raises(InvalidSample):
            log_density(NaturalParam("poisson", [0.0]), -1)
        with pytest.raises(InvalidSample):
            log_density(NaturalParam("poisson", [0.0]), 1.5)
        with pytest.raises(InvalidSample):
            log_density(NaturalParam("exponential", [-1.0]), -0.1)

    def test_gaussian_matches_scipy(self, rng):
        for d in (1, 2, 4):
            src = random_source(rng, "gaussian", d)
            x = rng.normal(size=(50, d))
            expected = stats.multivariate_normal(src.mu, src.sigma.entries).logpdf(x)
            got = log_density_batch(to_natural(src), sample_points("gaussian", d, x))
            np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-10)

    def test_poisson_matches_scipy(self):
        xs = np.arange(40.0)
        got = log_density_batch(to_natural(PoissonSource(6.5)), xs)
        np.testing.assert_allclose(got, stats.poisson(6.5).logpmf(xs), rtol=1e-12)

    def test_normalization_1d_quadrature(self, rng):
        for family in ("gaussian", "exponential"):
            theta = random_theta(rng, family)
            lo = -np.inf if family == "gaussian" else 0.0
            val, _ = integrate.quad(lambda x: math.exp(log_density(theta, x)), lo, np.inf)
            assert val == pytest.approx(1.0, abs=1e-8)

    def test_normalization_poisson_sum(self, rng):
        for _ in range(10):
            lam = float(rng.uniform(0.1, 50))
            top = math.ceil(lam + 20 * math.sqrt(lam) + 20)
            total = np.exp(log_density_batch(to_natural(PoissonSource(lam)), np.arange(top + 1.0))).sum()
            assert total >= 1 - 1e-12

    @pytest.mark.parametrize("d", [2, 4])
    def test_normalization_mc(self, rng, d):
        # importance sampling from a wider scipy Gaussian
        src = random_source(rng, "gaussian", d)
        proposal = stats.multivariate_normal(src.mu, 2.0 * src.sigma.entries)
        x = proposal.rvs(size=200_000, random_state=rng)
        w = np.exp(log_density_batch(to_natural(src), x) - proposal.logpdf(x))
        se = w.std(ddof=1) / math.sqrt(w.size)
        assert abs(w.mean() - 1.0) <= 3 * se


class TestSufficientStat:
    def test_gaussian_outer_product(self):
        t = sufficient_stat(family_spec("gaussian", 2), [1.0, 2.0])
        np.testing.assert_array_equal(t.vec, [1.0, 2.0])
        np.testing.assert_array_equal(t.mat, [[1.0, 2.0], [2.0, 4.0]])

    def test_gaussian_scalar(self):
        t = sufficient_stat(family_spec("gaussian", 1), 3.0)
        assert t.vec[0] == 3.0 and t.mat[0, 0] == 9.0

    def test_poisson_identity(self):
        assert sufficient_stat(family_spec("poisson"), 5).vec[0] == 5.0

    @pytest.mark.parametrize("family,d", FAMILY_CASES)
    def test_sample_mean_matches_gradient(self, rng, family, d):
        theta = random_theta(rng, family, d)
        n = 100_000
        pts = sample(theta, n, seed=11).points
        eta = grad_log_normalizer(theta)
        if family == "gaussian":
            stats_v, stats_m = pts, np.einsum("ni,nj->nij", pts, pts)
            for est, ref in ((stats_v, eta.vec), (stats_m, eta.mat)):
                se = est.std(axis=0, ddof=1) / math.sqrt(n)
                assert np.all(np.abs(est.mean(axis=0) - ref) <= 5 * se)
        else:
            se = pts.std(ddof=1) / math.sqrt(n)
            assert abs(pts.mean() - eta.vec[0]) <= 5 * se
