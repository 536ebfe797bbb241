"""Sampling, maximum-likelihood fitting and Monte Carlo oracles.

Random streams
--------------
Draws are produced in chunks of :data:`CHUNK_SIZE` points.  Chunk ``i`` of
a run seeded with ``seed`` uses its own PCG64 generator built from
``SeedSequence(seed, spawn_key=(i,))``, so a chunk's draws depend only on
``(seed, i)``.  Chunks can therefore be generated serially or by any number
of workers and concatenated in index order with bit-identical results.

Monte Carlo estimates
---------------------
Every estimator returns an :class:`McEstimate` holding the sample mean and
its standard error ``std(ddof=1) / sqrt(n)``.  Densities are handled in the
log domain with one exponentiation per point.  Transforms of a moment
estimate (entropies, divergences) propagate the error by the delta method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln, logsumexp

from . import linalg_spd
from .errors import CarrierIsZero, DegenerateSample, FamilyMismatch, NotPositiveDefinite
from .expfam import (
    FamilySpec,
    NaturalParam,
    check_same_family,
    family_spec,
    grad_log_normalizer,
    inner,
    log_density_batch,
    log_normalizer,
    mean_sufficient_stat,
    sample_points,
    scale_natural,
)
from .families import EXPONENTIAL, GAUSSIAN, POISSON, GaussianSource, gaussian_from_natural, to_natural
from .measures import (
    EntropyValue,
    OrderPair,
    log_malpha_factor,
    sm_entropy,
    sm_transform,
    sm_transform_slope,
)

CHUNK_SIZE = 1 << 16
DEFAULT_SAMPLES = 1_000_000
SERIES_TAIL_RTOL = 1e-15


@dataclass(frozen=True, eq=False)
class SampleSet:
    family: str
    dim: int
    points: NDArray

    def __post_init__(self):
        pts = sample_points(self.family, self.dim, self.points)
        if pts.shape[0] < 1:
            raise DegenerateSample("empty sample")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def spec(self) -> FamilySpec:
        return family_spec(self.family, self.dim)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    seed: int

    def z_score(self, reference: float) -> float:
        diff = self.mean - reference
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def _estimate(values: NDArray[np.float64], seed: int) -> McEstimate:
    n = values.shape[0]
    se = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return McEstimate(float(np.mean(values)), se, n, seed)


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for chunk ``index`` of the stream seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _chunked(n: int, seed: int, draw: Callable[[np.random.Generator, int], NDArray]) -> NDArray:
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    parts = []
    for index, start in enumerate(range(0, n, CHUNK_SIZE)):
        parts.append(draw(substream(seed, index), min(CHUNK_SIZE, n - start)))
    return np.concatenate(parts, axis=0)


def sample(theta: NaturalParam, n: int, seed: int = 0) -> SampleSet:
    """Draw ``n`` i.i.d. points from ``p(. | theta)``; deterministic in ``(seed, n, theta)``."""
    if theta.family == GAUSSIAN:
        src = gaussian_from_natural(theta)
        mu, chol = src.mu, src.sigma.chol

        def draw(rng, m):
            return mu + rng.standard_normal((m, src.dim)) @ chol.T

    elif theta.family == EXPONENTIAL:
        rate = -float(theta.vec[0])

        def draw(rng, m):
            # inverse CDF; 1 - u lies in (0, 1]
            return -np.log1p(-rng.random(m)) / rate

    else:
        rate = math.exp(float(theta.vec[0]))

        def draw(rng, m):
            return rng.poisson(rate, m).astype(np.float64)

    return SampleSet(theta.family, theta.dim, _chunked(n, seed, draw))


# --------------------------------------------------------------------------
# maximum likelihood
# --------------------------------------------------------------------------


def mle_fit(samples: SampleSet, family: Optional[FamilySpec] = None) -> NaturalParam:
    """Solve ``grad F(theta) = mean t(x_i)`` in closed form.

    Gaussian: sample mean and the biased (1/n) covariance.  Exponential:
    ``theta = -1 / mean``.  Poisson: ``theta = log(mean)``.
    """
    if family is not None and (family.id != samples.family or family.dim != samples.dim):
        raise FamilyMismatch(f"samples are {samples.family}/{samples.dim}, asked for {family.id}/{family.dim}")
    pts = samples.points
    if samples.family == GAUSSIAN:
        d = samples.dim
        if samples.n < d + 1:
            raise DegenerateSample(f"need at least {d + 1} points for a {d}-D gaussian, got {samples.n}")
        mu = pts.mean(axis=0)
        centered = pts - mu
        try:
            sigma = linalg_spd.cholesky(centered.T @ centered / samples.n)
        except NotPositiveDefinite as exc:
            raise DegenerateSample(f"sample covariance is not positive definite: {exc}") from None
        return to_natural(GaussianSource(mu, sigma))
    mean = float(pts.mean())
    if not mean > 0:
        raise DegenerateSample(f"sample mean {mean} is on the boundary of the parameter space")
    if samples.family == EXPONENTIAL:
        return NaturalParam(EXPONENTIAL, [-1.0 / mean])
    return NaturalParam(POISSON, [math.log(mean)])


def empirical_moments(samples: SampleSet):
    """``(1/n) sum t(x_i)`` as an ExpectationParam."""
    return mean_sufficient_stat(samples.spec, samples.points)


# --------------------------------------------------------------------------
# exact series for count families
# --------------------------------------------------------------------------


def _log_series(log_term: Callable[[NDArray], NDArray], rate: float) -> float:
    """``log sum_{x >= 0} exp(log_term(x))`` for an eventually log-concave sequence.

    Starts at ``X = ceil(rate + 20 sqrt(rate) + 40)`` and doubles ``X`` until
    the geometric tail bound from the last term ratio is below
    ``SERIES_TAIL_RTOL`` relative to the partial sum.
    """
    top = int(math.ceil(rate + 20.0 * math.sqrt(rate) + 40.0))
    while True:
        xs = np.arange(top + 1, dtype=np.float64)
        g = log_term(xs)
        total = float(logsumexp(g))
        step = g[-1] - g[-2]
        if step < 0:
            tail = g[-1] + step - math.log1p(-math.exp(step))
            if tail - total < math.log(SERIES_TAIL_RTOL):
                return total
        top *= 2


def _require_counts(theta: NaturalParam) -> None:
    if not theta.kernel.has_carrier:
        raise CarrierIsZero(f"{theta.family} has k = 0; the carrier factor is exactly 1")


def _poisson_logpmf(theta: NaturalParam) -> Callable[[NDArray], NDArray]:
    return lambda xs: log_density_batch(theta, xs)


def malpha_exact(theta: NaturalParam, alpha: float) -> float:
    """``sum_x p(x)^alpha`` by truncated summation (count families only)."""
    _require_counts(theta)
    logp = _poisson_logpmf(theta)
    return math.exp(_log_series(lambda xs: alpha * logp(xs), math.exp(theta.vec[0])))


def carrier_expectation_exact(theta: NaturalParam, alpha: float) -> float:
    """``E[exp((alpha - 1) k(X))]`` under ``p(. | alpha theta)`` by truncated summation."""
    _require_counts(theta)
    if alpha == 1.0:
        return 1.0
    scaled = scale_natural(theta, alpha)
    logp = _poisson_logpmf(scaled)
    return math.exp(_log_series(
        lambda xs: logp(xs) - (alpha - 1.0) * gammaln(xs + 1.0),
        math.exp(scaled.vec[0]),
    ))


def c_alpha_exact(theta: NaturalParam, theta2: NaturalParam, alpha: float) -> float:
    """``sum_x p(x)^alpha q(x)^(1 - alpha)`` by truncated summation."""
    check_same_family(theta, theta2)
    _require_counts(theta)
    lp, lq = _poisson_logpmf(theta), _poisson_logpmf(theta2)
    rate = math.exp(max(theta.vec[0], theta2.vec[0]))
    return math.exp(_log_series(lambda xs: alpha * lp(xs) + (1.0 - alpha) * lq(xs), rate))


def expected_carrier_exact(theta: NaturalParam) -> float:
    """``E[k(X)]`` (nonpositive) by truncated summation."""
    _require_counts(theta)
    logp = _poisson_logpmf(theta)

    def log_term(xs):
        lg = gammaln(xs + 1.0)
        with np.errstate(divide="ignore"):
            return logp(xs) + np.log(lg)

    return -math.exp(_log_series(log_term, math.exp(theta.vec[0])))


def sm_entropy_carrier(theta: NaturalParam, order: OrderPair) -> EntropyValue:
    """Sharma-Mittal entropy including the carrier correction.

    ``log M_alpha = F(alpha theta) - alpha F(theta) + log E[exp((alpha - 1) k(X))]``
    with the expectation summed exactly; the Shannon limit is
    ``F(theta) - <theta, grad F(theta)> - E[k(X)]``.  Zero-carrier families
    go straight to :func:`smexpfam.measures.sm_entropy`.
    """
    if not theta.kernel.has_carrier:
        return sm_entropy(theta, order)
    if order.alpha == 1.0:
        shannon = log_normalizer(theta) - inner(theta, grad_log_normalizer(theta)) - expected_carrier_exact(theta)
        return EntropyValue(sm_transform(0.0, order, shannon), order)
    log_m = log_malpha_factor(theta, order.alpha) + math.log(carrier_expectation_exact(theta, order.alpha))
    return EntropyValue(sm_transform(log_m, order), order)


# --------------------------------------------------------------------------
# Monte Carlo oracles
# --------------------------------------------------------------------------


def _logp_samples(theta: NaturalParam, n: int, seed: int):
    pts = sample(theta, n, seed).points
    return pts, log_density_batch(theta, pts)


def mc_malpha(theta: NaturalParam, alpha: float, n: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """``M_alpha = E_p[p(X)^(alpha - 1)]`` sampling from p."""
    if alpha == 1.0:
        return McEstimate(1.0, 0.0, n, seed)
    _, logp = _logp_samples(theta, n, seed)
    return _estimate(np.exp((alpha - 1.0) * logp), seed)


def mc_carrier_expectation(theta: NaturalParam, alpha: float, n: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """``E[exp((alpha - 1) k(X))]`` with X drawn from ``p(. | alpha theta)``."""
    _require_counts(theta)
    if alpha == 1.0:
        return McEstimate(1.0, 0.0, n, seed)
    pts = sample(scale_natural(theta, alpha), n, seed).points
    return _estimate(np.exp((alpha - 1.0) * theta.kernel.log_carrier(pts)), seed)


def mc_c_alpha(theta: NaturalParam, theta2: NaturalParam, alpha: float,
               n: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """``C_alpha = E_p[(q(X) / p(X))^(1 - alpha)]`` sampling from p."""
    check_same_family(theta, theta2)
    pts, logp = _logp_samples(theta, n, seed)
    logq = log_density_batch(theta2, pts)
    return _estimate(np.exp((1.0 - alpha) * (logq - logp)), seed)


def mc_sm_entropy(theta: NaturalParam, order: OrderPair, n: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """Plug-in Sharma-Mittal entropy from the Monte Carlo moment.

    At alpha = 1 the Shannon entropy is estimated as ``-mean(log p(x_i))``.
    """
    if order.alpha == 1.0:
        _, logp = _logp_samples(theta, n, seed)
        shannon = _estimate(-logp, seed)
        value = sm_transform(0.0, order, shannon.mean)
        slope = sm_transform_slope(0.0, order, shannon.mean)
        return McEstimate(value, abs(slope) * shannon.std_error, n, seed)
    m = mc_malpha(theta, order.alpha, n, seed)
    log_m = math.log(m.mean)
    slope = sm_transform_slope(log_m, order)
    return McEstimate(sm_transform(log_m, order), abs(slope) * m.std_error / m.mean, n, seed)


def mc_sm_divergence(theta: NaturalParam, theta2: NaturalParam, order: OrderPair,
                     n: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """Plug-in Sharma-Mittal divergence ``D(p : q)`` from the Monte Carlo ``C_alpha``.

    At alpha = 1 the KL divergence is estimated as ``mean(log p - log q)``.
    """
    check_same_family(theta, theta2)
    if order.alpha == 1.0:
        pts, logp = _logp_samples(theta, n, seed)
        kl = _estimate(logp - log_density_batch(theta2, pts), seed)
        value = -sm_transform(0.0, order, -kl.mean)
        slope = sm_transform_slope(0.0, order, -kl.mean)
        return McEstimate(value, abs(slope) * kl.std_error, n, seed)
    c = mc_c_alpha(theta, theta2, order.alpha, n, seed)
    log_c = math.log(c.mean)
    slope = sm_transform_slope(log_c, order)
    return McEstimate(-sm_transform(log_c, order), abs(slope) * c.std_error / c.mean, n, seed)
