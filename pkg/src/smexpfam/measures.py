"""Sharma-Mittal entropies and divergences in closed form.

For a member ``p`` of an exponential family with natural parameter theta,
the integral ``M_alpha(p) = int p^alpha`` factors as

    M_alpha = exp(F(alpha theta) - alpha F(theta)) * E[exp((alpha - 1) k(X))]

where the expectation is under ``p(. | alpha theta)``.  When ``k = 0`` that
expectation is 1 and every entropy below is a closed form in ``F``.  For two
members of the same family, ``int p^alpha q^(1 - alpha) = exp(-J)`` with
``J`` the Jensen difference of ``F``, carrier or not.

The Gaussian-specific functions (``*_gaussian``) evaluate the same
quantities from ``(mu, Sigma)`` directly and serve as an independent
cross-check of the natural-parameter route.

All values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import linalg_spd
from .errors import CarrierNotZero, DimensionMismatch, InvalidOrder, NotPositiveDefinite, OutOfDomain
from .expfam import (
    NaturalParam,
    check_same_family,
    grad_log_normalizer,
    inner,
    log_normalizer,
    mix_natural,
    scale_natural,
)
from .families import LOG_2PI, GaussianSource

SNAP_TOL = 1e-12

SHARMA_MITTAL = "sharma-mittal"
RENYI = "renyi-limit"
TSALLIS = "tsallis-limit"
SHANNON = "shannon-limit"


@dataclass(frozen=True)
class OrderPair:
    """Entropy order ``(alpha, beta)`` tagged with its limit regime.

    ``alpha`` within 1e-12 of 1 is snapped to 1, ``beta`` within 1e-12 of 1
    is snapped to 1, then ``beta`` within 1e-12 of ``alpha`` is snapped to
    ``alpha``.  ``alpha = 1`` with ``beta != 1`` stays in the Sharma-Mittal
    regime and is evaluated through its alpha -> 1 limit.
    """

    alpha: float
    beta: float
    regime: str = field(init=False)

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (a > 0 and math.isfinite(a)):
            raise InvalidOrder(f"alpha must be positive and finite, got {self.alpha}")
        if not math.isfinite(b):
            raise InvalidOrder(f"beta must be finite, got {self.beta}")
        if abs(a - 1.0) < SNAP_TOL:
            a = 1.0
        if abs(b - 1.0) < SNAP_TOL:
            b = 1.0
        if abs(b - a) < SNAP_TOL:
            b = a
        if a == 1.0 and b == 1.0:
            regime = SHANNON
        elif b == 1.0:
            regime = RENYI
        elif b == a:
            regime = TSALLIS
        else:
            regime = SHARMA_MITTAL
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "regime", regime)

    @classmethod
    def renyi(cls, alpha: float) -> OrderPair:
        return cls(alpha, 1.0)

    @classmethod
    def tsallis(cls, alpha: float) -> OrderPair:
        return cls(alpha, alpha)

    @classmethod
    def shannon(cls) -> OrderPair:
        return cls(1.0, 1.0)


@dataclass(frozen=True)
class EntropyValue:
    value: float
    order: OrderPair

    @property
    def regime(self) -> str:
        return self.order.regime


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    order: OrderPair
    jensen: float
    """Jensen difference J at ``order.alpha`` (0 at alpha = 1)."""

    @property
    def regime(self) -> str:
        return self.order.regime


class BhattacharyyaHellinger(NamedTuple):
    coefficient: float
    squared_hellinger: float


# --------------------------------------------------------------------------
# shared transform
# --------------------------------------------------------------------------


def sm_transform(log_moment: float, order: OrderPair, rate_at_one: Optional[float] = None) -> float:
    """Map ``log M_alpha`` to the Sharma-Mittal entropy of the given order.

    ``rate_at_one`` is the alpha -> 1 limit of ``log M_alpha / (1 - alpha)``
    (the Shannon entropy); it is required, and only used, when alpha == 1.
    Divergences reuse this map as ``D = -sm_transform(log C_alpha, order, -KL)``.
    """
    a, b = order.alpha, order.beta
    if a == 1.0:
        if rate_at_one is None:
            raise ValueError("alpha == 1 needs the limiting rate")
        if order.regime == SHANNON:
            return rate_at_one
        return math.expm1((1.0 - b) * rate_at_one) / (1.0 - b)
    if order.regime == RENYI:
        return log_moment / (1.0 - a)
    if order.regime == TSALLIS:
        return math.expm1(log_moment) / (1.0 - a)
    return math.expm1((1.0 - b) / (1.0 - a) * log_moment) / (1.0 - b)


def sm_transform_slope(log_moment: float, order: OrderPair, rate_at_one: Optional[float] = None) -> float:
    """Derivative of :func:`sm_transform` with respect to its first argument,
    or with respect to ``rate_at_one`` when alpha == 1."""
    a, b = order.alpha, order.beta
    if a == 1.0:
        if order.regime == SHANNON:
            return 1.0
        return math.exp((1.0 - b) * rate_at_one)
    # d/dL of expm1(e L) / (1 - b) with e = (1 - b) / (1 - a); e = 0 (Renyi) and e = 1 (Tsallis) included
    e = (1.0 - b) / (1.0 - a)
    return math.exp(e * log_moment) / (1.0 - a)


# --------------------------------------------------------------------------
# entropies
# --------------------------------------------------------------------------


def log_malpha_factor(theta: NaturalParam, alpha: float) -> float:
    """``F(alpha theta) - alpha F(theta)``, which is ``log M_alpha`` when k = 0."""
    if alpha == 1.0:
        return 0.0
    return log_normalizer(scale_natural(theta, alpha)) - alpha * log_normalizer(theta)


def shannon_entropy(theta: NaturalParam) -> float:
    """``F(theta) - <theta, grad F(theta)>``; requires a zero carrier."""
    _require_no_carrier(theta)
    return log_normalizer(theta) - inner(theta, grad_log_normalizer(theta))


def _require_no_carrier(theta: NaturalParam) -> None:
    if theta.kernel.has_carrier:
        raise CarrierNotZero(
            f"{theta.family} has a nonzero carrier measure; the closed form needs "
            "E[exp((alpha - 1) k(X))]; use estimation.sm_entropy_carrier "
            "(CLI: `smexpfam check --quantity entropy`, exact-sum correction vs Monte Carlo)"
        )


def sm_entropy(theta: NaturalParam, order: OrderPair) -> EntropyValue:
    """Sharma-Mittal entropy of a zero-carrier family member."""
    _require_no_carrier(theta)
    if order.alpha == 1.0:
        value = sm_transform(0.0, order, shannon_entropy(theta))
    else:
        value = sm_transform(log_malpha_factor(theta, order.alpha), order)
    return EntropyValue(value, order)


def renyi_entropy(theta: NaturalParam, alpha: float) -> float:
    return sm_entropy(theta, OrderPair.renyi(alpha)).value


def tsallis_entropy(theta: NaturalParam, alpha: float) -> float:
    return sm_entropy(theta, OrderPair.tsallis(alpha)).value


def sm_entropy_gaussian(src: GaussianSource, order: OrderPair) -> EntropyValue:
    """Gaussian Sharma-Mittal entropy from ``d`` and ``log |Sigma|`` only.

    Independent of the mean.  With ``s = log((2 pi)^(d/2) |Sigma|^(1/2))``::

        H = ((exp(s))^(1 - b) / a^(d (1 - b) / (2 (1 - a))) - 1) / (1 - b)
    """
    d = src.dim
    logdet = linalg_spd.log_det(src.sigma)
    s = 0.5 * (d * LOG_2PI + logdet)
    a, b = order.alpha, order.beta
    shannon = 0.5 * (d + d * LOG_2PI + logdet)
    if a == 1.0:
        if order.regime == SHANNON:
            return EntropyValue(shannon, order)
        return EntropyValue(math.expm1((1.0 - b) * shannon) / (1.0 - b), order)
    log_a = math.log(a)
    if order.regime == RENYI:
        value = s - d * log_a / (2.0 * (1.0 - a))
    elif order.regime == TSALLIS:
        value = math.expm1((1.0 - a) * s - 0.5 * d * log_a) / (1.0 - a)
    else:
        value = math.expm1((1.0 - b) * s - d * (1.0 - b) * log_a / (2.0 * (1.0 - a))) / (1.0 - b)
    return EntropyValue(value, order)


# --------------------------------------------------------------------------
# divergences
# --------------------------------------------------------------------------


def jensen_divergence(theta: NaturalParam, theta2: NaturalParam, alpha: float) -> float:
    """``J = alpha F(theta) + (1 - alpha) F(theta2) - F(alpha theta + (1 - alpha) theta2)``."""
    check_same_family(theta, theta2)
    mixed = mix_natural(theta, theta2, alpha)
    return alpha * log_normalizer(theta) + (1.0 - alpha) * log_normalizer(theta2) - log_normalizer(mixed)


def c_alpha(theta: NaturalParam, theta2: NaturalParam, alpha: float) -> float:
    """``int p^alpha q^(1 - alpha) = exp(-J)``; valid for nonzero carriers too."""
    return math.exp(-jensen_divergence(theta, theta2, alpha))


def bhattacharyya_hellinger(theta: NaturalParam, theta2: NaturalParam) -> BhattacharyyaHellinger:
    j = jensen_divergence(theta, theta2, 0.5)
    return BhattacharyyaHellinger(math.exp(-j), -math.expm1(-j))


def kl_divergence(theta: NaturalParam, theta2: NaturalParam) -> float:
    """KL(p_theta : p_theta2) as the Bregman divergence
    ``F(theta2) - F(theta) - <theta2 - theta, grad F(theta)>``."""
    check_same_family(theta, theta2)
    eta = grad_log_normalizer(theta)
    return log_normalizer(theta2) - log_normalizer(theta) - (inner(theta2, eta) - inner(theta, eta))


def sm_divergence(theta: NaturalParam, theta2: NaturalParam, order: OrderPair) -> DivergenceValue:
    """Sharma-Mittal divergence ``D(p_theta : p_theta2)`` through ``J`` first.

    ``D = (exp(-(1 - b) / (1 - a) J) - 1) / (b - 1)`` with the Renyi
    (``J / (1 - a)``), Tsallis (``(1 - exp(-J)) / (1 - a)``) and
    Kullback-Leibler limits.
    """
    check_same_family(theta, theta2)
    if order.alpha == 1.0:
        kl = kl_divergence(theta, theta2)
        return DivergenceValue(-sm_transform(0.0, order, -kl), order, 0.0)
    j = jensen_divergence(theta, theta2, order.alpha)
    return DivergenceValue(-sm_transform(-j, order), order, j)


# --------------------------------------------------------------------------
# Gaussian (mu, Sigma) closed forms
# --------------------------------------------------------------------------


class _GaussianPair(NamedTuple):
    log_ratio: float  # log(|S|^a |S'|^(1-a) / |S_bar|)
    mahalanobis: float  # dmu^T (a S' + (1-a) S)^-1 dmu
    precision_mix: linalg_spd.SpdMatrix


def _gaussian_pair(p: GaussianSource, q: GaussianSource, alpha: float) -> _GaussianPair:
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {q.dim}")
    prec_p = linalg_spd.inverse(p.sigma)
    prec_q = linalg_spd.inverse(q.sigma)
    try:
        mix = linalg_spd.cholesky(alpha * prec_p + (1.0 - alpha) * prec_q)
    except NotPositiveDefinite:
        raise OutOfDomain(f"precision mixture is not positive definite at alpha={alpha}") from None
    log_ratio = (
        alpha * linalg_spd.log_det(p.sigma)
        + (1.0 - alpha) * linalg_spd.log_det(q.sigma)
        + linalg_spd.log_det(mix)
    )
    dmu = q.mu - p.mu
    # (a S' + (1-a) S)^-1 = P' (a P + (1-a) P')^-1 P
    mahalanobis = float((prec_q @ dmu) @ linalg_spd.solve(mix, prec_p @ dmu))
    return _GaussianPair(log_ratio, mahalanobis, mix)


def gaussian_mixed_source(p: GaussianSource, q: GaussianSource, alpha: float) -> GaussianSource:
    """``(mu_bar, Sigma_bar)`` of the mixed natural parameter
    ``alpha theta_p + (1 - alpha) theta_q``."""
    pair = _gaussian_pair(p, q, alpha)
    v_bar = alpha * linalg_spd.solve(p.sigma, p.mu) + (1.0 - alpha) * linalg_spd.solve(q.sigma, q.mu)
    sigma_bar = linalg_spd.cholesky(linalg_spd.inverse(pair.precision_mix))
    return GaussianSource(linalg_spd.solve(pair.precision_mix, v_bar), sigma_bar)


def jensen_divergence_gaussian(p: GaussianSource, q: GaussianSource, alpha: float) -> float:
    """Compact Gaussian form of ``J``::

        J = 1/2 (log(|S|^a |S'|^(1-a) / |S_bar|) + a (1 - a) dmu^T (a S' + (1 - a) S)^-1 dmu)

    with ``S_bar = (a S^-1 + (1 - a) S'^-1)^-1``.
    """
    pair = _gaussian_pair(p, q, alpha)
    return 0.5 * (pair.log_ratio + alpha * (1.0 - alpha) * pair.mahalanobis)


def kl_divergence_gaussian(p: GaussianSource, q: GaussianSource) -> float:
    """Textbook ``KL(N(mu, S) : N(mu', S'))``."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {q.dim}")
    trace = float(np.trace(linalg_spd.inverse(q.sigma) @ p.sigma.entries))
    maha = linalg_spd.quad_form(q.sigma, q.mu - p.mu)
    return 0.5 * (trace + maha - p.dim + linalg_spd.log_det(q.sigma) - linalg_spd.log_det(p.sigma))


def sm_divergence_gaussian(p: GaussianSource, q: GaussianSource, order: OrderPair) -> DivergenceValue:
    """Explicit Gaussian Sharma-Mittal divergence::

        D = ((|S|^a |S'|^(1-a) / |S_bar|)^(-(1-b) / (2 (1-a)))
             * exp(-a (1-b) / 2 * dmu^T (a S' + (1-a) S)^-1 dmu) - 1) / (b - 1)
    """
    a, b = order.alpha, order.beta
    if a == 1.0:
        kl = kl_divergence_gaussian(p, q)
        value = kl if order.regime == SHANNON else math.expm1((b - 1.0) * kl) / (b - 1.0)
        return DivergenceValue(value, order, 0.0)
    pair = _gaussian_pair(p, q, a)
    j = 0.5 * (pair.log_ratio + a * (1.0 - a) * pair.mahalanobis)
    if order.regime == RENYI:
        value = pair.log_ratio / (2.0 * (1.0 - a)) + 0.5 * a * pair.mahalanobis
    elif order.regime == TSALLIS:
        value = math.expm1(-0.5 * pair.log_ratio - 0.5 * a * (1.0 - a) * pair.mahalanobis) / (a - 1.0)
    else:
        exponent = -(1.0 - b) / (2.0 * (1.0 - a)) * pair.log_ratio - 0.5 * a * (1.0 - b) * pair.mahalanobis
        value = math.expm1(exponent) / (b - 1.0)
    return DivergenceValue(value, order, j)
