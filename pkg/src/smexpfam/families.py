"""Concrete exponential families and their source-coordinate conversions.

Three families are supported, and the set is closed on purpose:

=============  =====================  ==========  ==============  ============
family         natural parameter      t(x)        k(x)            F(theta)
=============  =====================  ==========  ==============  ============
gaussian       (S^-1 mu, -S^-1 / 2)   (x, x x^T)  0               see below
exponential    -rate                  x           0               -log(-theta)
poisson        log(rate)              x           -log(x!)        exp(theta)
=============  =====================  ==========  ==============  ============

The kernels below work on raw arrays ``(vec, mat)``; :mod:`smexpfam.expfam`
wraps them behind :class:`~smexpfam.expfam.NaturalParam`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from . import linalg_spd
from .errors import DimensionMismatch, InvalidSample, NotPositiveDefinite, OutOfDomain
from .linalg_spd import SpdMatrix

if TYPE_CHECKING:
    from .expfam import NaturalParam

LOG_2PI = math.log(2.0 * math.pi)

GAUSSIAN = "gaussian"
EXPONENTIAL = "exponential"
POISSON = "poisson"
FAMILY_IDS = (GAUSSIAN, EXPONENTIAL, POISSON)


# --------------------------------------------------------------------------
# source parameterizations
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianSource:
    """Multivariate normal N(mu, sigma) in its usual coordinates."""

    mu: NDArray[np.float64]
    sigma: SpdMatrix

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=np.float64)).copy()
        if mu.ndim != 1 or mu.shape[0] != self.sigma.dim:
            raise DimensionMismatch(
                f"mean of shape {mu.shape} vs covariance dim {self.sigma.dim}"
            )
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_arrays(cls, mu: ArrayLike, sigma: ArrayLike) -> GaussianSource:
        try:
            return cls(mu, linalg_spd.cholesky(sigma))
        except NotPositiveDefinite as exc:
            raise OutOfDomain(f"covariance is not positive definite: {exc}") from None

    @property
    def dim(self) -> int:
        return self.sigma.dim


@dataclass(frozen=True)
class ExponentialSource:
    """Exponential distribution with density ``rate * exp(-rate * x)`` on x >= 0."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise OutOfDomain(f"rate must be positive and finite, got {self.rate}")


@dataclass(frozen=True)
class PoissonSource:
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise OutOfDomain(f"rate must be positive and finite, got {self.rate}")


# --------------------------------------------------------------------------
# per-family kernels on raw arrays
# --------------------------------------------------------------------------


class _Gaussian:
    id = GAUSSIAN
    has_carrier = False
    theta_is_cone = True

    @staticmethod
    def order(dim: int) -> int:
        return dim + dim * (dim + 1) // 2

    @staticmethod
    def validate(vec, mat):
        """Return the precision ``-2M`` as an SpdMatrix or raise OutOfDomain."""
        if mat is None:
            raise OutOfDomain("gaussian natural parameter needs a matrix part")
        d = vec.shape[0]
        if mat.shape != (d, d):
            raise DimensionMismatch(f"vector part dim {d} vs matrix part {mat.shape}")
        try:
            return linalg_spd.cholesky(-2.0 * mat)
        except NotPositiveDefinite as exc:
            raise OutOfDomain(f"matrix part is not negative definite: {exc}") from None

    @staticmethod
    def log_normalizer(vec, mat, precision: SpdMatrix) -> float:
        # F(v, M) = d/2 log 2pi - 1/2 log|-2M| - 1/4 v^T M^-1 v, with -2M = precision
        d = vec.shape[0]
        return (
            0.5 * d * LOG_2PI
            - 0.5 * linalg_spd.log_det(precision)
            + 0.5 * linalg_spd.quad_form(precision, vec)
        )

    @staticmethod
    def grad(vec, mat, precision: SpdMatrix):
        sigma = linalg_spd.inverse(precision)
        mu = linalg_spd.solve(precision, vec)
        return mu, sigma + np.outer(mu, mu)

    @staticmethod
    def points(x, dim: int) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim <= 1 and dim == 1:
            x = x.reshape(-1, 1)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.ndim != 2 or x.shape[1] != dim:
            raise InvalidSample(f"expected points of dimension {dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidSample("non-finite sample point")
        return x

    @staticmethod
    def suff_stat(x):
        return x.copy(), np.outer(x, x)

    @staticmethod
    def inner_t(vec, mat, pts) -> NDArray[np.float64]:
        return pts @ vec + np.einsum("ni,ij,nj->n", pts, mat, pts)

    @staticmethod
    def log_carrier(pts) -> NDArray[np.float64]:
        return np.zeros(pts.shape[0])


class _Exponential:
    id = EXPONENTIAL
    has_carrier = False
    theta_is_cone = True

    @staticmethod
    def order(dim: int) -> int:
        return 1

    @staticmethod
    def validate(vec, mat):
        if mat is not None or vec.shape != (1,):
            raise DimensionMismatch("exponential natural parameter is a single scalar")
        if not vec[0] < 0:
            raise OutOfDomain(f"exponential natural parameter must be < 0, got {vec[0]}")
        return None

    @staticmethod
    def log_normalizer(vec, mat, aux) -> float:
        return exponential_log_normalizer(float(vec[0]))

    @staticmethod
    def grad(vec, mat, aux):
        return np.array([-1.0 / vec[0]]), None

    @staticmethod
    def points(x, dim: int) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(x)) or np.any(x < 0):
            raise InvalidSample("exponential samples must be finite and nonnegative")
        return x

    @staticmethod
    def suff_stat(x):
        return np.array([x]), None

    @staticmethod
    def inner_t(vec, mat, pts):
        return vec[0] * pts

    @staticmethod
    def log_carrier(pts):
        return np.zeros(pts.shape[0])


class _Poisson:
    id = POISSON
    has_carrier = True
    theta_is_cone = True  # Theta is the whole real line

    @staticmethod
    def order(dim: int) -> int:
        return 1

    @staticmethod
    def validate(vec, mat):
        if mat is not None or vec.shape != (1,):
            raise DimensionMismatch("poisson natural parameter is a single scalar")
        if not math.isfinite(vec[0]):
            raise OutOfDomain("poisson natural parameter must be finite")
        return None

    @staticmethod
    def log_normalizer(vec, mat, aux) -> float:
        return math.exp(vec[0])

    @staticmethod
    def grad(vec, mat, aux):
        return np.array([math.exp(vec[0])]), None

    @staticmethod
    def points(x, dim: int) -> NDArray[np.float64]:
        x = np.asarray(x).reshape(-1)
        xf = x.astype(np.float64)
        if not np.all(np.isfinite(xf)) or np.any(xf < 0) or np.any(xf != np.floor(xf)):
            raise InvalidSample("poisson samples must be nonnegative integers")
        return xf

    @staticmethod
    def suff_stat(x):
        return np.array([x]), None

    @staticmethod
    def inner_t(vec, mat, pts):
        return vec[0] * pts

    @staticmethod
    def log_carrier(pts):
        return -gammaln(pts + 1.0)


KERNELS = {k.id: k for k in (_Gaussian, _Exponential, _Poisson)}


def kernel(family: str):
    try:
        return KERNELS[family]
    except KeyError:
        raise ValueError(
            f"unknown family {family!r}; expected one of {', '.join(FAMILY_IDS)}"
        ) from None


# --------------------------------------------------------------------------
# named operations
# --------------------------------------------------------------------------


def exponential_log_normalizer(theta: float) -> float:
    """``F(theta) = -log(-theta)`` for the exponential distribution."""
    if not theta < 0:
        raise OutOfDomain(f"exponential natural parameter must be < 0, got {theta}")
    return -math.log(-theta)


def poisson_carrier(x) -> float:
    """Carrier measure ``-log(x!)`` via log-gamma (no factorial overflow)."""
    try:
        xi = int(x)
    except (TypeError, ValueError):
        raise InvalidSample(f"poisson sample must be an integer, got {x!r}") from None
    if xi != x or xi < 0:
        raise InvalidSample(f"poisson sample must be a nonnegative integer, got {x!r}")
    return -math.lgamma(xi + 1.0)


def gaussian_log_normalizer_source(src: GaussianSource) -> float:
    """``F(mu, Sigma) = 1/2 log((2 pi)^d |Sigma|) + 1/2 mu^T Sigma^-1 mu``."""
    return 0.5 * (
        src.dim * LOG_2PI
        + linalg_spd.log_det(src.sigma)
        + linalg_spd.quad_form(src.sigma, src.mu)
    )


def gaussian_to_natural(src: GaussianSource) -> NaturalParam:
    from .expfam import NaturalParam

    v = linalg_spd.solve(src.sigma, src.mu)
    m = -0.5 * linalg_spd.inverse(src.sigma)
    return NaturalParam(GAUSSIAN, v, m)


def gaussian_from_natural(theta: NaturalParam) -> GaussianSource:
    """Recover ``Sigma = -1/2 M^-1`` and ``mu = Sigma v``."""
    if theta.family != GAUSSIAN:
        raise OutOfDomain(f"expected a gaussian parameter, got {theta.family}")
    precision = _Gaussian.validate(theta.vec, theta.mat)
    sigma = linalg_spd.cholesky(linalg_spd.inverse(precision))
    return GaussianSource(linalg_spd.solve(precision, theta.vec), sigma)


def exponential_to_natural(src: ExponentialSource) -> NaturalParam:
    from .expfam import NaturalParam

    return NaturalParam(EXPONENTIAL, [-src.rate])


def poisson_to_natural(src: PoissonSource) -> NaturalParam:
    from .expfam import NaturalParam

    return NaturalParam(POISSON, [math.log(src.rate)])


def to_natural(src) -> NaturalParam:
    """Convert any source parameterization to its natural parameter."""
    if isinstance(src, GaussianSource):
        return gaussian_to_natural(src)
    if isinstance(src, ExponentialSource):
        return exponential_to_natural(src)
    if isinstance(src, PoissonSource):
        return poisson_to_natural(src)
    raise TypeError(f"not a source parameterization: {type(src).__name__}")


def from_natural(theta: NaturalParam):
    """Inverse of :func:`to_natural`."""
    if theta.family == GAUSSIAN:
        return gaussian_from_natural(theta)
    if theta.family == EXPONENTIAL:
        return ExponentialSource(-float(theta.vec[0]))
    return PoissonSource(math.exp(float(theta.vec[0])))
