"""Natural parameters and the log-normalizer machinery.

A member of an exponential family has density

    p(x | theta) = exp(<theta, t(x)> - F(theta) + k(x))

and everything else in the package (entropies, divergences, fitting) is
written in terms of ``F``, its gradient ``eta = grad F(theta) = E[t(X)]`` and
two operations on parameters: positive scaling and convex mixing.

Composite parameters ``theta = (v, M)`` use the inner product
``v.v' + tr(M^T M')``, i.e. the elementwise dot product of the matrix parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import families
from .errors import FamilyMismatch, InvalidOrder
from .linalg_spd import symmetrize


def _frozen(a: Optional[NDArray]) -> Optional[NDArray]:
    if a is not None:
        a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FamilySpec:
    id: str
    dim: int
    order: int
    has_carrier: bool
    theta_is_cone: bool


def family_spec(family: str, dim: int = 1) -> FamilySpec:
    k = families.kernel(family)
    if family != families.GAUSSIAN and dim != 1:
        raise ValueError(f"{family} is a univariate family")
    return FamilySpec(family, dim, k.order(dim), k.has_carrier, k.theta_is_cone)


@dataclass(frozen=True, eq=False)
class NaturalParam:
    """A validated natural parameter ``theta`` of one family.

    ``vec`` is the vector part (a length-1 array for the scalar families) and
    ``mat`` the symmetric matrix part, present only for the Gaussian.
    Construction raises :class:`~smexpfam.errors.OutOfDomain` when theta is
    outside the natural parameter space.
    """

    family: str
    vec: NDArray[np.float64]
    mat: Optional[NDArray[np.float64]] = None
    _aux: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        kern = families.kernel(self.family)
        vec = np.atleast_1d(np.asarray(self.vec, dtype=np.float64)).copy()
        if vec.ndim != 1:
            raise ValueError(f"vector part must be 1-D, got shape {vec.shape}")
        mat = None if self.mat is None else symmetrize(self.mat)
        aux = kern.validate(vec, mat)
        object.__setattr__(self, "vec", _frozen(vec))
        object.__setattr__(self, "mat", _frozen(mat))
        object.__setattr__(self, "_aux", aux)

    @property
    def dim(self) -> int:
        """Sample-space dimension."""
        return self.vec.shape[0] if self.family == families.GAUSSIAN else 1

    @property
    def spec(self) -> FamilySpec:
        return family_spec(self.family, self.dim)

    @property
    def kernel(self):
        return families.kernel(self.family)

    def same_shape(self, other: NaturalParam) -> bool:
        return self.family == other.family and self.vec.shape == other.vec.shape

    def allclose(self, other: NaturalParam, rtol=1e-12, atol=0.0) -> bool:
        if not self.same_shape(other):
            return False
        ok = np.allclose(self.vec, other.vec, rtol=rtol, atol=atol)
        if self.mat is not None:
            ok = ok and np.allclose(self.mat, other.mat, rtol=rtol, atol=atol)
        return bool(ok)

    def coordinates(self) -> NDArray[np.float64]:
        """Flat array of the independent coordinates (upper triangle of M)."""
        if self.mat is None:
            return self.vec.copy()
        iu = np.triu_indices(self.dim)
        return np.concatenate([self.vec, self.mat[iu]])


@dataclass(frozen=True, eq=False)
class ExpectationParam:
    """Moment coordinates ``eta = E[t(X)]``; same shape as a NaturalParam."""

    family: str
    vec: NDArray[np.float64]
    mat: Optional[NDArray[np.float64]] = None

    def __post_init__(self):
        object.__setattr__(self, "vec", _frozen(np.atleast_1d(np.array(self.vec, dtype=np.float64))))
        if self.mat is not None:
            object.__setattr__(self, "mat", _frozen(np.array(self.mat, dtype=np.float64)))


def inner(a, b) -> float:
    """``<(v, M), (v', M')> = v.v' + sum(M * M')``."""
    out = float(np.dot(a.vec, b.vec))
    if a.mat is not None and b.mat is not None:
        out += float(np.sum(a.mat * b.mat))
    return out


def log_normalizer(theta: NaturalParam) -> float:
    return theta.kernel.log_normalizer(theta.vec, theta.mat, theta._aux)


def grad_log_normalizer(theta: NaturalParam) -> ExpectationParam:
    """``eta = grad F(theta)``, the mean of the sufficient statistic."""
    vec, mat = theta.kernel.grad(theta.vec, theta.mat, theta._aux)
    return ExpectationParam(theta.family, vec, mat)


def scale_natural(theta: NaturalParam, a: float) -> NaturalParam:
    """Return ``a * theta``; raises InvalidOrder for ``a <= 0``."""
    if not a > 0:
        raise InvalidOrder(f"scaling factor must be positive, got {a}")
    mat = None if theta.mat is None else a * theta.mat
    return NaturalParam(theta.family, a * theta.vec, mat)


def mix_natural(theta: NaturalParam, theta2: NaturalParam, a: float) -> NaturalParam:
    """Return ``a * theta + (1 - a) * theta2``.

    Inside (0, 1) the result is in the parameter space by convexity;
    outside it membership is checked and OutOfDomain raised on failure.
    """
    check_same_family(theta, theta2)
    b = 1.0 - a
    vec = a * theta.vec + b * theta2.vec
    mat = None if theta.mat is None else a * theta.mat + b * theta2.mat
    return NaturalParam(theta.family, vec, mat)


def check_same_family(theta: NaturalParam, theta2: NaturalParam) -> None:
    if not theta.same_shape(theta2):
        raise FamilyMismatch(
            f"parameters differ: {theta.family}(dim {theta.dim}) vs "
            f"{theta2.family}(dim {theta2.dim})"
        )


def sample_points(family: str, dim: int, x: ArrayLike) -> NDArray[np.float64]:
    """Validate and normalize a batch of sample points (raises InvalidSample)."""
    return families.kernel(family).points(x, dim)


def log_density_batch(theta: NaturalParam, pts: NDArray[np.float64]) -> NDArray[np.float64]:
    """``log p(x | theta)`` for a validated batch from :func:`sample_points`."""
    kern = theta.kernel
    return kern.inner_t(theta.vec, theta.mat, pts) - log_normalizer(theta) + kern.log_carrier(pts)


def log_density(theta: NaturalParam, x) -> float:
    """``<theta, t(x)> - F(theta) + k(x)`` at a single sample point."""
    pts = sample_points(theta.family, theta.dim, x)
    if pts.shape[0] != 1:
        raise ValueError("log_density takes a single point; use log_density_batch")
    return float(log_density_batch(theta, pts)[0])


def sufficient_stat(family: FamilySpec, x) -> ExpectationParam:
    """``t(x)``: ``(x, x x^T)`` for the Gaussian, ``x`` for the scalar families."""
    pts = sample_points(family.id, family.dim, x)
    if pts.shape[0] != 1:
        raise ValueError("sufficient_stat takes a single point")
    vec, mat = families.kernel(family.id).suff_stat(pts[0])
    return ExpectationParam(family.id, vec, mat)


def mean_sufficient_stat(family: FamilySpec, pts: NDArray[np.float64]) -> ExpectationParam:
    """Empirical mean of ``t(x)`` over a validated batch."""
    if family.id == families.GAUSSIAN:
        n = pts.shape[0]
        return ExpectationParam(family.id, pts.mean(axis=0), pts.T @ pts / n)
    return ExpectationParam(family.id, [pts.mean()], None)
