"""Dense linear algebra for small symmetric positive-definite matrices.

Everything goes through a lower Cholesky factor computed once at
construction.  LAPACK (via numpy/scipy) does the factorization and the
triangular solves; this module adds the symmetrization, the relative
pivot tolerance and the log-domain determinant.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

#: Relative pivot tolerance: a pivot <= PD_RTOL * max|diag| is treated as zero.
PD_RTOL = 1e-13


def symmetrize(a: ArrayLike) -> NDArray[np.float64]:
    """Return ``(a + a.T) / 2`` as a float array, checking squareness."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def _readonly(a: NDArray) -> NDArray:
    a.setflags(write=False)
    return a


class SpdMatrix:
    """Symmetric positive-definite matrix with its Cholesky factor.

    Instances are immutable; ``entries`` and ``chol`` are read-only arrays.
    Use :func:`cholesky` to build one.
    """

    __slots__ = ("entries", "chol")

    def __init__(self, entries: NDArray[np.float64], chol: NDArray[np.float64]):
        self.entries = _readonly(entries)
        self.chol = _readonly(chol)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"SpdMatrix({self.entries.tolist()!r})"


def cholesky(a: ArrayLike) -> SpdMatrix:
    """Factor a (symmetrized) square matrix as ``L @ L.T``.

    Raises
    ------
    NotPositiveDefinite
        If any squared pivot ``L[i, i]**2`` is at or below
        ``PD_RTOL * max|diag(a)|`` or LAPACK rejects the matrix.
    """
    sym = symmetrize(a)
    if not np.all(np.isfinite(sym)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    scale = float(np.max(np.abs(np.diag(sym))))
    if scale <= 0.0:
        raise NotPositiveDefinite("matrix has a zero diagonal")
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(chol) ** 2
    if np.any(pivots <= PD_RTOL * scale):
        raise NotPositiveDefinite(
            f"smallest pivot {pivots.min():.3e} below tolerance {PD_RTOL * scale:.3e}"
        )
    return SpdMatrix(sym, chol)


def _vector(m: SpdMatrix, b: ArrayLike) -> NDArray[np.float64]:
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if b.shape != (m.dim,):
        raise DimensionMismatch(f"vector of shape {b.shape} vs matrix dim {m.dim}")
    return b


def log_det(m: SpdMatrix) -> float:
    """``log |m|`` computed as ``2 * sum(log diag(L))``."""
    return 2.0 * float(np.sum(np.log(np.diag(m.chol))))


def solve(m: SpdMatrix, b: ArrayLike) -> NDArray[np.float64]:
    """Solve ``m @ x = b`` by forward and back substitution on the factor."""
    b = _vector(m, b)
    y = solve_triangular(m.chol, b, lower=True)
    return solve_triangular(m.chol.T, y, lower=False)


def quad_form(m: SpdMatrix, x: ArrayLike) -> float:
    """``x.T @ inv(m) @ x`` as the squared norm of ``inv(L) @ x`` (never negative)."""
    x = _vector(m, x)
    y = solve_triangular(m.chol, x, lower=True)
    return float(y @ y)


def inverse(m: SpdMatrix) -> NDArray[np.float64]:
    """Symmetric inverse of ``m``."""
    linv = solve_triangular(m.chol, np.eye(m.dim), lower=True)
    return symmetrize(linv.T @ linv)


def reconstruct(m: SpdMatrix) -> NDArray[np.float64]:
    return m.chol @ m.chol.T
