import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smexpfam import linalg_spd
from smexpfam.errors import DimensionMismatch, NotPositiveDefinite
from smexpfam.linalg_spd import cholesky, inverse, log_det, quad_form, reconstruct, solve


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(3)).chol, np.eye(3))

    def test_diagonal_square_root(self):
        np.testing.assert_array_equal(cholesky([[4.0, 0.0], [0.0, 4.0]]).chol, 2 * np.eye(2))

    def test_indefinite_rejected(self):
        # eigenvalues 3 and -1
        with pytest.raises(NotPositiveDefinite):
            cholesky([[1.0, 2.0], [2.0, 1.0]])

    def test_near_singular_rejected_by_relative_pivot(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky([[1.0, 1.0], [1.0, 1.0 + 1e-15]])

    def test_not_square(self):
        with pytest.raises(DimensionMismatch):
            cholesky(np.ones((2, 3)))

    def test_symmetrizes_input(self):
        m = cholesky([[2.0, 1.0 + 1e-9], [1.0 - 1e-9, 2.0]])
        assert m.entries[0, 1] == m.entries[1, 0] == 1.0

    def test_immutable(self):
        m = cholesky(np.eye(2))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 3.0

    def test_reconstruction(self, rng):
        for d in (1, 3, 8, 30):
            a = rng.normal(size=(d, d))
            spd = a @ a.T + d * np.eye(d)
            m = cholesky(spd)
            err = np.max(np.abs(reconstruct(m) - m.entries))
            assert err <= 1e-12 * np.max(np.abs(spd))


class TestLogDet:
    def test_identity(self):
        assert log_det(cholesky(np.eye(4))) == 0.0

    def test_scaled_identity(self):
        assert log_det(cholesky(4 * np.eye(4))) == pytest.approx(math.log(256), abs=1e-12)
        assert math.log(256) == pytest.approx(5.545177, abs=1e-6)

    def test_unit_determinant(self):
        assert log_det(cholesky(np.diag([2.0, 0.5]))) == pytest.approx(0.0, abs=1e-15)

    def test_no_overflow(self):
        assert log_det(cholesky(1e200 * np.eye(10))) == pytest.approx(2000 * math.log(10))

    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_scaling_identity(self, rng, c):
        for d in (1, 2, 4, 7):
            a = rng.normal(size=(d, d))
            spd = a @ a.T + d * np.eye(d)
            assert log_det(cholesky(c * spd)) == pytest.approx(d * math.log(c) + log_det(cholesky(spd)), abs=1e-10)


class TestSolve:
    def test_identity(self):
        np.testing.assert_array_equal(solve(cholesky(np.eye(2)), [3.0, -1.0]), [3.0, -1.0])

    def test_scalar(self):
        np.testing.assert_allclose(solve(cholesky(4 * np.eye(2)), [4.0, 8.0]), [1.0, 2.0], rtol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(solve(cholesky(np.diag([2.0, 5.0])), [2.0, 10.0]), [1.0, 2.0], rtol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve(cholesky(np.eye(2)), [1.0, 2.0, 3.0])

    def test_residual(self, rng):
        for d in (1, 2, 5, 20):
            a = rng.normal(size=(d, d))
            m = cholesky(a @ a.T + d * np.eye(d))
            b = rng.normal(size=d)
            x = solve(m, b)
            assert np.max(np.abs(m.entries @ x - b)) <= 1e-9 * np.max(np.abs(b))

    def test_ill_conditioned(self):
        m = cholesky(np.diag([1.0, 1e-8]))
        b = np.array([1.0, 1.0])
        x = solve(m, b)
        assert np.max(np.abs(m.entries @ x - b)) <= 1e-10 * np.max(np.abs(b))

    def test_inverse(self, rng):
        a = rng.normal(size=(4, 4))
        m = cholesky(a @ a.T + np.eye(4))
        np.testing.assert_allclose(inverse(m) @ m.entries, np.eye(4), atol=1e-10)


class TestQuadForm:
    def test_norm(self):
        assert quad_form(cholesky(np.eye(3)), [1.0, 2.0, 2.0]) == pytest.approx(9.0, rel=1e-15)

    def test_scalar(self):
        assert quad_form(cholesky([[4.0]]), [2.0]) == pytest.approx(1.0, rel=1e-15)

    def test_diagonal(self):
        assert quad_form(cholesky(np.diag([2.0, 8.0])), [2.0, 4.0]) == pytest.approx(4.0, rel=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            quad_form(cholesky(np.eye(3)), [1.0])

    def test_matches_solve(self, rng):
        for d in (1, 3, 6):
            a = rng.normal(size=(d, d))
            m = cholesky(a @ a.T + d * np.eye(d))
            x = rng.normal(size=d)
            assert quad_form(m, x) == pytest.approx(x @ solve(m, x), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    d=st.integers(1, 6),
    seed=st.integers(0, 2**32 - 1),
)
def test_quad_form_nonnegative_and_solve_roundtrip(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d))
    m = linalg_spd.cholesky(a @ a.T + d * np.eye(d))
    b = rng.normal(size=d)
    assert linalg_spd.quad_form(m, b) >= 0.0
    np.testing.assert_allclose(m.entries @ linalg_spd.solve(m, b), b, rtol=1e-9, atol=1e-9 * np.abs(b).max())
