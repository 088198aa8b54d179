import numpy as np
import pytest
from numpy.testing import assert_allclose

from krylovlp.errors import SingularMatrixError
from krylovlp.sparse import SparseMatrix, spmv, spmv_transpose, triangular_solve

from conftest import random_sparse


def identity(n):
    return SparseMatrix(n, n, np.arange(n + 1), np.arange(n), np.ones(n))


class TestSpmv:
    def test_identity(self):
        a = identity(3)
        assert_allclose(spmv(a, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_zero_matrix(self):
        a = SparseMatrix(3, 3, np.zeros(4, dtype=int), [], [])
        assert_allclose(spmv(a, np.array([4.0, 5.0, 6.0])), np.zeros(3))

    def test_against_dense_product(self, rng):
        a, dense = random_sparse(rng, 10, 7)
        x = rng.standard_normal(7)
        got = spmv(a, x)
        want = dense @ x
        assert np.max(np.abs(got - want)) <= 1e-14 * max(1.0, np.max(np.abs(want)))

    def test_dimension_mismatch(self):
        a = identity(3)
        with pytest.raises(ValueError, match="dimension mismatch"):
            spmv(a, np.ones(4))


class TestSpmvTranspose:
    def test_identity(self):
        a = identity(3)
        assert_allclose(spmv_transpose(a, np.array([4.0, 5.0, 6.0])), [4.0, 5.0, 6.0])

    def test_hand_2x1(self):
        a = SparseMatrix.from_dense(np.array([[1.0], [2.0]]))
        assert_allclose(spmv_transpose(a, np.array([3.0, 4.0])), [11.0])

    def test_against_explicit_transpose(self, rng):
        a, dense = random_sparse(rng, 12, 5)
        at = SparseMatrix.from_dense(dense.T)
        y = rng.standard_normal(12)
        got = spmv_transpose(a, y)
        want = spmv(at, y)
        assert np.max(np.abs(got - want)) <= 1e-14 * max(1.0, np.max(np.abs(want)))

    def test_dimension_mismatch(self):
        a = identity(3)
        with pytest.raises(ValueError, match="dimension mismatch"):
            spmv_transpose(a, np.ones(2))


def test_adjoint_identity(rng):
    # <Ax, y> == <x, A^T y> within 1e-12 relative on random instances
    for _ in range(20):
        m, n = rng.integers(2, 30, size=2)
        a, _ = random_sparse(rng, m, n)
        x = rng.standard_normal(n)
        y = rng.standard_normal(m)
        lhs = np.dot(spmv(a, x), y)
        rhs = np.dot(x, spmv_transpose(a, y))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


class TestTriangularSolve:
    def test_identity(self, rng):
        l = identity(4)
        b = rng.standard_normal(4)
        assert_allclose(triangular_solve(l, b), b)
        assert_allclose(triangular_solve(l, b, transposed=True), b)

    def test_hand_2x2(self):
        l = SparseMatrix.from_dense(np.array([[2.0, 0.0], [1.0, 1.0]]))
        assert_allclose(triangular_solve(l, np.array([2.0, 2.0])), [1.0, 1.0])

    def test_random_residual(self, rng):
        n = 20
        dense = np.tril(rng.standard_normal((n, n)))
        dense[np.diag_indices(n)] = rng.uniform(1.0, 2.0, n) * np.sign(
            rng.standard_normal(n)
        )
        l = SparseMatrix.from_dense(dense)
        b = rng.standard_normal(n)
        x = triangular_solve(l, b)
        res = np.max(np.abs(dense @ x - b)) / np.max(np.abs(b))
        assert res <= 1e-12
        xt = triangular_solve(l, b, transposed=True)
        rest = np.max(np.abs(dense.T @ xt - b)) / np.max(np.abs(b))
        assert rest <= 1e-12

    def test_zero_diagonal_reports_index(self):
        dense = np.array([[1.0, 0.0], [3.0, 0.0]])
        l = SparseMatrix.from_dense(dense)
        with pytest.raises(SingularMatrixError) as exc:
            triangular_solve(l, np.ones(2))
        assert exc.value.index == 1

    def test_rejects_upper_entries(self):
        u = SparseMatrix.from_dense(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ValueError, match="not lower-triangular"):
            triangular_solve(u, np.ones(2))


class TestConstruction:
    def test_from_coo_sums_duplicates(self):
        a = SparseMatrix.from_coo(2, 2, [0, 0, 1], [1, 1, 0], [1.0, 2.0, 5.0])
        assert a.nnz == 2
        assert_allclose(a.to_dense(), [[0.0, 3.0], [5.0, 0.0]])

    def test_invariant_validation(self):
        with pytest.raises(ValueError, match="column index out of range"):
            SparseMatrix(2, 2, [0, 1, 2], [0, 5], [1.0, 1.0])
        with pytest.raises(ValueError, match="not strictly increasing"):
            SparseMatrix(1, 3, [0, 2], [2, 1], [1.0, 1.0])
        with pytest.raises(ValueError, match="row_offsets"):
            SparseMatrix(2, 2, [0, 2], [0, 1], [1.0, 1.0])

    def test_transpose_roundtrip(self, rng):
        a, dense = random_sparse(rng, 6, 9)
        assert_allclose(a.transpose().to_dense(), dense.T)

    def test_diagonal(self):
        dense = np.array([[2.0, 1.0], [0.0, 0.0], [1.0, 1.0]])
        a = SparseMatrix.from_dense(dense)
        assert_allclose(a.diagonal(), [2.0, 0.0])
