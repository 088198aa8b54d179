"""Sparse (CSR) matrices, abstract operators and triangular solves.

All values are float64; indices are int64.  Matrices are immutable after
construction, so they can be shared freely between concurrent solver runs.
"""

import numpy as np

from . import _accel
from .errors import SingularMatrixError


class LinearOperator:
    """Minimal operator interface: shape plus forward/adjoint products.

    ``recover`` maps coefficients from the operator's domain back to the
    original variables; it is the identity except for preconditioned
    compositions.
    """

    nrows: int
    ncols: int

    def matvec(self, x):
        raise NotImplementedError

    def rmatvec(self, y):
        raise NotImplementedError

    def recover(self, x):
        return x

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def is_square(self):
        return self.nrows == self.ncols


class SparseMatrix(LinearOperator):
    """Compressed-row sparse matrix.

    Column indices are strictly increasing inside each row; duplicate
    entries must be merged before construction (``from_coo`` sums them).
    """

    def __init__(self, nrows, ncols, row_offsets, col_indices, values, validate=True):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.row_offsets = np.ascontiguousarray(row_offsets, dtype=np.int64)
        self.col_indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        if validate:
            self._validate()

    def _validate(self):
        if self.row_offsets.shape[0] != self.nrows + 1:
            raise ValueError("row_offsets must have nrows+1 entries")
        if self.row_offsets[0] != 0:
            raise ValueError("row_offsets must start at 0")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        if self.row_offsets[-1] != self.values.shape[0]:
            raise ValueError("row_offsets must end at nnz")
        if self.col_indices.shape[0] != self.values.shape[0]:
            raise ValueError("col_indices and values must have equal length")
        if self.values.shape[0]:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.ncols:
                raise ValueError("column index out of range")
        for i in range(self.nrows):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            if hi - lo > 1 and np.any(np.diff(self.col_indices[lo:hi]) <= 0):
                raise ValueError(f"columns in row {i} not strictly increasing")

    @property
    def nnz(self):
        return int(self.values.shape[0])

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals):
        """Build from coordinate triplets; duplicates are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size:
            if rows.min() < 0 or rows.max() >= nrows:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= ncols:
                raise ValueError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            keep = np.empty(rows.shape[0], dtype=bool)
            keep[0] = True
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(keep) - 1
            summed = np.bincount(group, weights=vals)
            rows, cols, vals = rows[keep], cols[keep], summed
        offsets = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(offsets, rows + 1, 1)
        np.cumsum(offsets, out=offsets)
        return cls(nrows, ncols, offsets, cols, vals, validate=False)

    @classmethod
    def from_dense(cls, arr, keep_zeros=False):
        arr = np.asarray(arr, dtype=np.float64)
        nrows, ncols = arr.shape
        if keep_zeros:
            rows, cols = np.indices(arr.shape)
            rows, cols = rows.ravel(), cols.ravel()
        else:
            rows, cols = np.nonzero(arr)
        return cls.from_coo(nrows, ncols, rows, cols, arr[rows, cols])

    def to_dense(self):
        out = np.zeros((self.nrows, self.ncols))
        for i in range(self.nrows):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            out[i, self.col_indices[lo:hi]] = self.values[lo:hi]
        return out

    def transpose(self):
        rows = np.repeat(np.arange(self.nrows), np.diff(self.row_offsets))
        return SparseMatrix.from_coo(
            self.ncols, self.nrows, self.col_indices, rows, self.values
        )

    def diagonal(self):
        d = np.zeros(min(self.nrows, self.ncols))
        for i in range(d.shape[0]):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            pos = np.searchsorted(self.col_indices[lo:hi], i)
            if pos < hi - lo and self.col_indices[lo + pos] == i:
                d[i] = self.values[lo + pos]
        return d

    def matvec(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape[0] != self.ncols:
            raise ValueError(f"dimension mismatch: x has {x.shape[0]}, expected {self.ncols}")
        out = np.empty(self.nrows)
        _accel.csr_matvec(self.row_offsets, self.col_indices, self.values, x, out)
        return out

    def rmatvec(self, y):
        y = np.ascontiguousarray(y, dtype=np.float64)
        if y.shape[0] != self.nrows:
            raise ValueError(f"dimension mismatch: y has {y.shape[0]}, expected {self.nrows}")
        out = np.empty(self.ncols)
        _accel.csr_matvec_t(self.row_offsets, self.col_indices, self.values, y, out)
        return out


def spmv(a, x):
    """Sparse product A @ x."""
    return a.matvec(x)


def spmv_transpose(a, y):
    """Sparse product A.T @ y."""
    return a.rmatvec(y)


def triangular_solve(l, b, transposed=False):
    """Solve L x = b (or L.T x = b) for lower-triangular sparse L.

    Raises SingularMatrixError with the row index when a diagonal entry is
    missing or zero.
    """
    if l.nrows != l.ncols:
        raise ValueError("triangular solve requires a square matrix")
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.shape[0] != l.nrows:
        raise ValueError(f"dimension mismatch: b has {b.shape[0]}, expected {l.nrows}")
    diag_pos = _lower_diag_positions(l)
    out = np.empty(l.nrows)
    _accel.csr_solve_lower(
        l.row_offsets, l.col_indices, l.values, diag_pos, b, out, int(transposed)
    )
    return out


def _lower_diag_positions(l):
    """Diagonal data positions of a lower-triangular CSR matrix.

    Verifies the lower-triangular structure (sorted columns make the
    diagonal the last entry of each row) and nonzero diagonal.
    """
    n = l.nrows
    diag_pos = np.empty(n, dtype=np.int64)
    for i in range(n):
        lo, hi = l.row_offsets[i], l.row_offsets[i + 1]
        if hi == lo or l.col_indices[hi - 1] != i:
            if hi > lo and l.col_indices[hi - 1] > i:
                raise ValueError(f"matrix is not lower-triangular at row {i}")
            raise SingularMatrixError(i, f"zero diagonal entry at row {i}")
        if l.values[hi - 1] == 0.0:
            raise SingularMatrixError(i, f"zero diagonal entry at row {i}")
        diag_pos[i] = hi - 1
    return diag_pos


class DenseOperator(LinearOperator):
    """Dense ndarray wrapped as an operator (used by tests and the oracle)."""

    def __init__(self, arr):
        self.array = np.ascontiguousarray(arr, dtype=np.float64)
        self.nrows, self.ncols = self.array.shape

    def matvec(self, x):
        return self.array @ x

    def rmatvec(self, y):
        return self.array.T @ y
