"""Experiment problem generators and the incomplete-Cholesky preconditioner.

Blur operators act on an n-by-n pixel grid flattened row major; the source
image behind every right-hand side is a seeded sum of Gaussian bumps, so
generated problems are reproducible byte for byte.
"""

from dataclasses import dataclass

import numpy as np

from .errors import KrylovlpError
from .sparse import SparseMatrix


@dataclass
class CorruptionSpec:
    """Multiplicative damage to a fraction of right-hand-side entries."""

    fraction: float
    factor: float = 0.999
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("corruption fraction must lie in [0, 1]")


def synthetic_image(grid_n, seed=0, bumps=4):
    """Smooth seeded test image: a sum of 2-D Gaussian bumps in [0,1]^2."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.2, 0.8, size=(bumps, 2))
    widths = rng.uniform(0.05, 0.2, size=bumps)
    amps = rng.uniform(0.5, 1.5, size=bumps)
    coords = (np.arange(grid_n) + 0.5) / grid_n
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    img = np.zeros((grid_n, grid_n))
    for (cx, cy), w, a in zip(centers, widths, amps):
        img += a * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * w * w))
    return img


def gen_blur_square(grid_n, seed=0):
    """Symmetric blur operator on an n x n grid plus a blurred image as rhs.

    Five-point stencil (center 4, axis neighbors 1) scaled by 1/8 with zero
    boundary, so the matrix is symmetric with unit row sums away from the
    border.  Returns (A, b) with b = A @ image.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    n2 = grid_n * grid_n
    rows, cols, vals = [], [], []
    for i in range(grid_n):
        for j in range(grid_n):
            p = i * grid_n + j
            rows.append(p)
            cols.append(p)
            vals.append(0.5)
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ni, nj = i + di, j + dj
                if 0 <= ni < grid_n and 0 <= nj < grid_n:
                    rows.append(p)
                    cols.append(ni * grid_n + nj)
                    vals.append(0.125)
    a = SparseMatrix.from_coo(n2, n2, rows, cols, vals)
    b = a.matvec(synthetic_image(grid_n, seed).ravel())
    return a, b


def gen_deblur_two_stencil(grid_n, corruption=None, seed=0):
    """Overdetermined deblurring operator: two stencil blocks of n^2 rows.

    Rows 0..n^2-1 apply the plain five-point stencil (center 4, neighbors
    1); rows n^2..2n^2-1 the 2x2 all-ones block anchored at each pixel,
    both with zero padding at the boundary.  Returns (A, b, b_clean) where
    b applies the corruption spec to b_clean (identical when None).
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    n2 = grid_n * grid_n
    rows, cols, vals = [], [], []
    for i in range(grid_n):
        for j in range(grid_n):
            p = i * grid_n + j
            rows.append(p)
            cols.append(p)
            vals.append(4.0)
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ni, nj = i + di, j + dj
                if 0 <= ni < grid_n and 0 <= nj < grid_n:
                    rows.append(p)
                    cols.append(ni * grid_n + nj)
                    vals.append(1.0)
            for di, dj in ((0, 0), (0, 1), (1, 0), (1, 1)):
                ni, nj = i + di, j + dj
                if 0 <= ni < grid_n and 0 <= nj < grid_n:
                    rows.append(n2 + p)
                    cols.append(ni * grid_n + nj)
                    vals.append(1.0)
    a = SparseMatrix.from_coo(2 * n2, n2, rows, cols, vals)
    b_clean = a.matvec(synthetic_image(grid_n, seed).ravel())
    b = b_clean.copy()
    if corruption is not None and corruption.fraction > 0.0:
        count = int(round(corruption.fraction * 2 * n2))
        rng = np.random.default_rng(corruption.seed)
        picks = rng.choice(2 * n2, size=count, replace=False)
        b[picks] *= corruption.factor
    return a, b, b_clean


def normal_equations_matrix(a):
    """Explicit sparse A^T A (desk scale)."""
    entries = {}
    for i in range(a.nrows):
        lo, hi = a.row_offsets[i], a.row_offsets[i + 1]
        idx = a.col_indices[lo:hi]
        val = a.values[lo:hi]
        for p in range(idx.shape[0]):
            for q in range(idx.shape[0]):
                key = (idx[p], idx[q])
                entries[key] = entries.get(key, 0.0) + val[p] * val[q]
    rows = np.fromiter((k[0] for k in entries), dtype=np.int64, count=len(entries))
    cols = np.fromiter((k[1] for k in entries), dtype=np.int64, count=len(entries))
    vals = np.fromiter(entries.values(), dtype=np.float64, count=len(entries))
    return SparseMatrix.from_coo(a.ncols, a.ncols, rows, cols, vals)


def build_ic0(a, max_shifts=20):
    """Zero-fill incomplete Cholesky of A^T A.

    Returns lower-triangular L with L L^T matching A^T A on its sparsity
    pattern.  A breakdown (nonpositive pivot) restarts with the diagonal
    shifted by beta * diag(A^T A), beta doubling from 1e-3; the shift used
    is retrievable via build_ic0_with_shift.
    """
    l, _ = build_ic0_with_shift(a, max_shifts=max_shifts)
    return l


def build_ic0_with_shift(a, max_shifts=20):
    m = normal_equations_matrix(a)
    beta = 0.0
    for attempt in range(max_shifts + 1):
        l = _ic0_factor(m, beta)
        if l is not None:
            return l, beta
        beta = 1e-3 * 2.0**attempt
    raise KrylovlpError(f"incomplete Cholesky breakdown persists after {max_shifts} shifts")


def _ic0_factor(m, beta):
    """One IC(0) sweep on the lower pattern of m (+ beta diag shift)."""
    n = m.nrows
    lower_cols = []
    lower_vals = []
    diag = np.zeros(n)
    col_pos = [dict() for _ in range(n)]  # column -> position in row list
    shift = 1.0 + beta
    for i in range(n):
        lo, hi = m.row_offsets[i], m.row_offsets[i + 1]
        cols_i = []
        vals_i = []
        dii = 0.0
        for p in range(lo, hi):
            j = int(m.col_indices[p])
            if j > i:
                continue
            mij = m.values[p] * (shift if j == i else 1.0)
            if j == i:
                dii = mij
                continue
            acc = mij
            row_j_cols = lower_cols[j]
            row_j_vals = lower_vals[j]
            pos_i = col_pos[i]
            for t, jj in enumerate(row_j_cols):
                if jj in pos_i:
                    acc -= vals_i[pos_i[jj]] * row_j_vals[t]
            lij = acc / diag[j]
            pos_i_len = len(cols_i)
            col_pos[i][j] = pos_i_len
            cols_i.append(j)
            vals_i.append(lij)
        dii -= sum(v * v for v in vals_i)
        if dii <= 0.0:
            return None
        diag[i] = np.sqrt(dii)
        lower_cols.append(cols_i)
        lower_vals.append(vals_i)
        # normalize storage for subsequent rows: vals_i holds L entries
        diag_val = diag[i]
        col_pos[i][i] = len(cols_i)
        cols_i.append(i)
        vals_i.append(diag_val)
    rows_out, cols_out, vals_out = [], [], []
    for i in range(n):
        for j, v in zip(lower_cols[i], lower_vals[i]):
            rows_out.append(i)
            cols_out.append(j)
            vals_out.append(v)
    return SparseMatrix.from_coo(n, n, rows_out, cols_out, vals_out)


def jacobi_factor(a):
    """Diagonal right-preconditioner: diag(A) for square operators, column
    norms for rectangular ones."""
    if a.nrows == a.ncols:
        d = a.diagonal().copy()
    else:
        d = np.zeros(a.ncols)
        for i in range(a.nrows):
            lo, hi = a.row_offsets[i], a.row_offsets[i + 1]
            d[a.col_indices[lo:hi]] += a.values[lo:hi] ** 2
        d = np.sqrt(d)
    if np.any(d == 0.0):
        raise KrylovlpError("zero diagonal entry: Jacobi preconditioner undefined")
    n = a.ncols
    return SparseMatrix(n, n, np.arange(n + 1), np.arange(n), d)
