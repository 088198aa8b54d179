"""NumPy implementations of the hot kernels.

Mirrors the signatures of the compiled module ``_core`` exactly; the package
selects one of the two at import time.  Everything here assumes contiguous
float64 / int64 inputs, validated by the callers.
"""

import numpy as np


def csr_matvec(indptr, indices, data, x, out):
    """out = A @ x for CSR (indptr, indices, data)."""
    nrows = indptr.shape[0] - 1
    row_ids = np.repeat(np.arange(nrows), np.diff(indptr))
    out[:] = np.bincount(row_ids, weights=data * x[indices], minlength=nrows)
    return out


def csr_matvec_t(indptr, indices, data, y, out):
    """out = A.T @ y for CSR (indptr, indices, data)."""
    nrows = indptr.shape[0] - 1
    yr = np.repeat(y, np.diff(indptr))
    out[:] = np.bincount(indices, weights=data * yr, minlength=out.shape[0])
    return out


def csr_solve_lower(indptr, indices, data, diag_pos, b, out, transposed):
    """Solve L x = b (or L.T x = b) for lower-triangular CSR L.

    ``diag_pos[i]`` is the position of the diagonal entry of row i inside
    the data array.  Substitution runs row by row; the transposed variant
    scatters column contributions while walking rows backwards.
    """
    n = indptr.shape[0] - 1
    if not transposed:
        for i in range(n):
            lo, dp = indptr[i], diag_pos[i]
            acc = b[i]
            if dp > lo:
                acc -= np.dot(data[lo:dp], out[indices[lo:dp]])
            out[i] = acc / data[dp]
    else:
        out[:] = b
        for i in range(n - 1, -1, -1):
            lo, dp = indptr[i], diag_pos[i]
            xi = out[i] / data[dp]
            out[i] = xi
            if dp > lo:
                out[indices[lo:dp]] -= data[lo:dp] * xi
    return out


def _givens(a, b):
    """Rotation (c, s) with c*a + s*b = r and -s*a + c*b = 0."""
    if b == 0.0:
        return 1.0, 0.0, a
    if a == 0.0:
        return 0.0, 1.0, b
    if abs(b) > abs(a):
        tau = a / b
        s = 1.0 / np.sqrt(1.0 + tau * tau)
        if b < 0.0:
            s = -s
        c = s * tau
        return c, s, b / s
    tau = b / a
    c = 1.0 / np.sqrt(1.0 + tau * tau)
    if a < 0.0:
        c = -c
    s = c * tau
    return c, s, a / c


def qr_rank1_update(q, r, u, v, w):
    """In-place update of Q, R so that Q R becomes Q R + u v^T.

    Two Givens sweeps: the first reduces w = Q^T u to a multiple of e1
    (turning R upper Hessenberg), the second restores the triangle after
    the rank-one row addition.  O(s^2) total.
    """
    s = q.shape[0]
    np.dot(q.T, u, out=w)
    for i in range(s - 2, -1, -1):
        if w[i + 1] == 0.0:
            continue
        c, sn, rad = _givens(w[i], w[i + 1])
        w[i] = rad
        w[i + 1] = 0.0
        row_i = r[i, i:].copy()
        row_j = r[i + 1, i:]
        r[i, i:] = c * row_i + sn * row_j
        r[i + 1, i:] = -sn * row_i + c * row_j
        col_i = q[:, i].copy()
        col_j = q[:, i + 1]
        q[:, i] = c * col_i + sn * col_j
        q[:, i + 1] = -sn * col_i + c * col_j
    r[0, :] += w[0] * v
    for i in range(s - 1):
        if r[i + 1, i] == 0.0:
            continue
        c, sn, rad = _givens(r[i, i], r[i + 1, i])
        row_i = r[i, i:].copy()
        row_j = r[i + 1, i:]
        r[i, i:] = c * row_i + sn * row_j
        r[i + 1, i:] = -sn * row_i + c * row_j
        r[i, i] = rad
        r[i + 1, i] = 0.0
        col_i = q[:, i].copy()
        col_j = q[:, i + 1]
        q[:, i] = c * col_i + sn * col_j
        q[:, i + 1] = -sn * col_i + c * col_j


def linf_ratio_test(residual, t, gamma, excluded):
    """Blocking step for the max-norm solver.

    Largest (closest to zero) nonpositive step d_gamma keeping
    -(gamma+d) <= residual - t*d <= gamma+d over non-excluded entries.
    Masks are uint8 (nonzero = set).  Returns (d_gamma, blocking index,
    side) with side -1 when the lower bound blocks and +1 for the upper;
    index -1 when nothing blocks.
    """
    ok = excluded == 0
    den_lo = t - 1.0
    den_hi = -(t + 1.0)
    num_lo = np.maximum(residual + gamma, 0.0)
    num_hi = np.maximum(gamma - residual, 0.0)

    cand_lo = ok & (den_lo < 0.0)
    cand_hi = ok & (den_hi < 0.0)

    best = -np.inf
    idx = -1
    side = 0
    if cand_lo.any():
        ratios = np.full(residual.shape, -np.inf)
        ratios[cand_lo] = num_lo[cand_lo] / den_lo[cand_lo]
        i = int(np.argmax(ratios))
        best, idx, side = ratios[i], i, -1
    if cand_hi.any():
        ratios = np.full(residual.shape, -np.inf)
        ratios[cand_hi] = num_hi[cand_hi] / den_hi[cand_hi]
        i = int(np.argmax(ratios))
        if ratios[i] > best or idx < 0:
            best, idx, side = ratios[i], i, 1
    if idx < 0:
        return np.nan, -1, 0
    return min(best, 0.0), idx, side


def l1_ratio_pos_min(residual, w, nonbasic):
    """Smallest strictly positive ratio residual_i / w_i over nonbasic i."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = residual / w
    ratios = np.where((nonbasic != 0) & (w != 0.0) & (ratios > 0.0), ratios, np.inf)
    i = int(np.argmin(ratios))
    if not np.isfinite(ratios[i]):
        return np.nan, -1
    return float(ratios[i]), i


def l1_ratio_neg_max(residual, w, nonbasic):
    """Largest strictly negative ratio residual_i / w_i over nonbasic i."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = residual / w
    ratios = np.where((nonbasic != 0) & (w != 0.0) & (ratios < 0.0), ratios, -np.inf)
    i = int(np.argmax(ratios))
    if not np.isfinite(ratios[i]):
        return np.nan, -1
    return float(ratios[i]), i
