"""Brute-force solvers for the small projected problems.

Ground truth for the simplex solvers at desk scale, by enumeration of
basic solutions only; no LP library involved.

Max-norm problem min_y max_i |r0 - AV y|_i: every optimal basis is a set S
of k+1 rows.  For each S, a left null vector phi of AV|_S determines both
the restricted optimum gamma_S = |phi . r0_S| / ||phi||_1 and the bound
side pattern sign(phi); the global optimum is the maximal gamma_S over all
subsets, and its y solves the (k+1)-square primal system.

Absolute-value-norm problem min_y ||r0 - AV y||_1: an optimal basic
solution zeroes k residuals, so enumerating all nonsingular row k-subsets
and scoring the objective is exhaustive.
"""

import itertools

import numpy as np

from .errors import KrylovlpError

MAX_ROWS = 30
MAX_COLS_LINF = 8
MAX_COLS_L1 = 6

_CHUNK = 20_000


class OracleError(KrylovlpError):
    """Enumeration found no usable basic solution."""


def oracle_projected_linf(av, r0):
    """Exhaustive minimizer of max_i |r0 - AV y|_i.

    Returns (gamma_star, y_star).  Budgets: m <= 30 rows, k <= 8 columns.
    """
    av, r0 = _checked(av, r0, MAX_COLS_LINF)
    m, k = av.shape
    s = k + 1
    if m < s:
        raise OracleError(f"need at least {s} rows for subspace dimension {k}")

    best = []  # (gamma, subset) candidates, best first
    for subs in _chunked_subsets(m, s):
        gammas = _restricted_gammas(av, r0, subs)
        order = np.argsort(-gammas)[: 8]
        for pos in order:
            if np.isfinite(gammas[pos]):
                best.append((float(gammas[pos]), subs[pos]))
    if not best:
        raise OracleError("all row subsets are rank deficient")
    best.sort(key=lambda item: -item[0])

    for gamma_s, subset in best[:64]:
        solved = _solve_linf_subset(av, r0, subset)
        if solved is None:
            continue
        gamma, y, feasible = solved
        if feasible:
            return gamma, y
    raise OracleError("no feasible basic solution among top candidates")


def oracle_projected_l1(av, r0):
    """Exhaustive minimizer of ||r0 - AV y||_1 over row k-subsets.

    Returns (obj_star, y_star).  Budgets: m <= 30 rows, k <= 6 columns.
    """
    av, r0 = _checked(av, r0, MAX_COLS_L1)
    m, k = av.shape
    if k == 0:
        return float(np.sum(np.abs(r0))), np.zeros(0)
    if m < k:
        raise OracleError(f"need at least {k} rows for subspace dimension {k}")

    best_obj = np.inf
    best_y = None
    for subs in _chunked_subsets(m, k):
        mats = av[subs]  # (c, k, k)
        dets = np.linalg.det(mats)
        row_norms = np.linalg.norm(mats, axis=2)
        hadamard = np.prod(row_norms, axis=1)
        ok = np.abs(dets) > 1e-12 * np.maximum(hadamard, 1e-300)
        if not ok.any():
            continue
        ys = np.linalg.solve(mats[ok], r0[subs[ok]][..., None])[..., 0]
        resid = r0[None, :] - ys @ av.T
        objs = np.sum(np.abs(resid), axis=1)
        pos = int(np.argmin(objs))
        if objs[pos] < best_obj:
            best_obj = float(objs[pos])
            best_y = ys[pos].copy()
    if best_y is None:
        raise OracleError("all row subsets singular")
    return best_obj, best_y


def _checked(av, r0, max_cols):
    r0 = np.asarray(r0, dtype=np.float64)
    av = np.asarray(av, dtype=np.float64)
    if av.ndim == 1:
        av = av[:, None]
    if av.ndim != 2 or av.shape[0] != r0.shape[0]:
        raise ValueError("AV must be a matrix with one row per entry of r0")
    m, k = av.shape
    if m > MAX_ROWS:
        raise ValueError(f"oracle budget exceeded: m = {m} > {MAX_ROWS}")
    if k > max_cols:
        raise ValueError(f"oracle budget exceeded: k = {k} > {max_cols}")
    return av, r0


def _chunked_subsets(m, size):
    it = itertools.combinations(range(m), size)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def _restricted_gammas(av, r0, subs):
    """gamma_S for each subset row of ``subs`` via left null vectors."""
    c, s = subs.shape
    k = s - 1
    if k == 0:
        return np.abs(r0[subs[:, 0]])
    phis = _null_vectors(av[subs])
    norm1 = np.sum(np.abs(phis), axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        gammas = np.abs(np.einsum("cs,cs->c", phis, r0[subs])) / norm1
    gammas[~np.isfinite(gammas)] = -np.inf
    scale = np.max(np.abs(phis), axis=1)
    gammas[scale <= 0.0] = -np.inf
    return gammas


def _null_vectors(mats):
    """Left null vectors for a stack of (k+1) x k matrices.

    Fast path solves M0^T g = a with M0 the top k rows and a the last row;
    phi = (g, -1).  Rank-deficient leading blocks fall back to SVD.
    """
    c, s, k = mats.shape
    phis = np.zeros((c, s))
    tops = mats[:, :k, :]
    lasts = mats[:, k, :]
    dets = np.linalg.det(tops)
    tnorms = np.linalg.norm(tops, axis=(1, 2))
    ok = np.abs(dets) > 1e-14 * np.maximum(tnorms**k, 1e-300)
    if ok.any():
        g = np.linalg.solve(np.transpose(tops[ok], (0, 2, 1)), lasts[ok][..., None])[..., 0]
        phis[ok, :k] = g
        phis[ok, k] = -1.0
    for idx in np.nonzero(~ok)[0]:
        mat = mats[idx]
        if np.linalg.matrix_rank(mat) == k:
            _, _, vt = np.linalg.svd(mat.T, full_matrices=True)
            phis[idx] = vt[-1]
        # rank-deficient subsets keep phi = 0 and are filtered out
    return phis


def _solve_linf_subset(av, r0, subset):
    """Primal solve on one subset: returns (gamma, y, feasible) or None."""
    m, k = av.shape
    rows = av[subset]
    if k == 0:
        phi = np.ones(1)
    else:
        u, sv, vt = np.linalg.svd(rows.T, full_matrices=True)
        phi = vt[-1]
        if np.linalg.matrix_rank(rows) < k:
            return None
    sigma = np.where(phi >= 0.0, 1.0, -1.0)
    system = np.concatenate([sigma[:, None], rows], axis=1)
    try:
        sol = np.linalg.solve(system, r0[subset])
    except np.linalg.LinAlgError:
        return None
    gamma, y = sol[0], sol[1:]
    if gamma < 0.0:
        sigma = -sigma
        system = np.concatenate([sigma[:, None], rows], axis=1)
        try:
            sol = np.linalg.solve(system, r0[subset])
        except np.linalg.LinAlgError:
            return None
        gamma, y = sol[0], sol[1:]
    resid = r0 - av @ y
    feasible = bool(np.max(np.abs(resid)) <= gamma * (1.0 + 1e-9) + 1e-12)
    return float(gamma), y, feasible
