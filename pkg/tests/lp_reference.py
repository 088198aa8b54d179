"""Tiny dense two-phase simplex, used only as an independent cross-check.

Solves min c.x s.t. A x = b, x >= 0 with Bland's rule.  Dense and slow;
strictly a test reference.
"""

import numpy as np


def simplex_standard_form(a, b, c, max_iters=20_000):
    a = np.asarray(a, dtype=np.float64).copy()
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: artificial basis
    tab_a = np.hstack([a, np.eye(m)])
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    x, basis = _iterate(tab_a, b, cost1, basis, max_iters)
    if np.dot(cost1, x) > 1e-8:
        raise ValueError("infeasible LP")

    # Drive leftover artificials out of the basis where possible
    for pos, var in enumerate(basis):
        if var >= n:
            row = np.linalg.solve(tab_a[:, basis], tab_a[:, :n])[pos]
            cands = np.nonzero(np.abs(row) > 1e-9)[0]
            if cands.size:
                basis[pos] = int(cands[0])

    # Phase 2 on original columns (artificials pinned at zero)
    cost2 = np.concatenate([c, np.full(m, 1e9)])
    x, basis = _iterate(tab_a, b, cost2, basis, max_iters)
    return float(np.dot(cost2, x)), x[:n]


def _iterate(a, b, c, basis, max_iters):
    m, n = a.shape
    for _ in range(max_iters):
        binv = np.linalg.inv(a[:, basis])
        xb = binv @ b
        lam = binv.T @ c[basis]
        reduced = c - a.T @ lam
        reduced[basis] = 0.0
        enter = -1
        for j in range(n):
            if reduced[j] < -1e-9:
                enter = j
                break
        if enter < 0:
            x = np.zeros(n)
            x[basis] = xb
            return x, basis
        d = binv @ a[:, enter]
        ratios = np.where(d > 1e-12, xb / np.where(d > 1e-12, d, 1.0), np.inf)
        leave = int(np.argmin(ratios))
        if not np.isfinite(ratios[leave]):
            raise ValueError("unbounded LP")
        basis[leave] = enter
    raise ValueError("simplex iteration limit")


def solve_minimax_reference(av, r0):
    """min gamma s.t. -gamma <= r0 - AV y <= gamma via standard form."""
    m, k = av.shape
    # vars: gamma, y+ (k), y- (k), s (m), t (m)
    # r0 - AV y + gamma >= 0  ->  gamma - AV(y+ - y-) - s = -r0
    # gamma - (r0 - AV y) >= 0 ->  gamma + AV(y+ - y-) - t = r0
    n = 1 + 2 * k + 2 * m
    a = np.zeros((2 * m, n))
    a[:m, 0] = 1.0
    a[:m, 1 : 1 + k] = -av
    a[:m, 1 + k : 1 + 2 * k] = av
    a[:m, 1 + 2 * k : 1 + 2 * k + m] = -np.eye(m)
    a[m:, 0] = 1.0
    a[m:, 1 : 1 + k] = av
    a[m:, 1 + k : 1 + 2 * k] = -av
    a[m:, 1 + 2 * k + m :] = -np.eye(m)
    b = np.concatenate([-r0, r0])
    c = np.zeros(n)
    c[0] = 1.0
    obj, x = simplex_standard_form(a, b, c)
    return obj, x[1 : 1 + k] - x[1 + k : 1 + 2 * k]


def solve_lad_reference(av, r0):
    """min ||r0 - AV y||_1 via the split-residual standard form."""
    m, k = av.shape
    # vars: y+ (k), y- (k), u (m), w (m);  AV y + u - w = r0
    n = 2 * k + 2 * m
    a = np.zeros((m, n))
    a[:, :k] = av
    a[:, k : 2 * k] = -av
    a[:, 2 * k : 2 * k + m] = np.eye(m)
    a[:, 2 * k + m :] = -np.eye(m)
    c = np.concatenate([np.zeros(2 * k), np.ones(2 * m)])
    obj, x = simplex_standard_form(a, r0, c)
    return obj, x[:k] - x[k : 2 * k]
