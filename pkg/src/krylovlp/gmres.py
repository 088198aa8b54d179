"""GMRES reference: the least-squares residual minimizer over the same
Krylov subspaces the other solvers search, used for bound checks and
convergence comparisons.

The projected Hessenberg least-squares problem is reduced progressively
with Givens rotations; full residual vectors are recomputed per dimension
because their max- and absolute-value norms are needed as well.
"""

from dataclasses import dataclass, field

import numpy as np

from .krylov import KrylovBasis
from .sparse import LinearOperator


@dataclass
class GmresTrace:
    """Per-dimension residual norms; entry j belongs to subspace size j.

    For normal-equations runs the norms are measured in the original
    residual b - A x, while ``projected_2norms`` keeps the residual of the
    operator actually iterated on.
    """

    residual_2norms: list = field(default_factory=list)
    residual_infnorms: list = field(default_factory=list)
    residual_1norms: list = field(default_factory=list)
    solutions: list | None = None
    projected_2norms: list | None = None
    breakdown: bool = False

    @property
    def steps(self):
        return len(self.residual_2norms) - 1


class _GivensLsq:
    """Progressive QR of the growing Hessenberg least-squares problem."""

    def __init__(self, beta):
        self.cs = []
        self.sn = []
        self.g = [beta]
        self.rcols = []

    def append_column(self, h):
        col = np.array(h, dtype=np.float64)
        for i, (c, s) in enumerate(zip(self.cs, self.sn)):
            a, b = col[i], col[i + 1]
            col[i] = c * a + s * b
            col[i + 1] = -s * a + c * b
        a, b = col[-2], col[-1]
        r = np.hypot(a, b)
        if r == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = a / r, b / r
        col[-2], col[-1] = r, 0.0
        self.cs.append(c)
        self.sn.append(s)
        gk = self.g[-1]
        self.g[-1] = c * gk
        self.g.append(-s * gk)
        self.rcols.append(col[:-1])

    def solve(self):
        k = len(self.rcols)
        y = np.zeros(k)
        for i in range(k - 1, -1, -1):
            acc = self.g[i]
            for j in range(i + 1, k):
                acc -= self.rcols[j][i] * y[j]
            y[i] = acc / self.rcols[i][i]
        return y

    @property
    def projected_residual(self):
        return abs(self.g[-1])


def gmres_run(op, b, x0=None, max_k=50, tol=0.0, keep_solutions=False):
    """Minimal-residual iteration for a square operator.

    Records the 2-, max- and 1-norms of b - A x_k for every subspace size,
    including k=0.  Stops at max_k, at ``tol`` on the 2-norm, or at a happy
    breakdown (the exact subspace solution is recorded before stopping).
    """
    if not op.is_square:
        raise ValueError("gmres_run requires a square operator; "
                         "use gmres_normal_equations for rectangular systems")
    b = np.asarray(b, dtype=np.float64)
    x0 = np.zeros(op.ncols) if x0 is None else np.asarray(x0, dtype=np.float64)
    r0 = b - op.matvec(x0)
    trace = GmresTrace(solutions=[] if keep_solutions else None)
    _record(trace, r0, x0 if keep_solutions else None)
    beta = np.linalg.norm(r0)
    if beta == 0.0:
        return trace

    basis = KrylovBasis(op, r0)
    lsq = _GivensLsq(beta)
    for _ in range(max_k):
        new_v, _ = basis.expand()
        k = basis.k
        h_col = basis.hess[: k + 1, k - 1]
        lsq.append_column(h_col)
        y = lsq.solve()
        x = x0 + basis.v[:, :k] @ y
        r = b - op.matvec(x)
        _record(trace, r, x if keep_solutions else None)
        if basis.breakdown or new_v is None:
            trace.breakdown = True
            break
        if tol > 0.0 and np.linalg.norm(r) <= tol:
            break
    return trace


class NormalEquationsOperator(LinearOperator):
    """x -> A^T (A x), the square operator behind rectangular runs."""

    def __init__(self, a):
        self.a = a
        self.nrows = a.ncols
        self.ncols = a.ncols

    def matvec(self, x):
        return self.a.rmatvec(self.a.matvec(x))

    def rmatvec(self, y):
        return self.matvec(y)


def gmres_normal_equations(a, b, x0=None, max_k=50, tol=0.0, keep_solutions=False):
    """GMRES on A^T A dx = A^T r0; traces original-space residual norms."""
    b = np.asarray(b, dtype=np.float64)
    x0 = np.zeros(a.ncols) if x0 is None else np.asarray(x0, dtype=np.float64)
    r0 = b - a.matvec(x0)
    ne_op = NormalEquationsOperator(a)
    ne_rhs = a.rmatvec(r0)

    trace = GmresTrace(solutions=[] if keep_solutions else None, projected_2norms=[])
    _record(trace, r0, x0 if keep_solutions else None)
    trace.projected_2norms.append(float(np.linalg.norm(ne_rhs)))
    beta = np.linalg.norm(ne_rhs)
    if beta == 0.0:
        return trace

    basis = KrylovBasis(ne_op, ne_rhs)
    lsq = _GivensLsq(beta)
    for _ in range(max_k):
        new_v, _ = basis.expand()
        k = basis.k
        h_col = basis.hess[: k + 1, k - 1]
        lsq.append_column(h_col)
        y = lsq.solve()
        x = x0 + basis.v[:, :k] @ y
        r = b - a.matvec(x)
        _record(trace, r, x if keep_solutions else None)
        trace.projected_2norms.append(float(np.linalg.norm(ne_rhs - ne_op.matvec(x - x0))))
        if basis.breakdown or new_v is None:
            trace.breakdown = True
            break
        if tol > 0.0 and np.linalg.norm(r) <= tol:
            break
    return trace


def _record(trace, r, x):
    trace.residual_2norms.append(float(np.linalg.norm(r)))
    trace.residual_infnorms.append(float(np.max(np.abs(r))) if r.size else 0.0)
    trace.residual_1norms.append(float(np.sum(np.abs(r))))
    if trace.solutions is not None and x is not None:
        trace.solutions.append(np.array(x))
