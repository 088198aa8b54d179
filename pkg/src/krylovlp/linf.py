"""Minimize the largest absolute residual entry over growing Krylov subspaces.

For each subspace dimension k the minimizer of max_i |b - A x|_i over
x0 + K_k is a linear program whose optimal point pins k+1 residual entries
to +/- gamma.  The active rows form a small square basic matrix

    B = [ (+/-1)  (A V_k)|rows ]

whose QR factors are kept current under row replacement (pivots) and
bordered growth (subspace expansion).  One pivot exchanges a basic row
carrying a negative Lagrange multiplier against the blocking row of a
ratio test; one expansion moves along the feasible direction that keeps
all currently active rows pinned while the new coordinate changes.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import DegenerateDirectionError, UnboundedStepError
from .krylov import KrylovBasis
from .qrupdate import QrFactors
from .runlog import ConvergenceRecord, SolveOptions, SolveResult, SubspaceSummary

DIRECTION_TOL = 1e-13
DEGENERATE_STREAK_PERTURB = 50
DEGENERATE_STREAK_EXPAND = 200


@dataclass
class LinfBasicSet:
    """Active rows and their bound side: -1 pins r_i = -gamma, +1 pins +gamma."""

    indices: np.ndarray
    sides: np.ndarray

    @property
    def size(self):
        return self.indices.shape[0]


@dataclass
class LinfState:
    y: np.ndarray
    gamma: float
    residual: np.ndarray
    basic: LinfBasicSet
    qr: QrFactors
    basis: KrylovBasis
    r0: np.ndarray
    basic_mask: np.ndarray
    inner_iters: int = 0
    outer_iters: int = 0
    degenerate_streak: int = 0
    log: list = field(default_factory=list)
    history: list = field(default_factory=list)
    _start_time: float = field(default_factory=time.perf_counter)

    @property
    def k(self):
        return self.y.shape[0]

    def av_columns(self):
        return self.basis.av[:, : self.k]

    def record(self, event, inner_iter, outer_k=None):
        self.log.append(
            ConvergenceRecord(
                outer_k=self.k if outer_k is None else outer_k,
                inner_iter=inner_iter,
                objective=self.gamma,
                event=event,
                wall_time=time.perf_counter() - self._start_time,
            )
        )

    def summarize(self, optimal, inner_iters):
        r = self.residual
        self.history.append(
            SubspaceSummary(
                k=self.k,
                objective=self.gamma,
                optimal=optimal,
                inner_iters=inner_iters,
                residual_norm_1=float(np.sum(np.abs(r))),
                residual_norm_2=float(np.linalg.norm(r)),
                residual_norm_inf=float(np.max(np.abs(r))),
            )
        )


def linf_init(op, b, x0=None):
    """Set up the dimension-zero state: gamma is the largest |r0| entry and
    the single active row is where it occurs (lowest index on ties)."""
    b = np.asarray(b, dtype=np.float64)
    r0 = b - op.matvec(x0) if x0 is not None else b.copy()
    gamma0 = float(np.max(np.abs(r0)))
    if gamma0 == 0.0:
        raise ValueError("zero initial residual: x0 already solves the system")
    i0 = int(np.argmax(np.abs(r0)))
    side0 = 1 if r0[i0] > 0 else -1
    basic = LinfBasicSet(
        indices=np.array([i0], dtype=np.int64), sides=np.array([side0], dtype=np.int8)
    )
    qr = QrFactors.from_matrix(np.array([[float(side0)]]))
    mask = np.zeros(r0.shape[0], dtype=np.uint8)
    mask[i0] = 1
    basis = KrylovBasis(op, r0)
    return LinfState(
        y=np.zeros(0),
        gamma=gamma0,
        residual=r0.copy(),
        basic=basic,
        qr=qr,
        basis=basis,
        r0=r0,
        basic_mask=mask,
    )


def linf_solve_dual(state):
    """Multipliers of the active rows from B^T zeta = (-1, 0, ..., 0).

    Lower-side positions carry lambda = zeta, upper-side mu = -zeta; the
    nonbasic multipliers vanish by complementarity.  Returns (lam, mu)
    indexed by basic position.
    """
    zeta = _dual_vector(state)
    sides = state.basic.sides
    lam = np.where(sides < 0, zeta, 0.0)
    mu = np.where(sides > 0, -zeta, 0.0)
    return lam, mu


def _dual_vector(state):
    rhs = np.zeros(state.basic.size)
    rhs[0] = -1.0
    return state.qr.solve_transpose(rhs)


def _multipliers(state):
    zeta = _dual_vector(state)
    return -state.basic.sides.astype(np.float64) * zeta


def linf_pivot(state, dual_tol=1e-10):
    """One simplex step.  Returns the logged event name, or 'optimal' when
    every multiplier is nonnegative (within dual_tol)."""
    mult = _multipliers(state)
    j = _leaving_position(state, mult, dual_tol)
    if j is None:
        return "optimal"
    return _pivot_at(state, j)


def _leaving_position(state, mult, dual_tol):
    worst = mult.min()
    if worst >= -dual_tol:
        return None
    ties = np.nonzero(mult <= worst)[0]
    j = int(ties[np.argmin(state.basic.indices[ties])])
    if state.degenerate_streak >= DEGENERATE_STREAK_PERTURB and mult.shape[0] > 1:
        # anti-cycling: move to the second-most-negative multiplier
        order = np.argsort(mult)
        for pos in order[1:]:
            if mult[pos] < -dual_tol:
                j = int(pos)
                break
    return j


def _pivot_at(state, j):
    basic = state.basic
    q = int(basic.indices[j])
    ej = np.zeros(basic.size)
    ej[j] = 1.0
    d = state.qr.solve(ej)
    if abs(d[0]) <= DIRECTION_TOL:
        raise DegenerateDirectionError("pivot direction does not move the objective")
    d_tilde = d[1:] / d[0]
    t = state.av_columns() @ d_tilde if state.k else np.zeros(state.residual.shape[0])

    state.basic_mask[q] = 0
    dgamma, blk, side = _accel.linf_ratio_test(
        state.residual, t, state.gamma, state.basic_mask
    )
    if blk < 0:
        state.basic_mask[q] = 1
        raise UnboundedStepError("ratio test found no blocking row")

    state.y += d_tilde * dgamma
    state.gamma += dgamma
    state.residual -= t * dgamma
    state.residual[blk] = side * state.gamma
    basic.indices[j] = blk
    basic.sides[j] = side
    state.basic_mask[blk] = 1
    new_row = np.concatenate([[float(side)], state.av_columns()[blk]])
    state.qr.replace_row(j, new_row)

    degenerate = dgamma >= -1e-14 * (1.0 + abs(state.gamma))
    state.degenerate_streak = state.degenerate_streak + 1 if degenerate else 0
    return "degenerate" if degenerate else "pivot"


def linf_expand_subspace(state):
    """Bring the state from subspace k to k+1 using the freshly cached
    product column; grows the active set by the blocking row."""
    basis = state.basis
    k_new = basis.k
    if k_new != state.k + 1:
        raise RuntimeError("expand the Krylov basis exactly once before this call")
    av_new = basis.av[:, k_new - 1]
    av_prev = basis.av[:, : k_new - 1]
    basic = state.basic
    old_indices = basic.indices.copy()

    rhs = -av_new[old_indices]
    d = state.qr.solve(rhs)
    if abs(d[0]) > DIRECTION_TOL:
        t = (av_prev @ d[1:] + av_new) / d[0]
        dgamma, blk, side = _accel.linf_ratio_test(
            state.residual, t, state.gamma, state.basic_mask
        )
        if blk < 0:
            raise UnboundedStepError("expansion ratio test found no blocking row")
        step = np.concatenate([d[1:], [1.0]]) / d[0]
        state.y = np.concatenate([state.y, [0.0]]) + step * dgamma
        state.gamma += dgamma
        state.residual -= t * dgamma
    else:
        # direction cannot move gamma: grow the active set at zero step
        w = av_prev @ d[1:] + av_new
        alpha, blk, side = _degenerate_growth(state, w)
        state.y = np.concatenate([state.y, [0.0]]) + np.concatenate([d[1:], [1.0]]) * alpha
        state.residual -= w * alpha
    state.residual[blk] = side * state.gamma

    basic.indices = np.append(basic.indices, np.int64(blk))
    basic.sides = np.append(basic.sides, np.int8(side))
    state.basic_mask[blk] = 1
    new_row = np.concatenate([[float(side)], basis.av[blk, :k_new]])
    state.qr.expand(av_new[old_indices], new_row)
    state.degenerate_streak = 0


def _degenerate_growth(state, w):
    """Zero-improvement expansion: slide along the new coordinate until a
    nonbasic row reaches a bound, leaving gamma unchanged."""
    r, gamma = state.residual, state.gamma
    free = state.basic_mask == 0
    best = None  # (|alpha|, alpha, index, side)
    pos_mask = free & (w > 0.0)
    neg_mask = free & (w < 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        # forward: w>0 rows hit the lower bound, w<0 rows the upper
        a_fwd_lo = np.where(pos_mask, np.maximum(r + gamma, 0.0) / w, np.inf)
        a_fwd_hi = np.where(neg_mask, np.minimum(r - gamma, 0.0) / w, np.inf)
        # backward: w>0 rows hit the upper bound, w<0 rows the lower
        a_bwd_hi = np.where(pos_mask, np.minimum(r - gamma, 0.0) / w, -np.inf)
        a_bwd_lo = np.where(neg_mask, np.maximum(r + gamma, 0.0) / w, -np.inf)
    for arr, side, pick in (
        (a_fwd_lo, -1, "min"),
        (a_fwd_hi, 1, "min"),
        (a_bwd_hi, 1, "max"),
        (a_bwd_lo, -1, "max"),
    ):
        i = int(np.argmin(arr)) if pick == "min" else int(np.argmax(arr))
        alpha = arr[i]
        if not np.isfinite(alpha):
            continue
        key = (abs(alpha), 0 if alpha >= 0 else 1)
        if best is None or key < best[0]:
            best = (key, float(alpha), i, side)
    if best is None:
        raise UnboundedStepError("degenerate expansion found no blocking row")
    return best[1], best[2], best[3]


def linf_check_kkt(state, tol=1e-8):
    """Measure all optimality conditions at the current state."""
    m = state.residual.shape[0]
    lam_b, mu_b = linf_solve_dual(state)
    lam = np.zeros(m)
    mu = np.zeros(m)
    lam[state.basic.indices] = lam_b
    mu[state.basic.indices] = mu_b
    r = state.residual
    gamma = state.gamma
    primal = float(np.max(np.abs(r)) - gamma)
    dual_sum = float(abs(lam.sum() + mu.sum() - 1.0))
    diff = lam - mu
    dual_orth = float(np.max(np.abs(state.av_columns().T @ diff))) if state.k else 0.0
    min_multiplier = float(min(lam.min(), mu.min()))
    complementarity = float(np.max(np.minimum(lam + mu, gamma - np.abs(r))))
    basis_orth = None
    if state.basis.mode == "arnoldi":
        v = state.basis.v
        cols = min(v.shape[1], state.k + 1)
        basis_orth = float(np.max(np.abs(v[:, :cols].T @ diff)))
    return LinfKktReport(
        primal_feasibility=primal,
        dual_sum_deviation=dual_sum,
        dual_orthogonality=dual_orth,
        min_multiplier=min_multiplier,
        complementarity=complementarity,
        next_basis_orthogonality=basis_orth,
    )


@dataclass
class LinfKktReport:
    primal_feasibility: float
    dual_sum_deviation: float
    dual_orthogonality: float
    min_multiplier: float
    complementarity: float
    next_basis_orthogonality: float | None = None

    def max_violation(self):
        return max(
            self.primal_feasibility,
            self.dual_sum_deviation,
            self.dual_orthogonality,
            -min(self.min_multiplier, 0.0),
            self.complementarity,
        )

    def passed(self, tol=1e-8):
        return self.max_violation() <= tol


def _resync(state):
    state.residual = state.r0 - state.av_columns() @ state.y
    state.gamma = float(np.max(np.abs(state.residual)))


def _exhausted_status(state):
    """Status when the basis cannot grow: optimal for the invariant
    subspace if the last inner loop certified it, else a budget exit."""
    if state.history and state.history[-1].optimal:
        return "subspace_optimal"
    return "iteration_limit"


def minimize_residual_linf(op, b, x0=None, options=None, collect_kkt=False):
    """Full outer/inner iteration: expand the subspace, then pivot to the
    per-subspace optimum; stop on tolerance, breakdown or budgets."""
    opts = options or SolveOptions()
    b = np.asarray(b, dtype=np.float64)
    x0vec = np.zeros(op.ncols) if x0 is None else np.asarray(x0, dtype=np.float64)
    r0 = b - op.matvec(x0vec) if x0 is not None else b.copy()
    if np.max(np.abs(r0)) <= opts.tol:
        return SolveResult(
            x=op.recover(x0vec), status="converged", objective=float(np.max(np.abs(r0))),
            outer_iters=0, inner_iters=0, log=[], history=[],
        )

    state = linf_init(op, b, x0)
    state.record("optimal", 0, outer_k=0)
    state.summarize(optimal=True, inner_iters=0)
    status = "iteration_limit"
    inner_total = 0

    for _ in range(opts.max_outer):
        if state.basis.breakdown:
            status = _exhausted_status(state)
            break
        _, av_new = state.basis.expand()
        if av_new is None:
            status = _exhausted_status(state)
            break
        linf_expand_subspace(state)
        state.outer_iters += 1
        state.record("expand", 0)
        if state.gamma <= opts.tol:
            _resync(state)
            # at tolerance the state is optimal for its subspace a fortiori
            state.summarize(optimal=True, inner_iters=0)
            status = "converged"
            break

        iters_here = 0
        optimal_here = False
        while True:
            if inner_total >= opts.max_inner:
                break
            if opts.cap_inner is not None and iters_here >= opts.cap_inner:
                break
            if state.degenerate_streak >= DEGENERATE_STREAK_EXPAND:
                break
            event = linf_pivot(state, opts.dual_tol)
            if event == "optimal":
                optimal_here = True
                break
            iters_here += 1
            inner_total += 1
            state.inner_iters = inner_total
            if iters_here % 256 == 0:
                _resync(state)
            state.record(event, iters_here)
            if state.gamma <= opts.tol:
                break

        _resync(state)
        if optimal_here:
            state.record("optimal", iters_here)
        state.summarize(optimal=optimal_here, inner_iters=iters_here)
        if optimal_here and collect_kkt:
            state.history[-1].kkt_violation = linf_check_kkt(state).max_violation()
        if state.gamma <= opts.tol:
            status = "converged"
            break
        if inner_total >= opts.max_inner:
            status = "iteration_limit"
            break
    else:
        status = "iteration_limit"

    if (
        status == "iteration_limit"
        and state.basis.breakdown
        and state.history
        and state.history[-1].optimal
    ):
        # invariant subspace reached and fully optimized: nothing can improve
        status = "subspace_optimal"
    x = op.recover(x0vec + (state.basis.v[:, : state.k] @ state.y if state.k else 0.0))
    return SolveResult(
        x=x, status=status, objective=state.gamma,
        outer_iters=state.outer_iters, inner_iters=inner_total,
        log=state.log, history=state.history,
    )
