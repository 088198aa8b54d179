"""Minimize the sum of absolute residual entries over growing Krylov subspaces.

The per-subspace problem min_y ||r0 - A V_k y||_1 is a linear program whose
basic solutions zero exactly k residual entries; the basic matrix is the
square row restriction (A V_k)|rows.  Nonbasic rows split by residual sign
into N_< (negative) and N_> (positive, also holding exact-zero ties); their
multipliers are fixed at (1,0) and (0,1), so one k-square transposed solve
yields the basic multipliers and certifies optimality.  Pivots swap one
basic row against the blocking row of a one-sided ratio test; expansions
follow the direction that keeps all basic residuals at zero while the new
coordinate moves.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import StagnationError, UnboundedStepError
from .krylov import KrylovBasis
from .qrupdate import QrFactors
from .runlog import ConvergenceRecord, SolveOptions, SolveResult, SubspaceSummary

DEGENERATE_STREAK_PERTURB = 50
DEGENERATE_STREAK_EXPAND = 200
DESCENT_TOL = 1e-12


@dataclass
class L1BasicSet:
    """Rows pinned at zero residual plus the signed nonbasic partition.

    ``part`` holds the full picture per row: 0 basic, -1 in N_< (negative
    residual), +1 in N_> (positive residual; exact-zero ties live here).
    """

    indices: np.ndarray
    part: np.ndarray

    @property
    def size(self):
        return self.indices.shape[0]

    def nonbasic_lower(self):
        return np.nonzero(self.part == -1)[0]

    def nonbasic_upper(self):
        return np.nonzero(self.part == 1)[0]


@dataclass
class L1State:
    y: np.ndarray
    residual: np.ndarray
    objective: float
    basic: L1BasicSet
    qr: QrFactors | None
    basis: KrylovBasis
    r0: np.ndarray
    dual_rhs: np.ndarray
    zero_tol: float
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

    def nonbasic_mask(self):
        return (self.basic.part != 0).view(np.uint8)

    def record(self, event, inner_iter, outer_k=None):
        self.log.append(
            ConvergenceRecord(
                outer_k=self.k if outer_k is None else outer_k,
                inner_iter=inner_iter,
                objective=self.objective,
                event=event,
                wall_time=time.perf_counter() - self._start_time,
            )
        )

    def summarize(self, optimal, inner_iters):
        r = self.residual
        self.history.append(
            SubspaceSummary(
                k=self.k,
                objective=self.objective,
                optimal=optimal,
                inner_iters=inner_iters,
                residual_norm_1=float(np.sum(np.abs(r))),
                residual_norm_2=float(np.linalg.norm(r)),
                residual_norm_inf=float(np.max(np.abs(r))),
            )
        )


def l1_init(op, b, x0=None):
    """Dimension-zero state: the first basic row is the largest |r0| entry
    (lowest index on ties); the others split by sign, zeros joining N_>."""
    b = np.asarray(b, dtype=np.float64)
    r0 = b - op.matvec(x0) if x0 is not None else b.copy()
    if np.max(np.abs(r0)) == 0.0:
        raise ValueError("zero initial residual: x0 already solves the system")
    i0 = int(np.argmax(np.abs(r0)))
    part = np.where(r0 < 0.0, -1, 1).astype(np.int8)
    part[i0] = 0
    basic = L1BasicSet(indices=np.array([i0], dtype=np.int64), part=part)
    basis = KrylovBasis(op, r0)
    return L1State(
        y=np.zeros(0),
        residual=r0.copy(),
        objective=float(np.sum(np.abs(r0))),
        basic=basic,
        qr=None,
        basis=basis,
        r0=r0,
        dual_rhs=np.zeros(0),
        zero_tol=1e-9 * float(np.max(np.abs(r0))),
    )


def l1_solve_primal(state):
    """Solve (A V_k)|basic y = r0|basic and refresh the residual."""
    y = state.qr.solve(state.r0[state.basic.indices])
    state.y = y
    state.residual = state.r0 - state.av_columns() @ y
    state.residual[state.basic.indices] = 0.0
    state.objective = float(np.sum(np.abs(state.residual)))
    return state


def rebuild_dual_rhs(state):
    """dual_rhs = -(A V_k)^T s over nonbasic rows, s = +1 on N_<, -1 on N_>."""
    s = np.zeros(state.residual.shape[0])
    s[state.basic.part == -1] = 1.0
    s[state.basic.part == 1] = -1.0
    state.dual_rhs = -(state.av_columns().T @ s)
    return state


def l1_solve_dual(state):
    """Basic multipliers: solve B^T z = dual_rhs, then lam = (1+z)/2,
    mu = (1-z)/2.  Returns (lam, mu) on basic positions."""
    z = state.qr.solve_transpose(state.dual_rhs)
    return (1.0 + z) / 2.0, (1.0 - z) / 2.0


def l1_update_dual_rhs(state, q, entering, q_side, entering_side):
    """Incremental four-case update after a pivot.

    q leaves the basic set to side ``q_side`` (-1 joins N_<, +1 joins N_>);
    ``entering`` leaves nonbasic side ``entering_side``.  The change of the
    signed indicator s is +/-1 at both rows; dual_rhs -= (AV)^T delta_s.
    """
    av = state.av_columns()
    s_q_new = 1.0 if q_side == -1 else -1.0
    s_r_old = 1.0 if entering_side == -1 else -1.0
    state.dual_rhs += -s_q_new * av[q] + s_r_old * av[entering]
    return state


def l1_pivot(state, dual_tol=1e-10):
    """One simplex step; returns the event name or 'optimal'."""
    lam, mu = l1_solve_dual(state)
    j, which = _leaving_position(state, lam, mu, dual_tol)
    if j is None:
        return "optimal"
    return _pivot_at(state, j, which)


def _leaving_position(state, lam, mu, dual_tol):
    worst_l, worst_m = lam.min(), mu.min()
    if min(worst_l, worst_m) >= -dual_tol:
        return None, None
    # most negative multiplier; ties by lowest constraint index
    cand = []
    if worst_l < -dual_tol:
        for pos in np.nonzero(lam <= worst_l)[0]:
            cand.append((worst_l, state.basic.indices[pos], int(pos), "lam"))
    if worst_m < -dual_tol:
        for pos in np.nonzero(mu <= worst_m)[0]:
            cand.append((worst_m, state.basic.indices[pos], int(pos), "mu"))
    cand.sort(key=lambda c: (c[0], c[1]))
    value, _, j, which = cand[0]
    if state.degenerate_streak >= DEGENERATE_STREAK_PERTURB:
        alt = _second_most_negative(lam, mu, dual_tol, j)
        if alt is not None:
            return alt
    return j, which


def _second_most_negative(lam, mu, dual_tol, skip_j):
    pairs = [(lam[p], p, "lam") for p in range(lam.shape[0])]
    pairs += [(mu[p], p, "mu") for p in range(mu.shape[0])]
    pairs.sort(key=lambda c: c[0])
    for value, pos, which in pairs:
        if value < -dual_tol and pos != skip_j:
            return pos, which
    return None


def _pivot_at(state, j, which):
    basic = state.basic
    q = int(basic.indices[j])
    ej = np.zeros(basic.size)
    # lambda_q < 0 releases the lower bound (residual moves positive),
    # mu_q < 0 the upper (residual moves negative); both keep alpha >= 0
    ej[j] = -1.0 if which == "lam" else 1.0
    d = state.qr.solve(ej)
    w = state.av_columns() @ d

    nonbasic = state.nonbasic_mask()
    alpha, entering = _accel.l1_ratio_pos_min(state.residual, w, nonbasic)
    if entering < 0:
        raise UnboundedStepError("pivot ratio test found no blocking row")

    entering_side = int(basic.part[entering])
    q_side = 1 if which == "lam" else -1

    state.y += d * alpha
    state.residual -= w * alpha
    state.residual[entering] = 0.0
    state.objective = float(np.sum(np.abs(state.residual)))

    basic.indices[j] = entering
    basic.part[entering] = 0
    basic.part[q] = q_side
    state.qr.replace_row(j, state.av_columns()[entering])
    l1_update_dual_rhs(state, q, entering, q_side, entering_side)

    degenerate = alpha <= 1e-14 * (1.0 + abs(state.objective))
    state.degenerate_streak = state.degenerate_streak + 1 if degenerate else 0
    return "degenerate" if degenerate else "pivot"


def l1_expand_subspace(state):
    """Bring the state from subspace k to k+1.

    Keeps the k basic residuals at zero while moving along the new
    coordinate; the first nonbasic row driven to zero enters the basic
    set.  A flat direction (descent slope ~ 0) grows the set at zero step
    using a nonbasic row already at zero, when one admissible exists.
    """
    basis = state.basis
    k_new = basis.k
    if k_new != state.k + 1:
        raise RuntimeError("expand the Krylov basis exactly once before this call")
    av_new = basis.av[:, k_new - 1]
    basic = state.basic

    if state.k == 0:
        _bootstrap_first_dimension(state, av_new)
        return

    old_indices = basic.indices.copy()
    d = state.qr.solve(-av_new[old_indices])
    w = state.av_columns() @ d + av_new
    nonbasic = state.nonbasic_mask()
    signs = np.where(state.basic.part == -1, -1.0, 1.0)
    signs[state.basic.part == 0] = 0.0
    slope = float(signs @ w)

    if slope > DESCENT_TOL:
        alpha, entering = _accel.l1_ratio_pos_min(state.residual, w, nonbasic)
        if entering < 0:
            raise UnboundedStepError("expansion ratio test found no blocking row")
    elif slope < -DESCENT_TOL:
        alpha, entering = _accel.l1_ratio_neg_max(state.residual, w, nonbasic)
        if entering < 0:
            raise UnboundedStepError("expansion ratio test found no blocking row")
    else:
        alpha, entering = 0.0, _zero_step_entering(state, av_new)

    entering = int(entering)
    state.y = np.concatenate([state.y, [0.0]]) + np.concatenate([d, [1.0]]) * alpha
    state.residual -= w * alpha
    state.residual[entering] = 0.0
    state.residual[old_indices] = 0.0
    state.objective = float(np.sum(np.abs(state.residual)))

    new_row = np.concatenate([basis.av[entering, : k_new - 1], [av_new[entering]]])
    state.qr.expand(av_new[old_indices], new_row)
    basic.indices = np.append(basic.indices, np.int64(entering))
    basic.part[entering] = 0
    rebuild_dual_rhs(state)
    state.degenerate_streak = 0


def _bootstrap_first_dimension(state, av_new):
    """First subspace dimension as a descent step from y = 0.

    There are no zero rows to pin yet, so the direction is the new column
    itself; the first blocking row becomes the single basic row.  Unlike a
    direct basic solve at a preselected row this never raises the
    objective.
    """
    r = state.residual
    signs = np.where(state.basic.part == -1, -1.0, 1.0)
    i0 = int(state.basic.indices[0])
    signs[i0] = -1.0 if state.r0[i0] < 0 else 1.0
    slope = float(signs @ av_new)
    everything = np.ones(r.shape[0], dtype=np.uint8)
    if slope >= 0.0:
        alpha, entering = _accel.l1_ratio_pos_min(r, av_new, everything)
    else:
        alpha, entering = _accel.l1_ratio_neg_max(r, av_new, everything)
    if entering < 0:
        raise UnboundedStepError("first-dimension ratio test found no blocking row")
    entering = int(entering)
    state.y = np.array([alpha])
    state.residual = r - av_new * alpha
    state.residual[entering] = 0.0
    state.objective = float(np.sum(np.abs(state.residual)))
    state.basic.indices = np.array([entering], dtype=np.int64)
    _repartition(state)
    state.qr = QrFactors.from_matrix(np.array([[av_new[entering]]]))
    rebuild_dual_rhs(state)
    state.degenerate_streak = 0


def _zero_step_entering(state, av_new):
    """Entering row for a flat expansion: the nonbasic row closest to zero
    residual, restricted to |r| within tolerance and a nonsingular grown
    basic matrix."""
    nonbasic = np.nonzero(state.basic.part != 0)[0]
    order = nonbasic[np.argsort(np.abs(state.residual[nonbasic]), kind="stable")]
    k = state.k
    for cand in order:
        if abs(state.residual[cand]) > state.zero_tol:
            break
        trial = state.qr.copy()
        new_row = np.concatenate(
            [state.basis.av[cand, :k], [av_new[cand]]]
        )
        trial.expand(av_new[state.basic.indices], new_row)
        if trial.diagonal_ok():
            return int(cand)
    raise StagnationError(
        "flat expansion with no admissible zero-residual entering row"
    )


def _repartition(state):
    """Reset the nonbasic sign partition from the current residual; exact
    zeros (within tolerance) go to N_>."""
    part = np.where(state.residual < -state.zero_tol, -1, 1).astype(np.int8)
    part[state.basic.indices] = 0
    state.basic.part = part


def l1_check_kkt(state, tol=1e-8):
    """Measure the optimality conditions at the current state."""
    m = state.residual.shape[0]
    lam = np.zeros(m)
    mu = np.zeros(m)
    lam[state.basic.part == -1] = 1.0
    mu[state.basic.part == 1] = 1.0
    if state.k:
        lam_b, mu_b = l1_solve_dual(state)
        lam[state.basic.indices] = lam_b
        mu[state.basic.indices] = mu_b
    diff = lam - mu
    dual_orth = float(np.max(np.abs(state.av_columns().T @ diff))) if state.k else 0.0
    sum_dev = float(np.max(np.abs(lam + mu - 1.0)))
    min_mult = float(min(lam.min(), mu.min()))
    gam = np.abs(state.residual)
    comp = float(
        max(
            np.max(np.abs(lam * (state.residual + gam))),
            np.max(np.abs(mu * (gam - state.residual))),
        )
    )
    basis_orth = None
    if state.basis.mode == "arnoldi":
        v = state.basis.v
        cols = min(v.shape[1], state.k + 1)
        basis_orth = float(np.max(np.abs(v[:, :cols].T @ diff)))
    return L1KktReport(
        dual_orthogonality=dual_orth,
        sum_to_one_deviation=sum_dev,
        min_multiplier=min_mult,
        complementarity=comp,
        next_basis_orthogonality=basis_orth,
    )


@dataclass
class L1KktReport:
    dual_orthogonality: float
    sum_to_one_deviation: float
    min_multiplier: float
    complementarity: float
    next_basis_orthogonality: float | None = None

    def max_violation(self):
        return max(
            self.dual_orthogonality,
            self.sum_to_one_deviation,
            -min(self.min_multiplier, 0.0),
            self.complementarity,
        )

    def passed(self, tol=1e-8):
        return self.max_violation() <= tol


def _resync(state):
    state.residual = state.r0 - state.av_columns() @ state.y
    state.residual[state.basic.indices] = 0.0
    state.objective = float(np.sum(np.abs(state.residual)))


def _exhausted_status(state):
    """Status when the basis cannot grow: optimal for the invariant
    subspace if the last inner loop certified it, else a budget exit."""
    if state.history and state.history[-1].optimal:
        return "subspace_optimal"
    return "iteration_limit"


def minimize_residual_l1(op, b, x0=None, options=None, collect_kkt=False):
    """Full outer/inner iteration for the absolute-residual objective."""
    opts = options or SolveOptions()
    b = np.asarray(b, dtype=np.float64)
    x0vec = np.zeros(op.ncols) if x0 is None else np.asarray(x0, dtype=np.float64)
    r0 = b - op.matvec(x0vec) if x0 is not None else b.copy()
    if np.max(np.abs(r0)) <= opts.tol:
        return SolveResult(
            x=op.recover(x0vec), status="converged", objective=float(np.sum(np.abs(r0))),
            outer_iters=0, inner_iters=0, log=[], history=[],
        )

    state = l1_init(op, b, x0)
    state.record("optimal", 0, outer_k=0)
    state.summarize(optimal=True, inner_iters=0)
    status = "iteration_limit"
    inner_total = 0
    stagnated = False

    for _ in range(opts.max_outer):
        if state.basis.breakdown:
            status = _exhausted_status(state)
            break
        _, av_new = state.basis.expand()
        if av_new is None:
            status = _exhausted_status(state)
            break
        try:
            l1_expand_subspace(state)
        except StagnationError:
            stagnated = True
            status = "stagnated"
            break
        state.outer_iters += 1
        state.record("expand", 0)
        if state.objective <= opts.tol:
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
            event = l1_pivot(state, opts.dual_tol)
            if event == "optimal":
                optimal_here = True
                break
            iters_here += 1
            inner_total += 1
            state.inner_iters = inner_total
            if iters_here % 256 == 0:
                _resync(state)
            state.record(event, iters_here)
            if state.objective <= opts.tol:
                break

        _resync(state)
        if optimal_here:
            state.record("optimal", iters_here)
        state.summarize(optimal=optimal_here, inner_iters=iters_here)
        if optimal_here and collect_kkt:
            state.history[-1].kkt_violation = l1_check_kkt(state).max_violation()
        if state.objective <= opts.tol:
            status = "converged"
            break
        if inner_total >= opts.max_inner:
            status = "iteration_limit"
            break

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
        x=x, status=status, objective=state.objective,
        outer_iters=state.outer_iters, inner_iters=inner_total,
        log=state.log, history=state.history,
    )
