"""Run options, per-iteration records and CSV logging shared by the solvers."""

import csv
from dataclasses import dataclass, field


@dataclass
class SolveOptions:
    """Iteration budgets and tolerances.

    ``max_inner`` is the global inner-iteration budget for the whole run;
    ``cap_inner`` bounds the inner iterations spent per subspace and forces
    an early expansion when hit (None = optimize fully).
    """

    max_outer: int = 100
    max_inner: int = 1_000_000
    cap_inner: int | None = None
    tol: float = 1e-10
    dual_tol: float = 1e-10

    def __post_init__(self):
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration budgets must be >= 1")
        if self.cap_inner is not None and self.cap_inner < 1:
            raise ValueError("cap_inner must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


@dataclass
class ConvergenceRecord:
    outer_k: int
    inner_iter: int
    objective: float
    event: str  # expand | pivot | degenerate | optimal
    wall_time: float


@dataclass
class SubspaceSummary:
    """State of a run when work on one subspace dimension finished.

    ``kkt_violation`` is filled only when the run was asked to certify its
    per-subspace optima (collect_kkt=True) and the optimum came from dual
    certification."""

    k: int
    objective: float
    optimal: bool
    inner_iters: int
    residual_norm_1: float
    residual_norm_2: float
    residual_norm_inf: float
    kkt_violation: float | None = None


@dataclass
class SolveResult:
    x: object
    status: str  # converged | subspace_optimal | iteration_limit | stagnated
    objective: float
    outer_iters: int
    inner_iters: int
    log: list
    history: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status in ("converged", "subspace_optimal")


CSV_FIELDS = ["outer_k", "inner_iter", "event", "obj_linf", "obj_l1", "obj_l2", "wall_time_ms"]


def write_log_csv(path, records, norm):
    """One row per record; the objective lands in the column for ``norm``
    (one of linf, l1, l2), other norm columns stay empty."""
    col = {"linf": "obj_linf", "l1": "obj_l1", "l2": "obj_l2"}[norm]
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            row = {
                "outer_k": rec.outer_k,
                "inner_iter": rec.inner_iter,
                "event": rec.event,
                "obj_linf": "",
                "obj_l1": "",
                "obj_l2": "",
                "wall_time_ms": f"{rec.wall_time * 1000.0:.6g}",
            }
            row[col] = f"{rec.objective:.17g}"
            writer.writerow(row)


def read_log_csv(path):
    with open(path, "r", newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))
