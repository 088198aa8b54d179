"""Command-line interface: problem generation, solves, reference runs and
side-by-side comparisons with CSV logs.

Exit codes: 0 when the run converged (or exhausted the subspace exactly),
2 on an iteration-limit exit, 1 on any error.
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from .gmres import gmres_normal_equations, gmres_run
from .krylov import KrylovBasis, PreconditionedOperator
from .l1 import minimize_residual_l1
from .linf import minimize_residual_linf
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .oracle import oracle_projected_l1, oracle_projected_linf
from .problems import CorruptionSpec, build_ic0, gen_blur_square, gen_deblur_two_stencil, jacobi_factor
from .runlog import SolveOptions, write_log_csv


@dataclass
class ExperimentConfig:
    """One experiment invocation: problem sources, budgets and logging."""

    norm: str  # linf | l1 | gmres | compare
    matrix_path: str
    rhs_path: str
    x0_path: str | None = None
    max_outer: int = 100
    max_inner: int = 1_000_000
    cap_inner: int | None = None
    tol: float = 1e-10
    precond: str = "none"  # none | jacobi | ic0
    seed: int = 0
    log_path: str | None = None

    def __post_init__(self):
        if self.norm not in ("linf", "l1", "gmres", "compare"):
            raise ValueError(f"unknown norm/mode: {self.norm}")
        if self.precond not in ("none", "jacobi", "ic0"):
            raise ValueError(f"unknown preconditioner: {self.precond}")
        self.options = SolveOptions(
            max_outer=self.max_outer,
            max_inner=self.max_inner,
            cap_inner=self.cap_inner,
            tol=self.tol,
        )

    @classmethod
    def from_args(cls, args, norm):
        return cls(
            norm=norm,
            matrix_path=args.matrix,
            rhs_path=args.rhs,
            x0_path=args.x0,
            max_outer=args.max_outer,
            max_inner=args.max_inner,
            cap_inner=args.cap_inner,
            tol=args.tol,
            precond=args.precond,
            log_path=args.log,
        )


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; reserve 2 for iteration limits
        if exc.code not in (0, None):
            return 1
        return 0
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error funnel
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="krylovlp",
        description="Krylov-subspace residual minimization in the max and "
        "absolute-value norms, with GMRES reference runs",
    )
    sub = parser.add_subparsers(required=True)

    solve = sub.add_parser("solve", help="run one of the two subspace simplex solvers")
    solve.add_argument("--norm", choices=["linf", "l1"], required=True)
    _add_problem_flags(solve)
    solve.set_defaults(func=_cmd_solve)

    gmres = sub.add_parser("gmres", help="least-squares reference run (normal equations when rectangular)")
    _add_problem_flags(gmres)
    gmres.set_defaults(func=_cmd_gmres)

    compare = sub.add_parser("compare", help="run both solvers plus the reference and tabulate per-k norms")
    _add_problem_flags(compare)
    compare.set_defaults(func=_cmd_compare)

    oracle = sub.add_parser("oracle", help="brute-force optimum of the projected problem (small sizes)")
    oracle.add_argument("--norm", choices=["linf", "l1"], required=True)
    oracle.add_argument("--matrix", required=True)
    oracle.add_argument("--rhs", required=True)
    oracle.add_argument("--k", type=int, required=True)
    oracle.set_defaults(func=_cmd_oracle)

    gen = sub.add_parser("gen", help="generate test problems")
    gensub = gen.add_subparsers(required=True)
    blur = gensub.add_parser("blur", help="square blur operator and blurred rhs")
    blur.add_argument("--grid", type=int, required=True)
    blur.add_argument("--out-prefix", required=True)
    blur.add_argument("--seed", type=int, default=0)
    blur.set_defaults(func=_cmd_gen_blur)
    deblur = gensub.add_parser("deblur2", help="two-stencil overdetermined deblur problem")
    deblur.add_argument("--grid", type=int, required=True)
    deblur.add_argument("--corrupt-frac", type=float, default=0.01)
    deblur.add_argument("--corrupt-factor", type=float, default=0.999)
    deblur.add_argument("--out-prefix", required=True)
    deblur.add_argument("--seed", type=int, default=0)
    deblur.set_defaults(func=_cmd_gen_deblur)

    return parser


def _add_problem_flags(cmd):
    cmd.add_argument("--matrix", required=True)
    cmd.add_argument("--rhs", required=True)
    cmd.add_argument("--x0", default=None)
    cmd.add_argument("--max-outer", type=int, default=100)
    cmd.add_argument("--max-inner", type=int, default=1_000_000)
    cmd.add_argument("--cap-inner", type=int, default=None)
    cmd.add_argument("--tol", type=float, default=1e-10)
    cmd.add_argument("--precond", choices=["none", "jacobi", "ic0"], default="none")
    cmd.add_argument("--log", default=None)


def _load_problem(cfg):
    a = read_matrix_market(cfg.matrix_path)
    b = read_vector(cfg.rhs_path)
    if b.shape[0] != a.nrows:
        raise ValueError("rhs length does not match the matrix row count")
    op = a
    x0 = read_vector(cfg.x0_path) if cfg.x0_path else None
    if cfg.precond != "none":
        factor = jacobi_factor(a) if cfg.precond == "jacobi" else build_ic0(a)
        op = PreconditionedOperator(a, factor, transpose_factor=True)
        if x0 is not None:
            x0 = factor.rmatvec(x0)  # into the preconditioned coordinates
    return a, op, b, x0


def _cmd_solve(args):
    cfg = ExperimentConfig.from_args(args, args.norm)
    a, op, b, x0 = _load_problem(cfg)
    runner = minimize_residual_linf if cfg.norm == "linf" else minimize_residual_l1
    result = runner(op, b, x0, options=cfg.options)
    if cfg.log_path:
        write_log_csv(cfg.log_path, result.log, cfg.norm)
    print(
        f"status={result.status} objective={result.objective:.12e} "
        f"outer={result.outer_iters} inner={result.inner_iters}"
    )
    if result.converged:
        return 0
    return 2


def _cmd_gmres(args):
    cfg = ExperimentConfig.from_args(args, "gmres")
    a, op, b, x0 = _load_problem(cfg)
    if op.is_square:
        trace = gmres_run(op, b, x0, max_k=cfg.max_outer, tol=cfg.tol)
    else:
        trace = gmres_normal_equations(op, b, x0, max_k=cfg.max_outer, tol=cfg.tol)
    if cfg.log_path:
        _write_gmres_csv(cfg.log_path, trace)
    final = trace.residual_2norms[-1]
    print(f"steps={trace.steps} final_l2={final:.12e} breakdown={trace.breakdown}")
    return 0 if (final <= cfg.tol or trace.breakdown) else 2


def _write_gmres_csv(path, trace):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["outer_k", "inner_iter", "event", "obj_linf", "obj_l1", "obj_l2", "wall_time_ms"])
        for k in range(len(trace.residual_2norms)):
            writer.writerow(
                [
                    k,
                    0,
                    "expand",
                    f"{trace.residual_infnorms[k]:.17g}",
                    f"{trace.residual_1norms[k]:.17g}",
                    f"{trace.residual_2norms[k]:.17g}",
                    "",
                ]
            )


COMPARE_FIELDS = [
    "k",
    "linf_obj",
    "linf_r2",
    "l1_obj",
    "l1_r2",
    "gmres_r2",
    "gmres_rinf",
    "gmres_r1",
    "gmresne_r2",
    "lemma_linf_margin",
    "lemma_l1_margin",
]


def run_compare(op, b, x0=None, options=None, original=None):
    """Run both solvers and the reference(s) on one problem.

    Returns a list of per-k row dicts (see COMPARE_FIELDS): all norms are
    measured on the original residual; the margin columns are the lemma
    bounds minus the solver objectives (nonnegative when the bounds hold).
    """
    opts = options or SolveOptions()
    m = b.shape[0]
    res_inf = minimize_residual_linf(op, b, x0, options=opts)
    res_l1 = minimize_residual_l1(op, b, x0, options=opts)
    trace_sq = gmres_run(op, b, x0, max_k=opts.max_outer) if op.is_square else None
    trace_ne = gmres_normal_equations(op, b, x0, max_k=opts.max_outer)

    inf_by_k = {h.k: h for h in res_inf.history if h.optimal}
    l1_by_k = {h.k: h for h in res_l1.history if h.optimal}
    rows = []
    max_k = max(len(trace_ne.residual_2norms) - 1, *inf_by_k, *l1_by_k)
    for k in range(max_k + 1):
        row = {f: "" for f in COMPARE_FIELDS}
        row["k"] = k
        hi = inf_by_k.get(k)
        h1 = l1_by_k.get(k)
        if hi:
            row["linf_obj"] = hi.objective
            row["linf_r2"] = hi.residual_norm_2
        if h1:
            row["l1_obj"] = h1.objective
            row["l1_r2"] = h1.residual_norm_2
        if trace_sq and k < len(trace_sq.residual_2norms):
            row["gmres_r2"] = trace_sq.residual_2norms[k]
            row["gmres_rinf"] = trace_sq.residual_infnorms[k]
            row["gmres_r1"] = trace_sq.residual_1norms[k]
        if k < len(trace_ne.residual_2norms):
            row["gmresne_r2"] = trace_ne.residual_2norms[k]
        bound_inf = row["gmres_r2"] if row["gmres_r2"] != "" else row["gmresne_r2"]
        if hi and bound_inf != "":
            row["lemma_linf_margin"] = bound_inf - hi.objective
        if h1 and row["gmresne_r2"] != "":
            row["lemma_l1_margin"] = np.sqrt(m) * row["gmresne_r2"] - h1.objective
        rows.append(row)
    return rows


def _cmd_compare(args):
    cfg = ExperimentConfig.from_args(args, "compare")
    a, op, b, x0 = _load_problem(cfg)
    rows = run_compare(op, b, x0, options=cfg.options)
    if cfg.log_path:
        with open(cfg.log_path, "w", newline="", encoding="ascii") as fh:
            writer = csv.DictWriter(fh, fieldnames=COMPARE_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
    for row in rows:
        print(
            f"k={row['k']:>3} linf={_fmt(row['linf_obj'])} l1={_fmt(row['l1_obj'])} "
            f"gmres_l2={_fmt(row['gmres_r2'] if row['gmres_r2'] != '' else row['gmresne_r2'])} "
            f"margins=({_fmt(row['lemma_linf_margin'])}, {_fmt(row['lemma_l1_margin'])})"
        )
    return 0


def _fmt(value):
    return f"{value:.6e}" if value != "" else "-"


def _cmd_oracle(args):
    a = read_matrix_market(args.matrix)
    b = read_vector(args.rhs)
    basis = KrylovBasis(a, b.copy())
    for _ in range(args.k):
        if basis.breakdown:
            break
        basis.expand()
    av = np.array(basis.av[:, : basis.k])
    if args.norm == "linf":
        value, y = oracle_projected_linf(av, b)
        print(f"k={basis.k} gamma_star={value:.12e}")
    else:
        value, y = oracle_projected_l1(av, b)
        print(f"k={basis.k} objective_star={value:.12e}")
    print("y_star=" + " ".join(f"{v:.12e}" for v in y))
    return 0


def _cmd_gen_blur(args):
    a, b = gen_blur_square(args.grid, seed=args.seed)
    write_matrix_market(a, f"{args.out_prefix}.mtx")
    write_vector(b, f"{args.out_prefix}_b.txt")
    print(f"wrote {args.out_prefix}.mtx ({a.nrows}x{a.ncols}, nnz={a.nnz}) and {args.out_prefix}_b.txt")
    return 0


def _cmd_gen_deblur(args):
    spec = CorruptionSpec(fraction=args.corrupt_frac, factor=args.corrupt_factor, seed=args.seed)
    a, b, b_clean = gen_deblur_two_stencil(args.grid, corruption=spec, seed=args.seed)
    write_matrix_market(a, f"{args.out_prefix}.mtx")
    write_vector(b, f"{args.out_prefix}_b.txt")
    write_vector(b_clean, f"{args.out_prefix}_bclean.txt")
    print(
        f"wrote {args.out_prefix}.mtx ({a.nrows}x{a.ncols}, nnz={a.nnz}), "
        f"{args.out_prefix}_b.txt and {args.out_prefix}_bclean.txt"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
