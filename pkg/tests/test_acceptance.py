"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
appear; shared runs are module-scoped fixtures so later criteria reuse the
earlier solves.  Monotonicity tolerances are relative (1e-12 * (1+|obj|)).
"""

import time

import numpy as np
import pytest

from krylovlp import (
    CorruptionSpec,
    SolveOptions,
    SparseMatrix,
    gen_blur_square,
    gen_deblur_two_stencil,
    gmres_normal_equations,
    gmres_run,
    minimize_residual_l1,
    minimize_residual_linf,
    oracle_projected_l1,
    oracle_projected_linf,
)
from krylovlp.krylov import KrylovBasis
from krylovlp.qrupdate import qr_factor

N_INSTANCES = 20
INSTANCE_M, INSTANCE_N = 20, 15


def _report(num, description, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {description}"
    if detail:
        line += f" [{detail}]"
    print(line, flush=True)
    assert ok, line


def _instance(seed):
    rng = np.random.default_rng(seed)
    a = SparseMatrix.from_dense(rng.standard_normal((INSTANCE_M, INSTANCE_N)))
    b = rng.standard_normal(INSTANCE_M)
    return a, b


def _av_columns(a, b, k):
    basis = KrylovBasis(a, b.copy())
    while basis.k < k and not basis.breakdown:
        basis.expand()
    return np.array(basis.av[:, : basis.k])


@pytest.fixture(scope="module")
def linf_oracle_runs():
    t0 = time.perf_counter()
    out = []
    for i in range(N_INSTANCES):
        a, b = _instance(1000 + i)
        res = minimize_residual_linf(
            a, b, options=SolveOptions(max_outer=6, tol=1e-14), collect_kkt=True
        )
        av = _av_columns(a, b, 6)
        oracles = {k: oracle_projected_linf(av[:, :k], b)[0] for k in range(1, 7)}
        out.append((res, oracles))
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def l1_oracle_runs():
    t0 = time.perf_counter()
    out = []
    for i in range(N_INSTANCES):
        a, b = _instance(2000 + i)
        res = minimize_residual_l1(
            a, b, options=SolveOptions(max_outer=5, tol=1e-14), collect_kkt=True
        )
        av = _av_columns(a, b, 5)
        oracles = {k: oracle_projected_l1(av[:, :k], b)[0] for k in range(1, 6)}
        out.append((res, oracles))
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def blur32_runs():
    t0 = time.perf_counter()
    a, b = gen_blur_square(32, seed=4)
    res_inf = minimize_residual_linf(
        a, b, options=SolveOptions(max_outer=40, tol=1e-13), collect_kkt=True
    )
    res_l1 = minimize_residual_l1(
        a, b, options=SolveOptions(max_outer=40, tol=1e-13), collect_kkt=True
    )
    trace = gmres_run(a, b, max_k=40)
    trace_ne = gmres_normal_equations(a, b, max_k=40)
    return (b.shape[0], res_inf, res_l1, trace, trace_ne), time.perf_counter() - t0


@pytest.fixture(scope="module")
def rect_runs():
    rng = np.random.default_rng(93)
    a = SparseMatrix.from_dense(rng.standard_normal((100, 90)))
    b = rng.standard_normal(100)
    res_inf = minimize_residual_linf(a, b, options=SolveOptions(max_outer=70, tol=1e-14))
    res_l1 = minimize_residual_l1(a, b, options=SolveOptions(max_outer=70, tol=1e-14))
    return a, b, res_inf, res_l1


@pytest.fixture(scope="module")
def blur64_linf():
    a, b = gen_blur_square(64, seed=8)
    return minimize_residual_linf(a, b, options=SolveOptions(max_outer=50, tol=1e-13))


@pytest.fixture(scope="module")
def deblur32_runs():
    spec = CorruptionSpec(fraction=0.01, factor=0.999, seed=9)
    a, b_corr, b_clean = gen_deblur_two_stencil(32, corruption=spec, seed=9)
    opts = SolveOptions(max_outer=60, tol=1e-13)
    corrupted = minimize_residual_l1(a, b_corr, options=opts)
    clean = minimize_residual_l1(a, b_clean, options=opts)
    capped = minimize_residual_l1(
        a, b_corr, options=SolveOptions(max_outer=60, cap_inner=500, tol=1e-13)
    )
    return corrupted, clean, capped


def test_criterion_01_linf_oracle_equivalence(linf_oracle_runs):
    runs, elapsed = linf_oracle_runs
    worst = 0.0
    ok = True
    for res, oracles in runs:
        by_k = {h.k: h for h in res.history if h.optimal}
        for k in range(1, 7):
            if k not in by_k:
                ok = False
                continue
            err = abs(by_k[k].objective - oracles[k]) / (1.0 + oracles[k])
            worst = max(worst, err)
            ok = ok and err <= 1e-8
    ok = ok and elapsed <= 30.0
    _report(
        1,
        "max-norm solver matches the brute-force optimum on 20 seeded "
        "20x15 instances, k = 1..6",
        ok,
        f"worst rel err {worst:.2e}, {elapsed:.1f}s <= 30s",
    )


def test_criterion_02_l1_oracle_equivalence(l1_oracle_runs):
    runs, elapsed = l1_oracle_runs
    worst = 0.0
    ok = True
    for res, oracles in runs:
        by_k = {h.k: h for h in res.history if h.optimal}
        for k in range(1, 6):
            if k not in by_k:
                ok = False
                continue
            err = abs(by_k[k].objective - oracles[k]) / (1.0 + oracles[k])
            worst = max(worst, err)
            ok = ok and err <= 1e-8
    ok = ok and elapsed <= 60.0
    _report(
        2,
        "absolute-value solver matches the brute-force optimum on 20 "
        "seeded 20x15 instances, k = 1..5",
        ok,
        f"worst rel err {worst:.2e}, {elapsed:.1f}s <= 60s",
    )


def test_criterion_03_active_counts(rect_runs):
    a, b, res_inf, res_l1 = rect_runs
    final_inf = res_inf.history[-1]
    final_l1 = res_l1.history[-1]
    ok = final_inf.k == 70 and final_inf.optimal
    ok = ok and final_l1.k == 70 and final_l1.optimal
    r = b - a.matvec(res_inf.x)
    gamma = final_inf.objective
    active = int(np.sum(np.abs(np.abs(r) - gamma) <= 1e-8 * (1.0 + gamma)))
    r1 = b - a.matvec(res_l1.x)
    zeros = int(np.sum(np.abs(r1) <= 1e-8 * np.max(np.abs(b))))
    ok = ok and active >= 71 and zeros >= 70
    _report(
        3,
        "active rows number k+1 = 71 (max norm) and zero residuals k = 70 "
        "(absolute norm) on the seeded 100x90 instance at k = 70",
        ok,
        f"active={active} (exactly 71: {active == 71}), zeros={zeros} "
        f"(exactly 70: {zeros == 70})",
    )


def test_criterion_04_reference_bounds_on_blur(blur32_runs):
    (m, res_inf, res_l1, trace, trace_ne), elapsed = blur32_runs
    sqrt_m = np.sqrt(m)
    ok = True
    checked = 0
    worst_inf = -np.inf
    worst_l1 = -np.inf
    for h in res_inf.history:
        if h.k < 1 or h.k > 40 or not h.optimal or h.k > trace.steps:
            continue
        gap = h.objective - trace.residual_2norms[h.k]
        worst_inf = max(worst_inf, gap)
        ok = ok and gap <= 1e-10
        checked += 1
    for h in res_l1.history:
        if h.k < 1 or h.k > 40 or not h.optimal or h.k > trace_ne.steps:
            continue
        gap = h.objective - sqrt_m * trace_ne.residual_2norms[h.k]
        worst_l1 = max(worst_l1, gap)
        ok = ok and gap <= 1e-8
        checked += 1
    ok = ok and checked >= 78 and elapsed <= 60.0
    _report(
        4,
        "reference-bound chain on the grid-32 blur problem, k = 1..40",
        ok,
        f"{checked} bounds, worst gaps {worst_inf:.2e} / {worst_l1:.2e}, "
        f"{elapsed:.1f}s <= 60s",
    )


def test_criterion_05_qr_update_robustness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(55)
    s = 30
    dense = rng.standard_normal((s, s))
    factors = qr_factor(dense)
    worst_solve = 0.0
    worst_orth = 0.0
    for step in range(500):
        kind = rng.integers(3)
        if kind == 0 or dense.shape[0] >= 60:
            u = rng.standard_normal(dense.shape[0])
            v = rng.standard_normal(dense.shape[0])
            factors.rank_one_update(u, v)
            dense = dense + np.outer(u, v)
        elif kind == 1:
            j = int(rng.integers(dense.shape[0]))
            row = rng.standard_normal(dense.shape[0])
            factors.replace_row(j, row)
            dense[j] = row
        else:
            col = rng.standard_normal(dense.shape[0])
            row = rng.standard_normal(dense.shape[0] + 1)
            factors.expand(col, row)
            grown = np.zeros((dense.shape[0] + 1, dense.shape[0] + 1))
            grown[:-1, :-1] = dense
            grown[:-1, -1] = col
            grown[-1] = row
            dense = grown
        orth = np.linalg.norm(factors.q.T @ factors.q - np.eye(dense.shape[0]))
        worst_orth = max(worst_orth, orth)
        rhs = rng.standard_normal(dense.shape[0])
        got = factors.solve(rhs)
        want = qr_factor(dense).solve(rhs)
        rel = np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 1e-300)
        worst_solve = max(worst_solve, rel)
    elapsed = time.perf_counter() - t0
    ok = worst_solve <= 1e-10 and worst_orth <= 1e-10 and elapsed <= 10.0
    _report(
        5,
        "500 mixed QR updates up to 60x60 track the fresh factorization",
        ok,
        f"worst solve err {worst_solve:.2e}, worst drift {worst_orth:.2e}, "
        f"{elapsed:.1f}s <= 10s",
    )


def _log_monotone(log):
    worst = -np.inf
    prev = None
    for rec in log:
        if prev is not None:
            worst = max(worst, rec.objective - prev - 1e-12 * (1.0 + abs(prev)))
        prev = rec.objective
    return worst <= 0.0, worst


def test_criterion_06_monotonicity(linf_oracle_runs, l1_oracle_runs, blur32_runs,
                                   blur64_linf, deblur32_runs):
    runs = [res for res, _ in linf_oracle_runs[0]]
    runs += [res for res, _ in l1_oracle_runs[0]]
    _, res_inf, res_l1, _, _ = blur32_runs[0]
    runs += [res_inf, res_l1, blur64_linf, *deblur32_runs]
    ok = True
    worst = -np.inf
    for res in runs:
        good, w = _log_monotone(res.log)
        ok = ok and good
        worst = max(worst, w)
    _report(
        6,
        f"objective never increases across {len(runs)} logged runs "
        f"(1e-12 relative slack)",
        ok,
        f"worst signed excess {worst:.2e}",
    )


def test_criterion_07_kkt_certification(linf_oracle_runs, l1_oracle_runs, blur32_runs):
    violations = []
    for res, _ in linf_oracle_runs[0] + l1_oracle_runs[0]:
        violations += [h.kkt_violation for h in res.history if h.kkt_violation is not None]
    _, res_inf, res_l1, _, _ = blur32_runs[0]
    violations += [
        h.kkt_violation
        for h in res_inf.history + res_l1.history
        if h.kkt_violation is not None
    ]
    ok = len(violations) >= 250 and max(violations) <= 1e-8
    _report(
        7,
        "KKT measures stay within 1e-8 at every certified per-subspace optimum",
        ok,
        f"{len(violations)} optima, worst {max(violations):.2e}",
    )


def test_criterion_08_inner_iterations_stay_bounded(blur64_linf):
    per_outer = [h.inner_iters for h in blur64_linf.history if h.k >= 1]
    ok = len(per_outer) == 50 and max(per_outer) <= 1000
    _report(
        8,
        "max-norm inner iterations per subspace stay under 1000 on the "
        "grid-64 blur problem, k <= 50",
        ok,
        f"max per outer {max(per_outer)}, median {int(np.median(per_outer))}",
    )


def test_criterion_09_corruption_plateau(deblur32_runs):
    corrupted, clean, _ = deblur32_runs
    obj_corr = corrupted.history[-1].objective
    obj_clean = clean.history[-1].objective
    ok = (
        corrupted.history[-1].k == 60
        and clean.history[-1].k == 60
        and obj_corr >= 10.0 * obj_clean
    )
    _report(
        9,
        "corrupted deblur objective plateaus at least 10x above the clean "
        "run at k = 60",
        ok,
        f"corrupted {obj_corr:.3e} vs clean {obj_clean:.3e} "
        f"({obj_corr / max(obj_clean, 1e-300):.0f}x)",
    )


def test_criterion_10_inner_cap_behavior(deblur32_runs):
    corrupted, _, capped = deblur32_runs
    good_mono, worst = _log_monotone(capped.log)
    within_cap = all(h.inner_iters <= 500 for h in capped.history)
    final_ratio = capped.history[-1].objective / corrupted.history[-1].objective
    ok = (
        capped.history[-1].k == 60
        and within_cap
        and good_mono
        and final_ratio <= 1.5
    )
    _report(
        10,
        "capping inner iterations at 500 still lands within 1.5x of the "
        "uncapped objective at equal outer budget",
        ok,
        f"final ratio {final_ratio:.3f}, monotone excess {worst:.2e}",
    )
