#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the NumPy fallback.

Run after building the extension (pip install -e . --no-build-isolation):

    python benchmarks/bench_kernels.py [--repeats 7]

Times the individual kernels on representative sizes, then a full solver
run on a blur problem with each backend.
"""

import argparse
import time

import numpy as np


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def random_csr(rng, m, n, per_row=5):
    rows = np.repeat(np.arange(m), per_row)
    cols = rng.integers(0, n, size=m * per_row)
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    keep = np.ones(rows.shape[0], dtype=bool)
    keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    rows, cols = rows[keep], cols[keep]
    vals = rng.standard_normal(rows.shape[0])
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, cols.astype(np.int64), vals


def bench_kernels(repeats):
    from krylovlp._accel import fallback

    try:
        from krylovlp._accel import _core as compiled
    except ImportError:
        print("compiled core not built; nothing to compare")
        return

    rng = np.random.default_rng(0)
    rows = []

    m, n = 16384, 16384
    indptr, cols, vals = random_csr(rng, m, n)
    x = rng.standard_normal(n)
    y = rng.standard_normal(m)
    out_m, out_n = np.empty(m), np.empty(n)
    rows.append(
        (
            f"csr_matvec {m}x{n} (5/row)",
            best_of(lambda: compiled.csr_matvec(indptr, cols, vals, x, out_m), repeats),
            best_of(lambda: fallback.csr_matvec(indptr, cols, vals, x, out_m), repeats),
        )
    )
    rows.append(
        (
            f"csr_matvec_t {m}x{n}",
            best_of(lambda: compiled.csr_matvec_t(indptr, cols, vals, y, out_n), repeats),
            best_of(lambda: fallback.csr_matvec_t(indptr, cols, vals, y, out_n), repeats),
        )
    )

    nl = 4096
    dense = np.tril(rng.standard_normal((nl, nl)) * (rng.random((nl, nl)) < 0.002))
    dense[np.diag_indices(nl)] = 1.5
    rr, cc = np.nonzero(dense)
    ip = np.zeros(nl + 1, dtype=np.int64)
    np.add.at(ip, rr + 1, 1)
    np.cumsum(ip, out=ip)
    vv = dense[rr, cc]
    dp = ip[1:] - 1
    bvec = rng.standard_normal(nl)
    outl = np.empty(nl)
    rows.append(
        (
            f"csr_solve_lower {nl}",
            best_of(lambda: compiled.csr_solve_lower(ip, cc.astype(np.int64), vv, dp, bvec, outl, 0), repeats),
            best_of(lambda: fallback.csr_solve_lower(ip, cc.astype(np.int64), vv, dp, bvec, outl, 0), repeats),
        )
    )

    for s in (24, 72):
        b = rng.standard_normal((s, s))
        q0, r0 = np.linalg.qr(b)
        u = rng.standard_normal(s)
        v = rng.standard_normal(s)
        w = np.empty(s)

        def run(mod, q0=q0, r0=r0, u=u, v=v, w=w):
            q, r = np.ascontiguousarray(q0.copy()), np.ascontiguousarray(r0.copy())
            mod.qr_rank1_update(q, r, u, v, w)

        rows.append(
            (
                f"qr_rank1_update s={s}",
                best_of(lambda: run(compiled), repeats),
                best_of(lambda: run(fallback), repeats),
            )
        )

    mm = 16384
    gamma = 1.0
    residual = rng.uniform(-1, 1, mm)
    t = rng.standard_normal(mm)
    excluded = (rng.random(mm) < 0.01).astype(np.uint8)
    rows.append(
        (
            f"linf_ratio_test m={mm}",
            best_of(lambda: compiled.linf_ratio_test(residual, t, gamma, excluded), repeats),
            best_of(lambda: fallback.linf_ratio_test(residual, t, gamma, excluded), repeats),
        )
    )
    wv = rng.standard_normal(mm)
    nonbasic = (rng.random(mm) < 0.95).astype(np.uint8)
    rows.append(
        (
            f"l1_ratio_pos_min m={mm}",
            best_of(lambda: compiled.l1_ratio_pos_min(residual, wv, nonbasic), repeats),
            best_of(lambda: fallback.l1_ratio_pos_min(residual, wv, nonbasic), repeats),
        )
    )

    print(f"{'kernel':34s} {'compiled':>12s} {'fallback':>12s} {'speedup':>9s}")
    for name, tc, tp in rows:
        print(f"{name:34s} {tc * 1e6:10.1f}us {tp * 1e6:10.1f}us {tp / tc:8.1f}x")


def bench_solver(repeats):
    import os
    import subprocess
    import sys

    code = (
        "import time, numpy as np\n"
        "from krylovlp.problems import gen_blur_square\n"
        "from krylovlp.linf import minimize_residual_linf\n"
        "from krylovlp.runlog import SolveOptions\n"
        "import krylovlp\n"
        "a, b = gen_blur_square(32, seed=1)\n"
        "t0 = time.perf_counter()\n"
        "res = minimize_residual_linf(a, b, options=SolveOptions(max_outer=25, tol=1e-12))\n"
        "dt = time.perf_counter() - t0\n"
        "print(f'{krylovlp.BACKEND_NAME}: blur32 max-norm solve {dt:.3f}s "
        "({res.inner_iters} inner iterations, objective {res.objective:.3e})')\n"
    )
    for pure in ("0", "1"):
        env = dict(os.environ, KRYLOVLP_PURE=pure)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()
    bench_kernels(args.repeats)
    print()
    bench_solver(args.repeats)
