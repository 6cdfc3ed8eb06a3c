"""Acceptance criteria, one test per criterion.

Each test records a ``[PASS]``/``[FAIL]`` line (see ``conftest.record``)
that is printed in the terminal summary, then asserts.
"""
import csv
import time

import numpy as np
import pytest

from avekit.benchmark import parse_grid, run_sweep
from avekit.cli import main
from avekit.linalg import SparseMatrix, abs_vec
from avekit.problems import ProblemSpec, build_convection_diffusion, make_problem
from avekit.reference_values import reference_alpha
from avekit.solvers_ave import (SolverConfig, picard_hss_solve, picard_shss_residual_solve,
                                picard_shss_solve)
from avekit.solvers_linear import InnerPolicy
from avekit.spectral import estimate_required_inner_iterations, spectral_bounds
from oracles import random_pd_nonsymmetric, shss_matrices, stencil_matrix

TABLE_MS = (10, 20, 40)


def reproduce_rows(tmp_path, table, ms, *extra):
    out = tmp_path / f"{table}.csv"
    code = main(["reproduce", "--table", table, "--m", ",".join(map(str, ms)), "--out", str(out),
                 *extra])
    with open(out, newline="") as fh:
        return code, list(csv.DictReader(fh))


def band(m, q):
    """Allowed |IT - published IT| for a cell."""
    if q == 100:
        return None  # relative band
    return 2 if m in (10, 20) else 5


def check_cells(rows, rel_band_q100=0.20, band_fn=band):
    bad = []
    for r in rows:
        m, q = int(r["m"]), float(r["q"])
        it, ref = int(r["IT"]), int(r["published_IT"])
        tol = band_fn(m, q)
        limit = rel_band_q100 * ref if tol is None else tol
        ok = r["status"] == "converged" and float(r["RES"]) <= 1e-7 and abs(it - ref) <= limit
        if not ok:
            bad.append(f"{r['method']} m={m} q={q:g}: IT {it} vs {ref} ({r['status']})")
    return bad


def table_detail(rows, seconds, bad):
    exact = sum(int(r["IT"]) == int(r["published_IT"]) for r in rows)
    worst = max(abs(int(r["IT_diff"])) for r in rows)
    msg = f"{len(rows)} cells, {exact} exact, max |IT diff| {worst}, {seconds:.1f}s"
    return msg + ("" if not bad else "; out of band: " + "; ".join(bad))


def test_criterion_1_reproduce_t3(tmp_path, record):
    t0 = time.perf_counter()
    code, rows = reproduce_rows(tmp_path, "t3", TABLE_MS)
    seconds = time.perf_counter() - t0
    bad = check_cells(rows)
    shss10 = [r for r in rows if r["method"] == "picard_shss" and r["m"] == "10" and r["q"] == "0.0"]
    passed = (code == 0 and len(rows) == 24 and not bad and seconds < 30
              and int(shss10[0]["IT"]) in range(35, 40))
    record("1 reproduce t3 (p=0)", passed, table_detail(rows, seconds, bad))
    assert passed


def test_criterion_2_reproduce_t4(tmp_path, record):
    t0 = time.perf_counter()
    code, rows = reproduce_rows(tmp_path, "t4", TABLE_MS)
    seconds = time.perf_counter() - t0
    bad = check_cells(rows)

    def cell(method, m, q):
        return [int(r["IT"]) for r in rows
                if r["method"] == method and int(r["m"]) == m and float(r["q"]) == q][0]

    examples = abs(cell("picard_shss", 10, 0) - 21) <= 2 and abs(cell("picard_hss", 20, 10) - 27) <= 3
    passed = code == 0 and len(rows) == 24 and not bad and examples
    record("2 reproduce t4 (p=-1)", passed, table_detail(rows, seconds, bad))
    assert passed


@pytest.mark.slow
def test_criterion_2_reproduce_t4_m80(tmp_path, record):
    # published counts for q = 0, 1 are 614..908, so the 500 cap is lifted here
    t0 = time.perf_counter()
    code, rows = reproduce_rows(tmp_path, "t4", (80,), "--max-outer", "1000")
    seconds = time.perf_counter() - t0
    bad = check_cells(rows, rel_band_q100=0.10, band_fn=lambda m, q: None)
    passed = code == 0 and len(rows) == 8 and not bad
    record("2 reproduce t4 m=80 (optional, max_outer 1000)", passed, table_detail(rows, seconds, bad))
    assert passed


def _per_outer_seconds(solver, problem, alpha, repeats=3):
    best = np.inf
    for _ in range(repeats):
        rep = solver(problem, SolverConfig(alpha=alpha))
        assert rep.converged
        best = min(best, rep.wall_seconds / rep.outer_iterations)
    return best


def test_criterion_3_cost_per_outer_step(record):
    details, passed = [], True
    for p in (0.0, -1.0):
        for q in (0.0, 1.0, 10.0, 100.0):
            prob = make_problem(ProblemSpec(40, q, p))
            shss = _per_outer_seconds(picard_shss_residual_solve, prob,
                                      reference_alpha(p, q, "picard_shss", 40))
            hss = _per_outer_seconds(picard_hss_solve, prob,
                                     reference_alpha(p, q, "picard_hss", 40))
            passed &= shss <= hss
            details.append(f"p={p:g},q={q:g}: {1e3 * shss:.2f}/{1e3 * hss:.2f}ms")
    record("3 per-outer cost SHSS <= HSS at m=40", passed, "SHSS/HSS " + ", ".join(details))
    assert passed


def test_criterion_4_convergence(record):
    rng = np.random.default_rng(2024)
    rhos = []
    for _ in range(50):
        n = int(rng.integers(2, 21))
        a = random_pd_nonsymmetric(rng, n)
        floor = spectral_bounds(SparseMatrix.from_dense(a)).alpha_floor
        _, _, T = shss_matrices(a, floor * 1.01 + 0.1)
        rhos.append(np.abs(np.linalg.eigvals(T)).max())
    contract = max(rhos) < 1

    monotone, runs = True, 0
    for m in (3, 4, 5):
        for q in (0.0, 1.0, 10.0):
            prob = make_problem(ProblemSpec(m, q, 1.0))
            bounds = spectral_bounds(prob.A)
            assert bounds.eta < 1
            alpha = bounds.alpha_floor * 1.01 + 0.1
            need = estimate_required_inner_iterations(prob.A, alpha, bounds.eta)
            for sweeps in (need, need + 2):
                cfg = SolverConfig(alpha=alpha, record_iterates=True,
                                   inner=InnerPolicy(sweeps, inner_mode="fixed_count"))
                rep = picard_shss_solve(prob, cfg)
                errs = [np.linalg.norm(x - prob.exact) for x in rep.iterates]
                monotone &= rep.converged and all(b < a for a, b in zip(errs, errs[1:]))
                runs += 1
    passed = contract and monotone
    record("4 convergence suite", passed,
           f"max rho over 50 matrices {max(rhos):.4f}; strict error decrease in {runs} runs: "
           f"{monotone}")
    assert passed


def test_criterion_5_oracle_equivalence(record):
    worst_forms = 0.0
    for m, q, p in [(2, 0, 0), (3, 10, 0.5), (4, 1, 0), (4, 100, 0), (4, 10, 1)]:
        prob = make_problem(ProblemSpec(m, q, p))
        alpha = spectral_bounds(prob.A).alpha_floor * 1.5 + 1.0
        for sweeps in (1, 3, 10):
            cfg = SolverConfig(alpha=alpha, max_outer=20, outer_rtol=1e-15, record_iterates=True,
                               inner=InnerPolicy(sweeps, inner_mode="fixed_count"))
            d = picard_shss_solve(prob, cfg).iterates
            r = picard_shss_residual_solve(prob, cfg).iterates
            assert len(d) == len(r)
            for x, y in zip(d, r):
                worst_forms = max(worst_forms, np.max(np.abs(x - y)) / max(1.0, np.abs(x).max()))

    rng = np.random.default_rng(55)
    worst_sum = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 17))
        a = random_pd_nonsymmetric(rng, n)
        M, _, T = shss_matrices(a, float(rng.uniform(0.5, 6.0)))
        Minv, Ainv = np.linalg.inv(M), np.linalg.inv(a)
        for l in range(1, 9):
            lhs = sum(np.linalg.matrix_power(T, j) @ Minv for j in range(l))
            rhs = (np.eye(n) - np.linalg.matrix_power(T, l)) @ Ainv
            worst_sum = max(worst_sum, np.max(np.abs(lhs - rhs)))

    x = rng.standard_normal((10_000, 12)) * rng.uniform(0.01, 100, (10_000, 1))
    y = rng.standard_normal((10_000, 12)) * rng.uniform(0.01, 100, (10_000, 1))
    lip = np.all(np.linalg.norm(abs_vec(x) - abs_vec(y), axis=1) <= np.linalg.norm(x - y, axis=1))

    passed = worst_forms <= 1e-10 and worst_sum <= 1e-10 and lip
    record("5 oracle equivalence", passed,
           f"direct vs residual {worst_forms:.1e}, geometric sum {worst_sum:.1e}, "
           f"Lipschitz on 10^4 pairs: {bool(lip)}")
    assert passed


def test_criterion_6_generator(record):
    stencil_ok = all(
        np.array_equal(build_convection_diffusion(ProblemSpec(m, q, p)).to_dense(),
                       stencil_matrix(m, q, p))
        for m in (1, 2, 3, 4) for q in (0.0, 1.0, 10.0, 100.0) for p in (0.0, -1.0))
    worst = 0.0
    for m in TABLE_MS:
        for q in (0.0, 1.0, 10.0, 100.0):
            for p in (0.0, -1.0):
                worst = max(worst, make_problem(ProblemSpec(m, q, p)).exact_residual())
    m2 = make_problem(ProblemSpec(2))
    m2_ok = (np.array_equal(m2.A.to_dense(), [[4, -1, -1, 0], [-1, 4, 0, -1], [-1, 0, 4, -1],
                                              [0, -1, -1, 4]])
             and np.array_equal(m2.b, [-4.0, 3, -18, 13]))
    passed = stencil_ok and worst <= 1e-10 and m2_ok
    record("6 generator fidelity", passed,
           f"stencil match {stencil_ok}, worst exact-solution RES {worst:.1e}, m=2 instance {m2_ok}")
    assert passed


def test_criterion_7_sweep(record):
    prob = make_problem(ProblemSpec(10))
    base = SolverConfig(alpha=1.0)
    sweep = run_sweep(prob, base, parse_grid("4:8:0.25"))
    at_published = picard_shss_residual_solve(prob, SolverConfig(alpha=5.745)).outer_iterations
    passed = sweep.best_iterations <= at_published
    record("7 sweep over [4, 8] step 0.25", passed,
           f"best alpha {sweep.best_alpha} with IT {sweep.best_iterations}; "
           f"IT at alpha=5.745 is {at_published}")
    assert passed
