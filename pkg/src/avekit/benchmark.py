"""Shift-parameter sweeps and reproduction of the published benchmark tables."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .problems import ProblemSpec, make_problem
from .reference_values import METHODS, Q_VALUES, TABLES, reference_alpha, reference_iterations
from .solvers_ave import SolverConfig, Status, solve

__all__ = [
    "SweepResult",
    "SweepRow",
    "parse_grid",
    "reproduce",
    "run_sweep",
]


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    iterations: int
    inner_total: int
    residual: float
    seconds: float
    status: Status
    stage: int = 0

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    def rank_key(self):
        # fewest outer steps, then least inner work, then smallest shift
        return (self.iterations, self.inner_total, self.alpha)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    @property
    def best(self):
        ok = [r for r in self.rows if r.converged]
        return min(ok, key=SweepRow.rank_key) if ok else None

    @property
    def best_alpha(self):
        return None if self.best is None else self.best.alpha

    @property
    def best_iterations(self):
        return None if self.best is None else self.best.iterations

    def row_at(self, alpha):
        for r in self.rows:
            if math.isclose(r.alpha, alpha, rel_tol=0, abs_tol=1e-12):
                return r
        return None


def parse_grid(text):
    """Parse ``start:stop:step`` (stop inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(s) for s in parts)
        if not step > 0:
            raise ValueError("grid step must be positive")
        if stop < start:
            raise ValueError("grid stop is below start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(count)]
    else:
        values = [float(s) for s in text.split(",") if s.strip()]
    if not values:
        raise ValueError("empty alpha grid")
    if any(not v > 0 for v in values):
        raise ValueError("every alpha in the grid must be positive")
    return values


def _point(problem, cfg, stage):
    rep = solve(problem, cfg)
    return SweepRow(alpha=cfg.alpha, iterations=rep.outer_iterations,
                    inner_total=rep.inner_iteration_total, residual=rep.final_residual,
                    seconds=rep.wall_seconds, status=rep.status, stage=stage)


def _evaluate(problem, base, alphas, stage, jobs):
    cfgs = [replace(base, alpha=a, record_iterates=False) for a in alphas]
    if jobs <= 1 or len(cfgs) <= 1:
        return [_point(problem, c, stage) for c in cfgs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_point, [problem] * len(cfgs), cfgs, [stage] * len(cfgs)))


def _min_gap(values):
    v = sorted(set(values))
    gaps = [b - a for a, b in zip(v, v[1:])]
    return min(gaps) if gaps else None


def run_sweep(problem, base, alphas, refine=0, jobs=1):
    """Solve once per shift in ``alphas`` and pick the best.

    With ``refine > 0`` each further level re-grids ``best ± step`` at a
    tenth of the previous step. Already evaluated shifts are not re-run.
    """
    result = SweepResult(_evaluate(problem, base, alphas, 0, jobs))
    step = _min_gap(alphas)
    for level in range(1, refine + 1):
        if result.best is None or step is None:
            break
        centre = result.best.alpha
        step /= 10.0
        seen = {round(r.alpha, 12) for r in result.rows}
        fresh = [a for a in (round(centre + k * step, 12) for k in range(-10, 11))
                 if a > 0 and a not in seen]
        result.rows.extend(_evaluate(problem, base, fresh, level, jobs))
    return result


def reproduce(table_id, ms=(10, 20, 40), qs=Q_VALUES, base=None, jobs=1,
              relative_grid=None, refine=0):
    """Re-run one published table.

    ``t3``/``t4`` solve every ``(q, method, m)`` cell at the published
    shift and return the measured outer iteration count next to the
    published one. ``t1``/``t2`` sweep the shift over ``relative_grid``
    (multiples of the published value, which is always included) and
    report the best shift found.
    """
    if table_id not in TABLES:
        raise ValueError(f"unknown table {table_id!r}; choose from {sorted(TABLES)}")
    p, kind = TABLES[table_id]
    base = SolverConfig(alpha=1.0) if base is None else base
    rows = []
    for m in ms:
        for q in qs:
            problem = make_problem(ProblemSpec(m=int(m), q=float(q), p=p))
            for method in METHODS:
                a_ref = reference_alpha(p, q, method, m)
                it_ref = reference_iterations(p, q, method, m)
                cfg = replace(base, method=method, alpha=a_ref)
                if kind == "iterations":
                    rep = solve(problem, cfg)
                    rows.append({
                        "table": table_id, "method": method, "m": m, "q": q, "p": p,
                        "alpha": a_ref, "IT": rep.outer_iterations, "published_IT": it_ref,
                        "IT_diff": rep.outer_iterations - it_ref,
                        "inner_total": rep.inner_iteration_total,
                        "RES": rep.final_residual, "seconds": rep.wall_seconds,
                        "status": rep.status.value,
                    })
                else:
                    factors = relative_grid or [round(0.80 + 0.02 * i, 2) for i in range(21)]
                    grid = sorted({round(a_ref * f, 12) for f in factors} | {a_ref})
                    sw = run_sweep(problem, cfg, grid, refine=refine, jobs=jobs)
                    at_ref = sw.row_at(a_ref)
                    best = sw.best
                    rows.append({
                        "table": table_id, "method": method, "m": m, "q": q, "p": p,
                        "published_alpha": a_ref,
                        "best_alpha": None if best is None else best.alpha,
                        "best_IT": None if best is None else best.iterations,
                        "IT_at_published_alpha": at_ref.iterations,
                        "published_IT": it_ref,
                        "status": "converged" if best is not None else "max_outer_exceeded",
                    })
    return rows
