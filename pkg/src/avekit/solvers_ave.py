"""Outer solvers for the absolute value equation ``A x - |x| = b``.

Four methods share one stopping protocol (relative residual
``‖Ax - |x| - b‖₂ / ‖b‖₂ ≤ outer_rtol`` or ``max_outer`` steps):

``picard``
    ``x⁺ = A⁻¹(|x| + b)`` with a cached sparse LU of ``A``.
``picard_shss_direct``
    ``l`` single-step HSS sweeps started from the current iterate, on
    ``(αI + H) y⁺ = (αI - S) y + |x| + b``.
``picard_shss``
    The residual-updating form: sweeps on the correction ``s`` with
    right-hand side ``b_k = |x| + b - A x``, then ``x⁺ = x + s``.
``picard_hss``
    Residual-updating form with two-half-step HSS sweeps.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DimensionError
from .linalg import abs_vec, norm2, spmv
from .solvers_linear import InnerPolicy, SplitOperator, lu_factor

__all__ = [
    "Method",
    "SolveReport",
    "SolverConfig",
    "Status",
    "picard_hss_solve",
    "picard_shss_residual_solve",
    "picard_shss_solve",
    "picard_solve",
    "report_csv_header",
    "residual",
    "solve",
]


class Method(str, Enum):
    PICARD = "picard"
    PICARD_SHSS = "picard_shss"
    PICARD_SHSS_DIRECT = "picard_shss_direct"
    PICARD_HSS = "picard_hss"


class Status(str, Enum):
    """``inner_failure``: a linear solve produced non-finite values."""

    CONVERGED = "converged"
    MAX_OUTER_EXCEEDED = "max_outer_exceeded"
    INNER_FAILURE = "inner_failure"


class Start(str, Enum):
    ZERO = "zero"
    AINVB = "ainvb"


@dataclass(frozen=True)
class SolverConfig:
    alpha: float | None = None
    outer_rtol: float = 1e-7
    max_outer: int = 500
    inner: InnerPolicy = field(default_factory=InnerPolicy)
    method: Method = Method.PICARD_SHSS
    start: Start = Start.ZERO
    record_iterates: bool = False
    x0: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.x0 is not None:
            x0 = np.array(self.x0, dtype=float)
            x0.setflags(write=False)
            object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "start", Start(self.start))
        if not self.outer_rtol > 0:
            raise ValueError(f"outer_rtol must be positive, got {self.outer_rtol}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be at least 1, got {self.max_outer}")
        if self.method is not Method.PICARD and not (self.alpha is not None and self.alpha > 0):
            raise ValueError(f"{self.method.value} needs a positive alpha, got {self.alpha}")


@dataclass
class SolveReport:
    solution: np.ndarray
    outer_iterations: int
    inner_iteration_total: int
    residual_history: list
    wall_seconds: float
    status: Status
    method: Method
    alpha: float | None = None
    iterates: list | None = None

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else float("nan")

    def csv_row(self, m="", q="", p=""):
        return [self.method.value, m, q, p, "" if self.alpha is None else repr(self.alpha),
                self.outer_iterations, self.inner_iteration_total,
                f"{self.final_residual:.4e}", f"{self.wall_seconds:.4f}", self.status.value]

    def to_csv(self, m="", q="", p=""):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report_csv_header())
        w.writerow(self.csv_row(m, q, p))
        return buf.getvalue()


def report_csv_header():
    return ["method", "m", "q", "p", "alpha", "IT", "inner_total", "RES", "seconds", "status"]


def residual(problem, x):
    """Relative residual ``‖Ax - |x| - b‖₂ / ‖b‖₂``."""
    nb = norm2(problem.b)
    if nb == 0.0:
        raise ValueError("relative residual undefined for a zero right-hand side")
    return norm2(spmv(problem.A, x) - abs_vec(x) - problem.b) / nb


class _Outer:
    """Book-keeping shared by every outer loop."""

    def __init__(self, problem, cfg):
        self.problem = problem
        self.cfg = cfg
        self.history = []
        self.iterates = [] if cfg.record_iterates else None
        self.inner_total = 0

    def done(self, x):
        res = residual(self.problem, x)
        self.history.append(res)
        if self.iterates is not None:
            self.iterates.append(x.copy())
        return res <= self.cfg.outer_rtol

    def report(self, x, k, t0, status=None):
        if status is None:
            status = Status.CONVERGED if self.history[-1] <= self.cfg.outer_rtol \
                else Status.MAX_OUTER_EXCEEDED
        return SolveReport(solution=x, outer_iterations=k, inner_iteration_total=self.inner_total,
                           residual_history=self.history,
                           wall_seconds=time.perf_counter() - t0, status=status,
                           method=self.cfg.method, alpha=self.cfg.alpha,
                           iterates=self.iterates)


def _initial(problem, cfg, lu=None):
    # an explicit x0 overrides the start rule
    if cfg.x0 is not None:
        if cfg.x0.shape != (problem.n,):
            raise DimensionError(f"x0 has shape {cfg.x0.shape}, expected ({problem.n},)")
        return cfg.x0.copy()
    if cfg.start is Start.ZERO:
        return np.zeros(problem.n)
    if lu is None:
        lu = lu_factor(problem.A)
    return lu.solve(problem.b)


def picard_solve(problem, cfg):
    """Exact Picard iteration ``x⁺ = A⁻¹(|x| + b)``.

    The LU factorization of ``A`` is not counted in ``wall_seconds``.
    """
    cfg = replace(cfg, method=Method.PICARD) if cfg.method is not Method.PICARD else cfg
    lu = lu_factor(problem.A)
    t0 = time.perf_counter()
    x = _initial(problem, cfg, lu)
    outer = _Outer(problem, cfg)
    for k in range(cfg.max_outer + 1):
        if outer.done(x) or k == cfg.max_outer:
            return outer.report(x, k, t0)
        with np.errstate(over="ignore", invalid="ignore"):
            x = lu.solve(abs_vec(x) + problem.b)
        if not np.all(np.isfinite(x)):
            return outer.report(x, k + 1, t0, Status.INNER_FAILURE)
    raise AssertionError("unreachable")


def _inner_sweeps(step, op, rhs, policy, s):
    """Run inner sweeps on ``A s = rhs`` from ``s``; returns ``(s, count)``."""
    rtol = policy.rtol
    target = None if rtol is None else rtol * norm2(rhs)
    if target == 0.0:
        return s, 0
    count = 0
    for _ in range(policy.cap):
        s = step(s, rhs)
        count += 1
        if target is not None and norm2(rhs - spmv(op.A, s)) <= target:
            break
    return s, count


def _residual_updating(problem, cfg, with_skew):
    t0 = time.perf_counter()
    op = SplitOperator(problem.A, cfg.alpha, with_skew=with_skew)
    step = op.hss_step if with_skew else op.shss_step
    x = _initial(problem, cfg)
    outer = _Outer(problem, cfg)
    for k in range(cfg.max_outer + 1):
        if outer.done(x) or k == cfg.max_outer:
            return outer.report(x, k, t0)
        bk = abs_vec(x) + problem.b - spmv(problem.A, x)
        with np.errstate(over="ignore", invalid="ignore"):
            s, count = _inner_sweeps(step, op, bk, cfg.inner, np.zeros(problem.n))
        outer.inner_total += count
        if not np.all(np.isfinite(s)):
            return outer.report(x, k, t0, Status.INNER_FAILURE)
        x = x + s
    raise AssertionError("unreachable")


def picard_shss_residual_solve(problem, cfg):
    """Picard-SHSS in residual-updating form.

    Inner sweeps ``(αI + H) s⁺ = (αI - S) s + b_k`` start from ``s = 0``
    and follow ``cfg.inner``: at most ``max_inner`` sweeps, stopping early
    once ``‖b_k - A s‖₂ ≤ inner_rtol‖b_k‖₂`` unless the mode is
    ``fixed_count``.
    """
    cfg = replace(cfg, method=Method.PICARD_SHSS)
    return _residual_updating(problem, cfg, with_skew=False)


def picard_hss_solve(problem, cfg):
    """Picard-HSS comparator (residual-updating, two half-steps per sweep)."""
    cfg = replace(cfg, method=Method.PICARD_HSS)
    return _residual_updating(problem, cfg, with_skew=True)


def picard_shss_solve(problem, cfg):
    """Picard-SHSS in direct form.

    Each outer step runs exactly ``cfg.inner.max_inner`` sweeps of
    ``(αI + H) y⁺ = (αI - S) y + |x| + b`` from ``y = x``; the inner residual
    test is not applied in this form.
    """
    cfg = replace(cfg, method=Method.PICARD_SHSS_DIRECT)
    t0 = time.perf_counter()
    op = SplitOperator(problem.A, cfg.alpha)
    x = _initial(problem, cfg)
    outer = _Outer(problem, cfg)
    sweeps = cfg.inner.max_inner
    for k in range(cfg.max_outer + 1):
        if outer.done(x) or k == cfg.max_outer:
            return outer.report(x, k, t0)
        rhs = abs_vec(x) + problem.b
        y = x
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(sweeps):
                y = op.shss_step(y, rhs)
        outer.inner_total += sweeps
        if not np.all(np.isfinite(y)):
            return outer.report(x, k, t0, Status.INNER_FAILURE)
        x = y
    raise AssertionError("unreachable")


_DISPATCH = {
    Method.PICARD: picard_solve,
    Method.PICARD_SHSS: picard_shss_residual_solve,
    Method.PICARD_SHSS_DIRECT: picard_shss_solve,
    Method.PICARD_HSS: picard_hss_solve,
}


def solve(problem, cfg):
    """Run the method named by ``cfg.method``."""
    return _DISPATCH[Method(cfg.method)](problem, cfg)
