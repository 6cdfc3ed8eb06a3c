"""Inner linear solvers.

* :func:`cholesky_factor` - cached factorization of the shifted symmetric
  block ``αI + H``. Banded Cholesky after a reverse Cuthill-McKee reordering
  when the band fits the memory budget, conjugate gradients otherwise.
* :func:`lu_factor` - sparse LU for ``A`` and for the shifted skew block
  ``αI + S`` of the two-half-step HSS iteration.
* :class:`SplitOperator` with the stationary single-step HSS and HSS
  iterations built on it.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import (ConvergenceError, DimensionError, NotPositiveDefiniteError,
                     SingularMatrixError)
from .linalg import (add_scaled_identity, as_vector, linear_combination, norm2,
                     split_symmetric, spmv)

__all__ = [
    "CGFactor",
    "CholeskyFactor",
    "InnerMode",
    "InnerPolicy",
    "InnerResult",
    "LUFactor",
    "SplitOperator",
    "cg_solve",
    "cholesky_factor",
    "hss_linear_solve",
    "lu_factor",
    "lu_solve",
    "shss_linear_solve",
]

DEFAULT_MEMORY_BUDGET = 256 * 2**20  # bytes for the banded Cholesky factor
CG_FALLBACK_RTOL = 1e-12


class InnerMode(str, Enum):
    FIXED_COUNT = "fixed_count"
    RESIDUAL_TOL = "residual_tol"
    BOTH = "both"


@dataclass(frozen=True)
class InnerPolicy:
    """Stopping rule for the inner sweeps of one outer step.

    ``fixed_count`` always runs ``max_inner`` sweeps; ``residual_tol`` stops
    on ``‖b_k - A s‖ ≤ inner_rtol‖b_k‖`` alone (bounded by
    ``RESIDUAL_ONLY_CAP``); ``both`` stops at whichever comes first.
    """

    max_inner: int = 10
    inner_rtol: float = 0.01
    inner_mode: InnerMode = InnerMode.BOTH

    RESIDUAL_ONLY_CAP = 10000

    def __post_init__(self):
        object.__setattr__(self, "inner_mode", InnerMode(self.inner_mode))
        if self.max_inner < 1:
            raise ValueError(f"max_inner must be at least 1, got {self.max_inner}")
        if not 0 < self.inner_rtol < 1:
            raise ValueError(f"inner_rtol must lie in (0, 1), got {self.inner_rtol}")

    @property
    def cap(self):
        if self.inner_mode is InnerMode.RESIDUAL_TOL:
            return self.RESIDUAL_ONLY_CAP
        return self.max_inner

    @property
    def rtol(self):
        """Early-stop tolerance, or ``None`` in fixed-count mode."""
        if self.inner_mode is InnerMode.FIXED_COUNT:
            return None
        return self.inner_rtol


class InnerResult(NamedTuple):
    x: np.ndarray
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# conjugate gradients

def cg_solve(A, rhs, rtol=1e-10, maxit=None, x0=None):
    """Unpreconditioned conjugate gradients for symmetric positive definite ``A``.

    Returns ``x`` with ``‖rhs - A x‖₂ ≤ rtol ‖rhs‖₂``. Raises
    :class:`NotPositiveDefiniteError` on non-positive curvature and
    :class:`ConvergenceError` after ``maxit`` steps (default ``3n``).
    """
    rhs = as_vector(rhs, A.nrows)
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    maxit = 3 * A.nrows if maxit is None else maxit
    x = np.zeros_like(rhs) if x0 is None else as_vector(x0, A.nrows).copy()
    r = rhs - spmv(A, x) if x0 is not None else rhs.copy()
    target = rtol * norm2(rhs)
    rr = float(r @ r)
    if np.sqrt(rr) <= target:
        return x
    p = r.copy()
    for _ in range(maxit):
        Ap = spmv(A, p)
        curv = float(p @ Ap)
        if curv <= 0.0:
            raise NotPositiveDefiniteError(f"CG met non-positive curvature pᵀAp = {curv:.3e}")
        step = rr / curv
        x += step * p
        r -= step * Ap
        rr_new = float(r @ r)
        if np.sqrt(rr_new) <= target:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise ConvergenceError(f"CG did not reach rtol={rtol:g} in {maxit} iterations")


# ---------------------------------------------------------------------------
# factorizations

class CholeskyFactor:
    """Banded Cholesky factor ``PMPᵀ = RᵀR`` under an RCM permutation."""

    method = "cholesky"

    def __init__(self, M, perm, bandwidth):
        n = M.nrows
        Mp = M.to_scipy()[perm][:, perm].tocoo()
        upper = Mp.row <= Mp.col
        ab = np.zeros((bandwidth + 1, n))
        ab[bandwidth + Mp.row[upper] - Mp.col[upper], Mp.col[upper]] = Mp.data[upper]
        try:
            self._cb = scipy.linalg.cholesky_banded(ab, lower=False)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("shifted symmetric block is not positive definite") from exc
        self._perm = perm
        self.n = n
        self.bandwidth = bandwidth

    def solve(self, rhs):
        y = scipy.linalg.cho_solve_banded((self._cb, False), rhs[self._perm],
                                          check_finite=False)
        x = np.empty_like(y)
        x[self._perm] = y
        return x


class CGFactor:
    """Stand-in 'factor' that solves by CG when the band is too wide."""

    method = "cg"

    def __init__(self, M, rtol=CG_FALLBACK_RTOL):
        self.M = M
        self.rtol = rtol
        self.n = M.nrows

    def solve(self, rhs):
        return cg_solve(self.M, rhs, rtol=self.rtol)


def cholesky_factor(M, memory_budget=DEFAULT_MEMORY_BUDGET):
    """Factor a symmetric positive definite matrix once for repeated solves."""
    if not M.is_square:
        raise DimensionError(f"matrix must be square, got {M.shape}")
    n = M.nrows
    if n == 0:
        raise DimensionError("empty matrix")
    perm = reverse_cuthill_mckee(M.to_scipy(), symmetric_mode=True).astype(np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(n)
    r = inv[M.row_ids()]
    c = inv[M.col_indices]
    bandwidth = int(np.abs(r - c).max()) if M.nnz else 0
    if 8 * n * (bandwidth + 1) > memory_budget:
        return CGFactor(M)
    return CholeskyFactor(M, perm, bandwidth)


class LUFactor:
    """Sparse LU (SuperLU) of a square nonsingular matrix."""

    def __init__(self, A):
        if not A.is_square:
            raise DimensionError(f"LU needs a square matrix, got {A.shape}")
        self.n = A.nrows
        try:
            self._lu = spla.splu(A.to_scipy().tocsc())
        except RuntimeError as exc:
            raise SingularMatrixError(f"sparse LU failed: {exc}") from exc
        u = np.abs(self._lu.U.diagonal())
        if u.size and u.min() <= self.n * np.finfo(float).eps * u.max():
            raise SingularMatrixError(
                f"matrix is numerically singular (pivot ratio {u.min() / u.max():.3e})")

    def solve(self, rhs, trans=False):
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.shape != (self.n,):
            raise DimensionError(f"rhs shape {rhs.shape} != ({self.n},)")
        return self._lu.solve(rhs, trans="T" if trans else "N")


def lu_factor(A):
    return LUFactor(A)


def lu_solve(factor, rhs):
    return factor.solve(rhs)


# ---------------------------------------------------------------------------
# splitting

class SplitOperator:
    """``A = M(α) - N(α)`` with ``M = αI + H`` and ``N = αI - S``.

    ``M`` is factored once at construction. With ``with_skew=True`` the
    HSS second half-step operators ``αI + S`` (LU) and ``αI - H`` are also
    prepared.
    """

    def __init__(self, A, alpha, with_skew=False, memory_budget=DEFAULT_MEMORY_BUDGET):
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        if not A.is_square:
            raise DimensionError(f"A must be square, got {A.shape}")
        self.A = A
        self.alpha = float(alpha)
        self.H, self.S = split_symmetric(A)
        self.M = add_scaled_identity(self.H, alpha)
        self.N = add_scaled_identity(-self.S, alpha)
        gap = linear_combination(1.0, linear_combination(1.0, self.M, -1.0, self.N), -1.0, A)
        if gap.max_abs() > 1e-12 * max(A.max_abs(), self.alpha):
            raise ArithmeticError(f"M(α) - N(α) differs from A by {gap.max_abs():.3e}")
        self.M_factor = cholesky_factor(self.M, memory_budget)
        self.Mskew_factor = None
        if with_skew:
            self.Mskew = add_scaled_identity(self.S, alpha)
            self.Nskew = add_scaled_identity(-self.H, alpha)
            self.Mskew_factor = lu_factor(self.Mskew)

    @property
    def n(self):
        return self.A.nrows

    def shss_step(self, x, q):
        """One sweep ``(αI + H) x⁺ = (αI - S) x + q``."""
        return self.M_factor.solve(spmv(self.N, x) + q)

    def hss_step(self, x, q):
        """Both half-steps of HSS."""
        if self.Mskew_factor is None:
            raise ValueError("SplitOperator was built without the skew factorization")
        half = self.shss_step(x, q)
        return self.Mskew_factor.solve(spmv(self.Nskew, half) + q)


def _stationary(step, op, q, x0, rtol, maxit):
    q = as_vector(q, op.n)
    x = np.zeros(op.n) if x0 is None else as_vector(x0, op.n).copy()
    target = rtol * norm2(q)
    for k in range(maxit):
        if norm2(q - spmv(op.A, x)) <= target:
            return InnerResult(x, k, True)
        x = step(x, q)
    return InnerResult(x, maxit, bool(norm2(q - spmv(op.A, x)) <= target))


def shss_linear_solve(op, q, x0=None, rtol=1e-10, maxit=1000):
    """Single-step HSS iteration for ``A x = q``.

    Stops when ``‖q - A x‖₂ ≤ rtol‖q‖₂`` or after ``maxit`` sweeps; the
    ``converged`` flag of the result reports which.
    """
    return _stationary(op.shss_step, op, q, x0, rtol, maxit)


def hss_linear_solve(op, q, x0=None, rtol=1e-10, maxit=1000):
    """Two-half-step HSS iteration for ``A x = q``; same contract as SHSS."""
    if op.Mskew_factor is None:
        raise ValueError("SplitOperator was built without the skew factorization")
    return _stationary(op.hss_step, op, q, x0, rtol, maxit)
