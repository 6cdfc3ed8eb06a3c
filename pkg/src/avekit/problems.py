"""Convection-diffusion test problems for ``Ax - |x| = b``.

The coefficient matrix is the five-point / central-difference discretisation
of ``-(u_xx + u_yy) + q (u_x + u_y) + p u`` on the unit square with an
``m x m`` interior grid::

    A = T_x ⊗ I_m + I_m ⊗ T_y + p I_n,    n = m²

with ``T_x = tridiag(t2, t1, t3)``, ``T_y = tridiag(t2, 0, t3)``, ``t1 = 4``,
``t2 = -1 - Re``, ``t3 = -1 + Re`` and mesh Reynolds number ``Re = q h / 2``,
``h = 1 / (m + 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError
from .linalg import (SparseMatrix, abs_vec, add_scaled_identity, as_vector, kron,
                     linear_combination, norm2, read_matrix_market, read_vector, spmv,
                     write_matrix_market, write_vector)

__all__ = [
    "AveProblem",
    "ProblemSpec",
    "build_convection_diffusion",
    "build_rhs",
    "exact_solution",
    "load_problem",
    "make_problem",
    "save_problem",
]

MATRIX_FILE = "A.mtx"
RHS_FILE = "b.txt"
EXACT_FILE = "x_exact.txt"
SPEC_FILE = "spec.txt"


@dataclass(frozen=True)
class ProblemSpec:
    m: int
    q: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"grid size m must be a positive integer, got {self.m}")
        if self.q < 0:
            raise ValueError(f"q must be non-negative, got {self.q}")

    @property
    def n(self):
        return self.m * self.m

    @property
    def h(self):
        return 1.0 / (self.m + 1)

    @property
    def reynolds(self):
        return self.q * self.h / 2.0

    @property
    def t1(self):
        return 4.0

    @property
    def t2(self):
        return -1.0 - self.reynolds

    @property
    def t3(self):
        return -1.0 + self.reynolds


@dataclass(frozen=True)
class AveProblem:
    """An instance of ``A x - |x| = b``, optionally with its known solution."""

    A: SparseMatrix
    b: np.ndarray
    exact: np.ndarray | None = None
    spec: ProblemSpec | None = None

    def __post_init__(self):
        if not self.A.is_square:
            raise DimensionError(f"A must be square, got {self.A.shape}")
        object.__setattr__(self, "b", as_vector(self.b, self.A.nrows))
        if self.exact is not None:
            object.__setattr__(self, "exact", as_vector(self.exact, self.A.nrows))

    @property
    def n(self):
        return self.A.nrows

    def exact_residual(self):
        """Relative residual of the embedded exact solution."""
        if self.exact is None:
            raise ValueError("problem has no exact solution attached")
        r = spmv(self.A, self.exact) - abs_vec(self.exact) - self.b
        return norm2(r) / norm2(self.b)


def build_convection_diffusion(spec):
    m = spec.m
    I_m = SparseMatrix.identity(m)
    Tx = SparseMatrix.tridiag(spec.t2, spec.t1, spec.t3, m)
    Ty = SparseMatrix.tridiag(spec.t2, 0.0, spec.t3, m)
    A = linear_combination(1.0, kron(Tx, I_m), 1.0, kron(I_m, Ty))
    return add_scaled_identity(A, spec.p)


def exact_solution(n):
    """The alternating vector ``x_i = (-1)^i i`` (1-based ``i``)."""
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(1, n + 1, dtype=np.float64)
    return np.where(i % 2 == 1, -i, i)


def build_rhs(A, xstar):
    xstar = as_vector(xstar, A.ncols)
    return spmv(A, xstar) - abs_vec(xstar)


def make_problem(spec):
    A = build_convection_diffusion(spec)
    x = exact_solution(spec.n)
    return AveProblem(A=A, b=build_rhs(A, x), exact=x, spec=spec)


def save_problem(problem, out_dir):
    """Write ``A.mtx``, ``b.txt``, the exact solution (if any) and ``spec.txt``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_market(out / MATRIX_FILE, problem.A)
    write_vector(out / RHS_FILE, problem.b)
    if problem.exact is not None:
        write_vector(out / EXACT_FILE, problem.exact)
    if problem.spec is not None:
        s = problem.spec
        (out / SPEC_FILE).write_text(f"m={s.m}\nq={s.q!r}\np={s.p!r}\n")
    return out


def _read_spec(path):
    fields = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: expected key=value, got {line!r}")
        fields[key.strip()] = value.strip()
    try:
        return ProblemSpec(m=int(fields["m"]), q=float(fields["q"]), p=float(fields["p"]))
    except KeyError as exc:
        raise ValueError(f"{path}: missing key {exc}") from None


def load_problem(in_dir):
    src = Path(in_dir)
    A = read_matrix_market(src / MATRIX_FILE)
    b = read_vector(src / RHS_FILE)
    if b.size != A.nrows:
        raise DimensionError(f"{src}: b has length {b.size} but A is {A.shape}")
    exact = read_vector(src / EXACT_FILE) if (src / EXACT_FILE).exists() else None
    if exact is not None and exact.size != A.nrows:
        raise DimensionError(f"{src}: exact solution has length {exact.size}, expected {A.nrows}")
    spec = _read_spec(src / SPEC_FILE) if (src / SPEC_FILE).exists() else None
    return AveProblem(A=A, b=b, exact=exact, spec=spec)
