"""Spectral quantities behind the Picard-SHSS convergence theory.

For ``A = H + S`` (symmetric / skew parts) the single-step HSS iteration
matrix is ``T(α) = (αI + H)⁻¹ (αI - S)``. It is a contraction whenever

    α > max{0, (σ_max(S)² - λ_min(H)²) / (2 λ_min(H))},

and the outer Picard-SHSS error contracts once the inner count ``l``
satisfies ``‖T(α)^l‖₂ < (1 - η)/(1 + η)`` with ``η = ‖A⁻¹‖₂ < 1``.

The sparse estimators here use power iteration with a fixed seed;
:func:`iteration_matrix_rho` and :func:`estimate_required_inner_iterations`
are dense diagnostics meant for small instances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (ConvergenceError, DenseLimitError, DimensionError, NotPositiveDefiniteError,
                     SingularMatrixError)
from .linalg import dense_from_sparse, dense_limit, split_symmetric, spmv

__all__ = [
    "DEFAULT_SEED",
    "SpectralBounds",
    "alpha_lower_bound",
    "contraction_threshold",
    "estimate_required_inner_iterations",
    "eta_norm_inverse",
    "iteration_matrix",
    "iteration_matrix_rho",
    "largest_singular_skew",
    "smallest_eigenvalue_sym",
    "spectral_bounds",
]

DEFAULT_SEED = 20141
DEFAULT_TOL = 1e-8
DEFAULT_MAXIT = 20000
POWER_CAP = 10000


@dataclass(frozen=True)
class SpectralBounds:
    lambda_min_H: float
    sigma_max_S: float
    eta: float
    alpha_floor: float
    seed: int = DEFAULT_SEED

    @property
    def uniquely_solvable(self):
        """``η < 1``: every right-hand side has exactly one solution."""
        return self.eta < 1.0


def _start_vector(n, seed):
    v = np.random.default_rng(seed).standard_normal(n)
    return v / np.linalg.norm(v)


def _power(apply, n, tol, maxit, seed, what):
    """Dominant eigenvalue of a symmetric positive semidefinite operator.

    Stops once the eigen-residual ``‖Bv - θv‖`` drops below ``tol·θ``.
    Returns 0 when the operator annihilates the start vector.
    """
    v = _start_vector(n, seed)
    theta = 0.0
    for _ in range(maxit):
        w = apply(v)
        theta = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        if np.linalg.norm(w - theta * v) <= tol * abs(theta):
            return theta
        v = w / nw
    raise ConvergenceError(f"power iteration for {what} did not converge in {maxit} steps")


def _check_symmetric(M, sign, what, atol=1e-12):
    d = M - (M.T if sign > 0 else -M.T)
    scale = max(M.max_abs(), 1.0)
    if d.nnz and d.max_abs() > atol * scale:
        raise ValueError(f"input is not {what} (max deviation {d.max_abs():.3e})")


def smallest_eigenvalue_sym(H, tol=DEFAULT_TOL, maxit=DEFAULT_MAXIT, seed=DEFAULT_SEED):
    """Smallest eigenvalue of symmetric ``H`` by shifted power iteration.

    A first power iteration on ``H²`` bounds the spectral radius ``c``; a
    second one on ``cI - H`` (positive semidefinite) returns ``c - λ_min``.
    """
    if not H.is_square:
        raise DimensionError(f"H must be square, got {H.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_symmetric(H, +1, "symmetric")
    n = H.nrows
    if H.nnz == 0:
        return 0.0
    c = np.sqrt(_power(lambda v: spmv(H, spmv(H, v)), n, tol, maxit, seed, "ρ(H)"))
    mu = _power(lambda v: c * v - spmv(H, v), n, tol, maxit, seed + 1, "λ_min(H)")
    return float(c - mu)


def largest_singular_skew(S, tol=DEFAULT_TOL, maxit=DEFAULT_MAXIT, seed=DEFAULT_SEED):
    """Largest singular value of skew-symmetric ``S`` via power iteration on ``SᵀS``."""
    if not S.is_square:
        raise DimensionError(f"S must be square, got {S.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_symmetric(S, -1, "skew-symmetric")
    if S.nnz == 0:
        return 0.0
    St = S.T
    lam = _power(lambda v: spmv(St, spmv(S, v)), S.nrows, tol, maxit, seed, "σ_max(S)")
    return float(np.sqrt(max(lam, 0.0)))


def eta_norm_inverse(A, tol=DEFAULT_TOL, maxit=DEFAULT_MAXIT, seed=DEFAULT_SEED, lu=None):
    """``η = ‖A⁻¹‖₂ = 1/σ_min(A)`` by inverse power iteration on ``AᵀA``.

    ``lu`` may carry an existing :class:`~avekit.solvers_linear.LUFactor`
    of ``A``; otherwise one is computed.
    """
    from .solvers_linear import lu_factor

    if not A.is_square:
        raise DimensionError(f"A must be square, got {A.shape}")
    f = lu_factor(A) if lu is None else lu
    # (AᵀA)⁻¹ v = A⁻¹ A⁻ᵀ v
    lam = _power(lambda v: f.solve(f.solve(v, trans=True)), A.nrows, tol, maxit, seed,
                 "‖A⁻¹‖₂")
    return float(np.sqrt(lam))


def alpha_lower_bound(lambda_min_H, sigma_max_S):
    """Smallest admissible shift: ``max{0, (σ² - λ²)/(2λ)}``."""
    if not lambda_min_H > 0:
        raise NotPositiveDefiniteError(
            f"λ_min(H) = {lambda_min_H:.6g} ≤ 0: A is not positive definite, "
            "the splitting iteration is inapplicable")
    return max(0.0, (sigma_max_S ** 2 - lambda_min_H ** 2) / (2.0 * lambda_min_H))


def spectral_bounds(A, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    """Estimate every quantity needed to check the convergence hypotheses."""
    H, S = split_symmetric(A)
    lam = smallest_eigenvalue_sym(H, tol=tol, seed=seed)
    sig = largest_singular_skew(S, tol=tol, seed=seed)
    eta = eta_norm_inverse(A, tol=tol, seed=seed)
    return SpectralBounds(lam, sig, eta, alpha_lower_bound(lam, sig), seed)


def _dense_split(A):
    if max(A.shape) > dense_limit():
        raise DenseLimitError(f"n = {A.nrows} exceeds the dense limit {dense_limit()}")
    a = dense_from_sparse(A)
    return 0.5 * (a + a.T), 0.5 * (a - a.T)


def iteration_matrix(A, alpha):
    """Dense ``T(α) = (αI + H)⁻¹ (αI - S)``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    h, s = _dense_split(A)
    eye = np.eye(A.nrows)
    M = alpha * eye + h
    try:
        return scipy.linalg.solve(M, alpha * eye - s, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularMatrixError(f"αI + H is singular for α = {alpha}") from exc


def iteration_matrix_rho(A, alpha):
    """Spectral radius of ``T(α)`` (dense)."""
    return float(np.max(np.abs(np.linalg.eigvals(iteration_matrix(A, alpha)))))


def contraction_threshold(eta):
    """``ε = (1 - η)/(1 + η)``, the bound ``‖T(α)^l‖₂`` must beat."""
    return (1.0 - eta) / (1.0 + eta)


def estimate_required_inner_iterations(A, alpha, eta, cap=POWER_CAP):
    """Smallest ``N`` with ``‖T(α)^s‖₂ < (1-η)/(1+η)`` for every ``s ≥ N``.

    Powers are formed densely. The scan stops at the first ``K`` with
    ``‖T^K‖·max_{r<K} ‖T^r‖ < ε``; submultiplicativity then keeps every
    later power below ``ε``, so ``N`` is one past the last offending power.
    """
    if not 0 <= eta < 1:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    T = iteration_matrix(A, alpha)
    rho = float(np.max(np.abs(np.linalg.eigvals(T))))
    if rho >= 1.0:
        raise ConvergenceError(f"ρ(T(α)) = {rho:.6g} ≥ 1: inner iteration diverges")
    eps = contraction_threshold(eta)
    P = np.eye(A.nrows)
    worst_prefix = 1.0
    last_bad = 0
    for s in range(1, cap + 1):
        P = T @ P
        norm = np.linalg.norm(P, 2)
        if norm >= eps:
            last_bad = s
        if norm * worst_prefix < eps:
            return max(last_bad + 1, 1)
        worst_prefix = max(worst_prefix, norm)
    raise ConvergenceError(f"‖T(α)^s‖₂ did not settle below {eps:.6g} within {cap} powers")
