"""Parameter domain, derived exponents and degeneracy classification.

The weighted inequality is governed by four numbers ``(N, p, alpha, beta)``
with ``1 < p < N`` and ``p - N < alpha < p + beta``.  Everything else in the
package is phrased in terms of the derived triple ``(p_star, t, K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import (
    AlphaOutOfRange,
    ClassicalDomainError,
    DimensionTooSmall,
    MultiplicityOverflow,
    PNotInRange,
)

# Largest multiplicity we hand back as a plain integer.
MULTIPLICITY_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class CknParams:
    N: int
    p: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class DerivedExponents:
    p_star: float
    t: float
    K: float


@dataclass(frozen=True)
class DegeneracyReport:
    k_real: float
    degenerate: bool
    k: Optional[int]
    multiplicity: Optional[int]
    eigenspace_dim: int
    nearest_k: int
    distance_to_integer: float


@dataclass(frozen=True)
class CknClassicalParams:
    a: float
    b: float
    h: float


def validate(N: int, p: float, alpha: float, beta: float) -> CknParams:
    """Check the admissible domain and return an immutable parameter record."""
    if int(N) != N or N < 2:
        raise DimensionTooSmall(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    p, alpha, beta = float(p), float(alpha), float(beta)
    if not all(math.isfinite(v) for v in (p, alpha, beta)):
        raise PNotInRange("p, alpha and beta must be finite")
    if not 1.0 < p < N:
        raise PNotInRange(f"need 1 < p < N, got p={p}, N={N}")
    if not p - N < alpha:
        raise AlphaOutOfRange(f"need alpha > p - N = {p - N}, got alpha={alpha}")
    if not alpha < p + beta:
        raise AlphaOutOfRange(f"need alpha < p + beta = {p + beta}, got alpha={alpha}")
    return CknParams(N, p, alpha, beta)


def derive(params: CknParams) -> DerivedExponents:
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    p_star = p * (N + b) / (N - p + a)
    t = p / (p + b - a)
    K = p * (N + b) / (p + b - a)
    return DerivedExponents(p_star, t, K)


def K_via_t(params: CknParams) -> float:
    """Second route to K, ``(N - p + alpha) t + p``."""
    t = derive(params).t
    return (params.N - params.p + params.alpha) * t + params.p


def degeneracy_target(params: CknParams) -> float:
    """Right-hand side ``t^-2 (K - 1)`` of the degeneracy condition."""
    d = derive(params)
    return (d.K - 1.0) / d.t**2


def degeneracy_target_expanded(params: CknParams) -> float:
    """Same quantity written as ``(p+beta-alpha)((N-1)p + beta(p-1) + alpha)/p^2``."""
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    return (p + b - a) * ((N - 1) * p + b * (p - 1) + a) / p**2


def k_real(params: CknParams) -> float:
    n2 = params.N - 2
    T = degeneracy_target(params)
    return (-n2 + math.sqrt(n2 * n2 + 4.0 * T)) / 2.0


def multiplicity(N: int, k: int) -> int:
    """Dimension of degree-k spherical harmonics on S^{N-1}.

    Evaluates ``(N+2k-2)(N+k-3)!/((N-2)!k!)`` as a running product so that
    every intermediate value is an exact integer.
    """
    if N < 2 or k < 0:
        raise ValueError("need N >= 2 and k >= 0")
    if k == 0:
        return 1
    # binom(N+k-3, k-1) built one factor at a time stays integral.
    c = 1
    for j in range(1, k):
        c = c * (N - 2 + j) // j
    value = (N + 2 * k - 2) * c // k
    if value > MULTIPLICITY_LIMIT:
        raise MultiplicityOverflow(f"multiplicity({N}, {k}) exceeds 64-bit range")
    return value


def angular_eigenvalue(N: int, k: int) -> float:
    if N < 2 or k < 0:
        raise ValueError("need N >= 2 and k >= 0")
    return float(k * (N - 2 + k))


def classify_degeneracy(params: CknParams, int_tol: float = 1e-9) -> DegeneracyReport:
    """Decide whether the linearized problem has extra threshold modes.

    The kernel at the threshold eigenvalue ``p* - 1`` is one dimensional
    unless ``k(N-2+k) = t^-2 (K-1)`` has a positive integer root ``k``, in
    which case ``M_k`` further directions appear.
    """
    if not 0.0 < int_tol < 0.5:
        raise ValueError("int_tol must lie in (0, 0.5)")
    kr = k_real(params)
    nearest = int(round(kr))
    dist = abs(kr - nearest)
    degenerate = nearest >= 1 and dist < int_tol
    if degenerate:
        m = multiplicity(params.N, nearest)
        return DegeneracyReport(kr, True, nearest, m, 1 + m, nearest, dist)
    return DegeneracyReport(kr, False, None, None, 1, nearest, dist)


def classical_h(N: int, p: float, a: float, b: float) -> float:
    return N * p / (N - p * (1.0 + a - b))


def check_classical(N: int, p: float, a: float, b: float) -> None:
    if not a < (N - p) / p:
        raise ClassicalDomainError(f"need a < (N-p)/p = {(N - p) / p}, got a={a}")
    if not (a - (N - p) / p < b < a + 1.0):
        raise ClassicalDomainError(
            f"need {a - (N - p) / p} < b < {a + 1.0}, got b={b}"
        )


def to_classical(params: CknParams) -> CknClassicalParams:
    N, p = params.N, params.p
    a = -params.alpha / p
    h = derive(params).p_star
    b = -params.beta / h
    check_classical(N, p, a, b)
    return CknClassicalParams(a, b, classical_h(N, p, a, b))


def from_classical(c: CknClassicalParams, N: int, p: float) -> CknParams:
    check_classical(N, p, c.a, c.b)
    h = classical_h(N, p, c.a, c.b)
    return validate(N, p, -p * c.a, -c.b * h)


def classical(N: int, p: float, a: float, b: float) -> CknClassicalParams:
    """Build a classical triple, filling in ``h`` from ``(a, b)``."""
    check_classical(N, p, a, b)
    return CknClassicalParams(a, b, classical_h(N, p, a, b))


def felli_schneider(N: int, a: float, k: int = 1) -> float:
    """Value of ``b`` on the k-th symmetry-breaking curve for p = 2."""
    if k < 1:
        raise ValueError("k must be >= 1")
    gap = N - 2 - 2.0 * a
    if gap == 0.0:
        raise ZeroDivisionError("felli_schneider is singular at a = (N-2)/2")
    if gap < 0.0:
        raise ValueError(f"need a < (N-2)/2 = {(N - 2) / 2}, got a={a}")
    lam = k * (N - 2 + k)
    return 0.5 * N / math.sqrt(1.0 + 4.0 * lam / gap**2) - 0.5 * gap


def beta_for_k(N: int, p: float, alpha: float, k_target: float) -> float:
    """Solve for beta so that ``k_real`` equals ``k_target``.

    The degeneracy condition is quadratic in beta; the root returned is the
    one compatible with ``alpha < p + beta``.
    """
    T = k_target * (N - 2 + k_target) * p**2
    A = p - 1.0
    B = (N - 1) * p + alpha + (p - 1.0) * (p - alpha)
    C = (p - alpha) * ((N - 1) * p + alpha) - T
    disc = B * B - 4.0 * A * C
    if disc < 0:
        raise ValueError("no real beta realises this k")
    beta = (-B + math.sqrt(disc)) / (2.0 * A)
    validate(N, p, alpha, beta)
    return beta
