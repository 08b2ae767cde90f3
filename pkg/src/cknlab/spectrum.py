"""Linearized spectrum at the extremal, one spherical-harmonic mode at a time.

For a mode ``phi(r) Psi_k`` the linearized operator reduces to the
generalized Sturm-Liouville problem

    A[phi] = int r^(alpha+N-1) |U'|^(p-2) ((p-1) phi'^2 + lambda_k phi^2 / r^2) dr
    B[phi] = int r^(beta+N-1) U^(p*-2) phi^2 dr,      mu = A / B.

After ``r = s^t`` and ``x = log s`` the weights become explicit powers of
``s`` and ``1 + s^(p/(p-1))``; the problem is discretized by the energy
(finite-volume) form on a uniform x grid, which gives a symmetric
tridiagonal stiffness matrix and a diagonal mass matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .closed_forms import extremal, normalizing_constant, sphere_area
from .errors import GapNotResolved, IndefiniteWeight
from .params import CknParams, angular_eigenvalue, classify_degeneracy, derive, multiplicity
from .radial import RadialFunction
from .radial_quadrature import RadialGrid, integrate_samples, make_grid, tabulated_function

MIN_NODES = 500
DENSE_LIMIT = 4000


@dataclass
class ModeProblem:
    params: CknParams
    k: int
    s: np.ndarray
    x: np.ndarray
    h: float
    diag: np.ndarray
    off: np.ndarray
    mass: np.ndarray
    angular: float
    boundary: str

    @property
    def n(self) -> int:
        return len(self.s)

    def stiffness_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def stiffness_sparse(self):
        return sps.diags([self.off, self.diag, self.off], [-1, 0, 1], format="csc")

    def apply_stiffness(self, eta: np.ndarray) -> np.ndarray:
        out = self.diag * eta
        out[:-1] += self.off * eta[1:]
        out[1:] += self.off * eta[:-1]
        return out


@dataclass
class EigenPair:
    mu: float
    eta: np.ndarray
    k: int
    index: int
    residual: float


@dataclass
class SpectrumRow:
    k: int
    index: int
    mu: float
    lambda_k: float
    multiplicity: int
    tag: str


@dataclass
class SpectrumTable:
    params: CknParams
    rows: List[SpectrumRow] = field(default_factory=list)
    n: int = 0
    tol: float = 1e-3

    def threshold_dimension(self) -> int:
        return sum(r.multiplicity for r in self.rows if r.tag == "threshold")


def mass_coefficient(params: CknParams) -> float:
    """``K (Kp - K + p) / ((p-1)(p*-1))``, the mass-weight factor in the s variable."""
    d = derive(params)
    p, K = params.p, d.K
    return K * (K * p - K + p) / ((p - 1.0) * (d.p_star - 1.0))


def mass_coefficient_from_constants(params: CknParams) -> float:
    """Same factor assembled from ``t``, the amplitude ``C`` and ``p*``."""
    d = derive(params)
    N, p, a = params.N, params.p, params.alpha
    C = normalizing_constant(params)
    return d.t**2 * C ** (d.p_star - p) * ((N - p + a) / (p - 1.0)) ** (2.0 - p)


def _log_weights(params: CknParams, x: np.ndarray):
    """log of stiffness weight P(x) and mass weight Q(x) in the x = log s variable."""
    d = derive(params)
    p, K = params.p, d.K
    qs = p / (p - 1.0)
    L = np.logaddexp(0.0, qs * x)
    logP = (K - 1.0 - 1.0 / (p - 1.0)) * x - K * (p - 2.0) / p * L
    logQ = math.log(mass_coefficient(params)) + logP + qs * x - 2.0 * L
    return logP, logQ


def exterior_rates(params: CknParams, k: int):
    """Power-law rates of mode-k solutions beyond the grid ends.

    Returns ``(sigma, gamma)``: near ``s = 0`` the regular solution grows
    like ``s^sigma``; near infinity the decaying one falls like ``s^-gamma``.
    """
    d = derive(params)
    p, K = params.p, d.K
    ell = d.t**2 * angular_eigenvalue(params.N, k)
    g0 = K - 1.0 - 1.0 / (p - 1.0)
    sigma = 0.5 * (-g0 + math.sqrt(g0 * g0 + 4.0 * ell / (p - 1.0)))
    gamma = (K - p) / (p - 1.0)
    return sigma, gamma


def assemble_mode(
    params: CknParams,
    k: int,
    n: int = 2000,
    s_min: float = 1e-6,
    s_max: float = 1e6,
) -> ModeProblem:
    """Discrete pencil (A, B) for angular mode k on a log-uniform s grid.

    The ends are closed by the exact exterior power-law solutions (Robin
    conditions): regularity at the origin and decay at infinity.
    """
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
    if k < 0:
        raise ValueError("k must be >= 0")
    p = params.p
    x = np.linspace(math.log(s_min), math.log(s_max), n)
    h = x[1] - x[0]
    logP, logQ = _log_weights(params, x)
    logPm, _ = _log_weights(params, 0.5 * (x[:-1] + x[1:]))
    with np.errstate(over="ignore"):
        P, Q, Pm = np.exp(logP), np.exp(logQ), np.exp(logPm)
    if not (np.all(np.isfinite(Q)) and np.all(Q > 0) and np.all(np.isfinite(P))):
        raise IndefiniteWeight("mass weight is not positive on the grid")
    ell = derive(params).t ** 2 * angular_eigenvalue(params.N, k)
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    flux = np.zeros(n)
    flux[:-1] += Pm
    flux[1:] += Pm
    diag = (p - 1.0) * flux / h + ell * P * w * h
    off = -(p - 1.0) * Pm / h
    sigma, gamma = exterior_rates(params, k)
    diag[0] += (p - 1.0) * sigma * P[0]
    diag[-1] += (p - 1.0) * gamma * P[-1]
    mass = Q * w * h
    return ModeProblem(params, k, np.exp(x), x, h, diag, off, mass, ell,
                       "neumann-origin" if k == 0 else "dirichlet-origin")


def _normalise(problem: ModeProblem, v: np.ndarray) -> np.ndarray:
    v = v / math.sqrt(float(v @ (problem.mass * v)))
    i = int(np.argmax(np.abs(v)))
    return v if v[i] > 0 else -v


def eigen_solve(problem: ModeProblem, n_eigs: int = 4, method: Optional[str] = None) -> List[EigenPair]:
    """Smallest ``n_eigs`` eigenpairs of ``A eta = mu B eta``.

    The pencil is solved in the reciprocal form ``B eta = nu A eta`` with
    ``A`` positive definite, which keeps the smallest ``mu`` accurate even
    though ``B`` spans many orders of magnitude.
    """
    n = problem.n
    n_eigs = min(n_eigs, n - 2)
    if np.any(problem.mass <= 0):
        raise IndefiniteWeight("discrete mass matrix is not positive definite")
    method = method or ("dense" if n <= DENSE_LIMIT else "sparse")
    if method == "dense":
        A = problem.stiffness_dense()
        nu, vecs = sla.eigh(np.diag(problem.mass), A, subset_by_index=[n - n_eigs, n - 1])
        order = np.argsort(-nu)
        mus = 1.0 / nu[order]
        vecs = vecs[:, order]
    elif method == "sparse":
        A = problem.stiffness_sparse()
        M = sps.diags(problem.mass, format="csc")
        mus, vecs = spla.eigsh(A, k=n_eigs, M=M, sigma=0.0, which="LM", tol=1e-14)
        order = np.argsort(mus)
        mus, vecs = mus[order], vecs[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    out = []
    for i in range(n_eigs):
        v = _normalise(problem, vecs[:, i])
        Av = problem.apply_stiffness(v)
        res = float(np.linalg.norm(Av - mus[i] * problem.mass * v) / np.linalg.norm(Av))
        out.append(EigenPair(float(mus[i]), v, problem.k, i, res))
    return out


def pencil_rayleigh(problem: ModeProblem, eta: np.ndarray) -> float:
    eta = np.asarray(eta, dtype=float)
    return float(eta @ problem.apply_stiffness(eta)) / float(eta @ (problem.mass * eta))


def b_cosine(problem: ModeProblem, u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two node vectors in the discrete mass inner product."""
    m = problem.mass
    return float(u @ (m * v)) / math.sqrt(float(u @ (m * u)) * float(v @ (m * v)))


def profile_in_s(params: CknParams, s) -> np.ndarray:
    """``V(s) = U_1(s^t)`` up to the amplitude: ``(1 + s^(p/(p-1)))^(-(K-p)/p)``."""
    d = derive(params)
    p = params.p
    s = np.asarray(s, dtype=float)
    return np.exp(-(d.K - p) / p * np.logaddexp(0.0, p / (p - 1.0) * np.log(s)))


def eta0_in_s(params: CknParams, s) -> np.ndarray:
    """``((p-1) - s^(p/(p-1))) / (1 + s^(p/(p-1)))^(K/p)``: the threshold radial mode."""
    d = derive(params)
    p = params.p
    ls = p / (p - 1.0) * np.log(np.asarray(s, dtype=float))
    return ((p - 1.0) - np.exp(ls)) * np.exp(-d.K / p * np.logaddexp(0.0, ls))


def eta1_in_s(params: CknParams, s) -> np.ndarray:
    """``s^(1/(p-1)) / (1 + s^(p/(p-1)))^(K/p)``: threshold mode when ``t^2 lambda_k = K-1``."""
    d = derive(params)
    p = params.p
    ls = np.log(np.asarray(s, dtype=float))
    return np.exp(ls / (p - 1.0) - d.K / p * np.logaddexp(0.0, p / (p - 1.0) * ls))


def classify_eigenvalue(mu: float, params: CknParams, tol: float) -> str:
    ps = derive(params).p_star
    lo, thr = params.p - 1.0, ps - 1.0
    if abs(mu - lo) <= tol * lo:
        return "trivial-scaling"
    if abs(mu - thr) <= tol * thr:
        return "threshold"
    if mu > thr:
        return "above-gap"
    return "sub-threshold"


def full_spectrum(
    params: CknParams,
    k_max: int = 3,
    per_mode: int = 3,
    n: int = 2000,
    tol: float = 1e-3,
    s_min: float = 1e-6,
    s_max: float = 1e6,
    method: Optional[str] = None,
) -> SpectrumTable:
    table = SpectrumTable(params, n=n, tol=tol)
    for k in range(k_max + 1):
        prob = assemble_mode(params, k, n, s_min, s_max)
        for pair in eigen_solve(prob, per_mode, method):
            table.rows.append(
                SpectrumRow(
                    k, pair.index, pair.mu, angular_eigenvalue(params.N, k),
                    multiplicity(params.N, k), classify_eigenvalue(pair.mu, params, tol),
                )
            )
    return table


@dataclass
class GapReport:
    tau_hat: float
    mu_next: float
    k_next: int
    threshold: float
    threshold_dimension: int


def spectral_gap(
    params: CknParams,
    k_max: int = 0,
    per_mode: int = 3,
    n: int = 2000,
    tol: float = 1e-3,
    method: Optional[str] = None,
) -> GapReport:
    """Half the distance from ``p* - 1`` to the next eigenvalue above it.

    ``k_max = 0`` restricts to radial perturbations.  Eigenvalues tagged as
    the scaling or threshold eigenspace are excluded.
    """
    table = full_spectrum(params, k_max, per_mode, n, tol, method=method)
    thr = derive(params).p_star - 1.0
    above = [r for r in table.rows if r.tag == "above-gap"]
    if not above:
        raise GapNotResolved("no eigenvalue above the threshold was computed")
    nxt = min(above, key=lambda r: r.mu)
    return GapReport(0.5 * (nxt.mu - thr), nxt.mu, nxt.k, thr, table.threshold_dimension())


def eigenfunction(problem: ModeProblem, pair: EigenPair, label: str = "") -> RadialFunction:
    """Interpolate a discrete eigenvector back to a radial function of r."""
    t = derive(problem.params).t
    r = problem.s**t
    f = tabulated_function(r, pair.eta, label=label or f"eig(k={pair.k},i={pair.index})")
    return RadialFunction(
        value_at=f.value_at,
        derivative_at=f.derivative_at,
        label=f.label,
    )


def rayleigh_form(v: RadialFunction, params: CknParams, k: int = 0,
                  grid: Optional[RadialGrid] = None) -> float:
    """Continuous mode-k Rayleigh quotient ``A[v] / B[v]`` evaluated by quadrature in r."""
    grid = grid or make_grid()
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    ps = derive(params).p_star
    r = grid.nodes
    U = extremal(params)
    dU = np.abs(U.derivative(r))
    dv, vv = v.derivative(r), v.value(r)
    lam = angular_eigenvalue(N, k)
    num = r ** (a + N - 1.0) * dU ** (p - 2.0) * ((p - 1.0) * dv**2 + lam * vv**2 / r**2)
    den = r ** (b + N - 1.0) * U.value(r) ** (ps - 2.0) * vv**2
    w = sphere_area(N)
    return w * integrate_samples(num, grid).value / (w * integrate_samples(den, grid).value)


def degeneracy_check(params: CknParams, table: SpectrumTable) -> bool:
    """True when the numerically found threshold dimension matches the classification."""
    rep = classify_degeneracy(params)
    return table.threshold_dimension() == rep.eigenspace_dim
