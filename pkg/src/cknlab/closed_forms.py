"""Closed-form constants, extremal profiles and linearized eigenfunctions.

All gamma-function products are assembled in log space with ``gammaln`` so
that large ``K`` does not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List

import numpy as np
from scipy.special import expit, gammaln

from .params import CknParams, derive
from .radial import RadialFunction


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N."""
    return math.exp(math.log(2.0) + 0.5 * N * math.log(math.pi) - gammaln(0.5 * N))


def _log_ratio_gamma(K: float, p: float) -> float:
    return gammaln(K / p) + gammaln(1.0 + K - K / p) - gammaln(K)


def log_radial_constant(K: float, p: float) -> float:
    """log of the one-dimensional constant C_p(K) (product form)."""
    inner = _log_ratio_gamma(K, p) - gammaln(1.0 + K / 2) + gammaln(K / 2) - math.log(2.0)
    return math.log(K) + (p - 1.0) * math.log((K - p) / (p - 1.0)) + (p / K) * inner


def log_radial_constant_split(K: float, p: float) -> float:
    """log C_p(K) written as the Sobolev constant in dimension K times a sphere factor."""
    sob = (
        0.5 * p * math.log(math.pi)
        + math.log(K)
        + (p - 1.0) * math.log((K - p) / (p - 1.0))
        + (p / K) * (_log_ratio_gamma(K, p) - gammaln(K / 2 + 1.0))
    )
    sphere = (p / K) * (gammaln(K / 2) - math.log(2.0) - 0.5 * K * math.log(math.pi))
    return sob + sphere


def radial_constant(K: float, p: float) -> float:
    return math.exp(log_radial_constant(K, p))


def sharp_constant(params: CknParams) -> float:
    """Best constant of the radial inequality ``||u||^p >= S ||u||_*^p``."""
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    K = derive(params).K
    e1 = (p * N - p + (p - 1.0) * b + a) / (N + b)
    e2 = (p + b - a) / (N + b)
    log_s = (
        e1 * math.log((p + b - a) / p)
        + e2 * math.log(sphere_area(N))
        + log_radial_constant(K, p)
    )
    return math.exp(log_s)


def sharp_constant_via_t(params: CknParams) -> float:
    """Same constant assembled as ``t^(p/K - p) |S^(N-1)|^(1 - p/p*) C_p(K)``."""
    d = derive(params)
    p = params.p
    log_s = (
        (p / d.K - p) * math.log(d.t)
        + (1.0 - p / d.p_star) * math.log(sphere_area(params.N))
        + log_radial_constant_split(d.K, p)
    )
    return math.exp(log_s)


def normalizing_constant(params: CknParams) -> float:
    """Amplitude making U_1 solve the Euler-Lagrange equation with unit coefficient."""
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    base = (N + b) * ((N - p + a) / (p - 1.0)) ** (p - 1.0)
    return base ** ((N - p + a) / (p * (p + b - a)))


def hardy_constant(N: int, p: float, alpha: float) -> float:
    return ((N - p + alpha) / p) ** p


def aubin_talenti_constant(N: int, p: float) -> float:
    return (N * ((N - p) / (p - 1.0)) ** (p - 1.0)) ** ((N - p) / p**2)


def aubin_talenti(N: int, p: float, lam: float, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    g = aubin_talenti_constant(N, p)
    q = p / (p - 1.0)
    return g * lam ** ((N - p) / p) / (1.0 + (lam * r) ** q) ** ((N - p) / p)


@dataclass(frozen=True)
class ExtremalProfile:
    """The family ``c U_lambda(r) = c C lam^e / (1 + (lam r)^q)^m``."""

    params: CknParams
    c: float = 1.0
    lam: float = 1.0

    @cached_property
    def q(self) -> float:
        pr = self.params
        return (pr.p + pr.beta - pr.alpha) / (pr.p - 1.0)

    @cached_property
    def m(self) -> float:
        pr = self.params
        return (pr.N - pr.p + pr.alpha) / (pr.p + pr.beta - pr.alpha)

    @cached_property
    def e(self) -> float:
        pr = self.params
        return (pr.N - pr.p + pr.alpha) / pr.p

    @cached_property
    def C(self) -> float:
        return normalizing_constant(self.params)

    @property
    def decay_exponent(self) -> float:
        return -self.m * self.q

    def _logs(self, r):
        r = np.asarray(r, dtype=float)
        lx = self.q * np.log(self.lam * r)
        return r, lx, np.logaddexp(0.0, lx)

    def value(self, r) -> np.ndarray:
        r, lx, L = self._logs(r)
        return self.c * self.C * self.lam**self.e * np.exp(-self.m * L)

    def derivative(self, r) -> np.ndarray:
        r, lx, L = self._logs(r)
        mag = np.exp(
            math.log(self.C * self.m * self.q)
            + (self.e + 1.0) * math.log(self.lam)
            + (1.0 - 1.0 / self.q) * lx
            - (self.m + 1.0) * L
        )
        return -self.c * mag

    def second_derivative(self, r) -> np.ndarray:
        r, lx, L = self._logs(r)
        rho = (self.q - 1.0) - (self.m + 1.0) * self.q * expit(lx)
        return self.derivative(r) * rho / r

    def p_laplacian(self, r) -> np.ndarray:
        """``-r^(1-N) (r^(N-1+alpha) |u'|^(p-2) u')'`` without cancellation."""
        pr = self.params
        r, lx, L = self._logs(r)
        du = self.derivative(r)
        factor = (pr.N + pr.beta) * expit(-lx)
        return -(r**pr.alpha) * np.abs(du) ** (pr.p - 2.0) * du * factor / r

    def source(self, r) -> np.ndarray:
        """Right-hand side ``r^beta |u|^(p*-2) u``."""
        pr = self.params
        ps = derive(pr).p_star
        u = self.value(r)
        return np.asarray(r, dtype=float) ** pr.beta * np.abs(u) ** (ps - 2.0) * u

    def as_radial_function(self) -> RadialFunction:
        return RadialFunction(
            value_at=self.value,
            derivative_at=self.derivative,
            second_derivative_at=self.second_derivative,
            decay_hint=self.decay_exponent,
            origin_hint=self.q,
            p_laplacian_at=self.p_laplacian,
            label=f"U(c={self.c:g},lam={self.lam:g})",
        )


def extremal(params: CknParams, c: float = 1.0, lam: float = 1.0) -> ExtremalProfile:
    return ExtremalProfile(params, float(c), float(lam))


def _exponents(params: CknParams):
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    q = (p + b - a) / (p - 1.0)
    M = (N + b) / (p + b - a)
    return q, M


def w0_value(params: CknParams, r) -> np.ndarray:
    """Radial eigenfunction ``((p-1) - r^q)/(1 + r^q)^((N+beta)/(p+beta-alpha))``."""
    q, M = _exponents(params)
    r = np.asarray(r, dtype=float)
    lx = q * np.log(r)
    L = np.logaddexp(0.0, lx)
    return ((params.p - 1.0) - np.exp(lx)) * np.exp(-M * L)


def w0_derivative(params: CknParams, r) -> np.ndarray:
    q, M = _exponents(params)
    p = params.p
    r = np.asarray(r, dtype=float)
    lx = q * np.log(r)
    L = np.logaddexp(0.0, lx)
    x = np.exp(lx)
    # d/dx [((p-1) - x)(1+x)^-M] times dx/dr = q x / r
    bracket = (M - 1.0) * x - 1.0 - M * (p - 1.0)
    return bracket * np.exp(-(M + 1.0) * L) * q * x / r


def w0_zero(params: CknParams) -> float:
    """Radius where W_0 changes sign."""
    q, _ = _exponents(params)
    return (params.p - 1.0) ** (1.0 / q)


def w0_critical_radius(params: CknParams) -> float:
    """Radius of the minimum of W_0, where its derivative vanishes."""
    q, M = _exponents(params)
    return ((1.0 + M * (params.p - 1.0)) / (M - 1.0)) ** (1.0 / q)


def w0_function(params: CknParams) -> RadialFunction:
    q, M = _exponents(params)
    return RadialFunction(
        value_at=lambda r: w0_value(params, r),
        derivative_at=lambda r: w0_derivative(params, r),
        decay_hint=q * (1.0 - M),
        origin_hint=q,
        label="W0",
        breakpoints=(w0_zero(params), w0_critical_radius(params)),
    )


def wk_value(params: CknParams, r) -> np.ndarray:
    """Radial factor ``r^(q/p)/(1 + r^q)^((N+beta)/(p+beta-alpha))`` of the k-mode kernel."""
    q, M = _exponents(params)
    r = np.asarray(r, dtype=float)
    lr = np.log(r)
    return np.exp(q / params.p * lr - M * np.logaddexp(0.0, q * lr))


def wk_derivative(params: CknParams, r) -> np.ndarray:
    q, M = _exponents(params)
    r = np.asarray(r, dtype=float)
    lx = q * np.log(r)
    return wk_value(params, r) / r * (q / params.p - M * q * expit(lx))


def wk_function(params: CknParams) -> RadialFunction:
    q, M = _exponents(params)
    peak = (1.0 / (params.p * M - 1.0)) ** (1.0 / q)
    return RadialFunction(
        value_at=lambda r: wk_value(params, r),
        derivative_at=lambda r: wk_derivative(params, r),
        decay_hint=q / params.p - M * q,
        origin_hint=q / params.p,
        label="Wk",
        breakpoints=(peak,),
    )


def dilation_constant(params: CknParams) -> float:
    """``C (N-p+alpha)/(p(p-1))`` with ``d/dlam U_lam |_(lam=1) = const * W_0``."""
    p = params.p
    return normalizing_constant(params) * (params.N - p + params.alpha) / (p * (p - 1.0))


def dilation_generator(params: CknParams, r, amplitude: float = 1.0) -> np.ndarray:
    """``amplitude * d/dlam (U_lam)`` at ``lam = 1``."""
    return amplitude * dilation_constant(params) * w0_value(params, r)


def harmonic_basis(N: int, k: int) -> List[Callable[[np.ndarray], np.ndarray]]:
    """Homogeneous harmonic polynomials of degree k, evaluated at points ``(..., N)``.

    On unit vectors these are the spherical harmonics of degree k.  Only
    ``k <= 2`` is provided explicitly.
    """
    if k == 0:
        return [lambda x: np.ones(np.shape(x)[:-1])]
    if k == 1:
        return [(lambda x, i=i: np.asarray(x)[..., i]) for i in range(N)]
    if k == 2:
        out = []
        for i in range(N):
            for j in range(i + 1, N):
                out.append(lambda x, i=i, j=j: np.asarray(x)[..., i] * np.asarray(x)[..., j])
        for i in range(N - 1):
            out.append(lambda x, i=i: np.asarray(x)[..., i] ** 2 - np.asarray(x)[..., i + 1] ** 2)
        return out
    raise NotImplementedError("explicit harmonic bases are provided for k <= 2")
