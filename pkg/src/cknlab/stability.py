"""Distance to the extremal manifold, deficit, and the pointwise inequalities
behind the remainder estimates.

The manifold is ``M = {c U_lam : c real, lam > 0}``.  Distances are taken in
the weighted gradient norm; empirical constants are sample infima and are
never claimed as certified bounds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from .closed_forms import extremal, sphere_area, sharp_constant, w0_function
from .errors import (
    BranchViolation,
    NonConvergence,
    OrthogonalityViolation,
    ZeroBase,
    ZeroFunction,
)
from .params import CknParams, derive
from .radial import RadialFunction, combine
from .radial_quadrature import (
    RadialGrid,
    _grid_for,
    d1p_norm,
    d1p_norm_p,
    integrate_samples,
    l2_star_inner,
    lp_star_norm,
    make_grid,
    quadrature_weights,
)

ORTHO_TOL = 1e-6


# ---------------------------------------------------------------------------
# pointwise inequalities


@dataclass
class InequalityCheck:
    lhs: np.ndarray
    rhs: np.ndarray
    margin: np.ndarray
    holds: np.ndarray


def _make_check(lhs, rhs, margin, scale) -> InequalityCheck:
    lhs, rhs, margin = np.asarray(lhs), np.asarray(rhs), np.asarray(margin)
    holds = margin >= -1e-12 * np.asarray(scale)
    return InequalityCheck(lhs, rhs, margin, holds)


def _norm(v):
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


def omega_vector(x, xy, p: float) -> np.ndarray:
    """The interpolating vector ``omega(x, x+y)`` of the gradient inequality.

    ``x`` and ``xy`` have shape ``(..., N)``; ``xy`` is ``x + y``.
    """
    x = np.asarray(x, dtype=float)
    xy = np.asarray(xy, dtype=float)
    nx, nxy = _norm(x), _norm(xy)
    if np.any(nx == 0):
        raise ZeroBase("omega is undefined at x = 0")
    if p == 2:
        return x.copy()
    outside = nx < nxy
    if p < 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            f = (nxy / ((2.0 - p) * nxy + (p - 1.0) * nx)) ** (1.0 / (p - 2.0))
        f = np.where(outside, f, 1.0)
        return f[..., None] * x
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (nxy / nx) ** (1.0 / (p - 2.0))
    return np.where(outside[..., None], x, f[..., None] * xy)


def _quadratic_bracket(x, y, p):
    """``p|x|^(p-2)|y|^2 + p(p-2)|omega|^(p-2)(|x|-|x+y|)^2`` and its pieces."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = x + y
    nx, ny, nxy = _norm(x), _norm(y), _norm(xy)
    om = _norm(omega_vector(x, xy, p))
    with np.errstate(divide="ignore"):
        om_pow = np.where(om > 0, om, 1.0) ** (p - 2.0) if p != 2 else np.ones_like(om)
        om_pow = np.where(om > 0, om_pow, 0.0) if p > 2 else om_pow
    q = p * nx ** (p - 2.0) * ny**2 + p * (p - 2.0) * om_pow * (nx - nxy) ** 2
    return q, nx, ny, nxy


def check_gradient_inequality(x, y, p: float, kappa: float, C1: float) -> InequalityCheck:
    """Both sides of the lower expansion of ``|x+y|^p``."""
    if not 0.0 <= kappa < 1.0 or C1 < 0:
        raise ValueError("need 0 <= kappa < 1 and C1 >= 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    quad, nx, ny, nxy = _quadratic_bracket(x, y, p)
    dot = np.sum(x * y, axis=-1)
    base = nx**p + p * nx ** (p - 2.0) * dot + 0.5 * (1.0 - kappa) * quad
    rhs = base + C1 * _gradient_extra(nx, ny, p)
    lhs = nxy**p
    return _make_check(lhs, rhs, lhs - rhs, nx**p + ny**p + nxy**p)


def _gradient_extra(nx, ny, p):
    if p < 2:
        return np.minimum(ny**p, nx ** (p - 2.0) * ny**2)
    return ny**p


def gradient_constant_samples(x, y, p: float, kappa: float) -> np.ndarray:
    """Largest admissible ``C1`` for each sample (``+inf`` where y = 0)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    quad, nx, ny, nxy = _quadratic_bracket(x, y, p)
    dot = np.sum(x * y, axis=-1)
    base = nx**p + p * nx ** (p - 2.0) * dot + 0.5 * (1.0 - kappa) * quad
    extra = _gradient_extra(nx, ny, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (nxy**p - base) / extra
    return np.where(extra > 0, out, np.inf)


def p_less_two_bracket(x, y, p: float) -> np.ndarray:
    """``|x|^(p-2)|y|^2 + (p-2)|omega|^(p-2)(|x|-|x+y|)^2`` for ``1 < p < 2``."""
    if not 1.0 < p < 2.0:
        raise ValueError("bracket is stated for 1 < p < 2")
    quad, *_ = _quadratic_bracket(x, y, p)
    return quad / p


def check_fz_lower_bound(x, y, p: float) -> np.ndarray:
    """Ratio of the quadratic bracket to ``|x|/(|x|+|y|) |x|^(p-2) |y|^2``.

    Its infimum over samples estimates ``c(p)``; samples with ``y = 0`` give
    ``+inf``.
    """
    if not 1.0 < p < 2.0:
        raise ValueError("the bound is stated for 1 < p < 2")
    quad, nx, ny, _ = _quadratic_bracket(x, y, p)
    weighted = nx / (nx + ny) * nx ** (p - 2.0) * ny**2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = quad / weighted
    return np.where(weighted > 0, ratio, np.inf)


def scalar_branch_small(params: CknParams) -> bool:
    """True on the branch ``p <= 2(N+alpha)/(N+2+beta)``, i.e. ``p* <= 2``."""
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    return p <= 2.0 * (N + a) / (N + 2.0 + b)


def check_scalar_inequality(a, b, params: CknParams, kappa: float, C2: float) -> InequalityCheck:
    """Upper expansion of ``|a+b|^(p*)``; margin is ``rhs - lhs``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    q = derive(params).p_star
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aa, bb = np.abs(a), np.abs(b)
    first = np.sign(a) * aa ** (q - 1.0) * b
    coef = 0.5 * q * (q - 1.0) + kappa
    if scalar_branch_small(params):
        den = aa**2 + bb**2
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = coef * (aa + C2 * bb) ** q * bb**2 / den
        tail = np.where(den > 0, tail, 0.0)
    else:
        tail = coef * aa ** (q - 2.0) * bb**2 + C2 * bb**q
    rhs = aa**q + q * first + tail
    lhs = np.abs(a + b) ** q
    return _make_check(lhs, rhs, rhs - lhs, aa**q + bb**q + lhs)


def minimal_scalar_constant(a, b, params: CknParams, kappa: float, hi: float = 1.0,
                            rel_tol: float = 1e-10) -> float:
    """Smallest ``C2`` for which every sample satisfies the scalar inequality.

    Found by bisection on the ``p* <= 2`` branch, where ``C2`` sits inside a
    power; on the other branch it is a maximum of explicit ratios.
    """
    if not scalar_branch_small(params):
        # C2 enters linearly on this branch: the minimum is a sample maximum
        chk = check_scalar_inequality(a, b, params, kappa, 0.0)
        bq = np.abs(np.asarray(b, dtype=float)) ** derive(params).p_star
        sel = bq > 0
        need = np.where(sel, -chk.margin / np.where(sel, bq, 1.0), 0.0)
        return float(max(0.0, np.max(need)))

    def ok(c):
        return bool(np.all(check_scalar_inequality(a, b, params, kappa, c).holds))

    if ok(0.0):
        return 0.0
    while not ok(hi):
        hi *= 2.0
        if hi > 1e300:
            raise NonConvergence("no feasible C2 found")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def sample_vectors(rng: np.random.Generator, n: int, dim: int, log_range: float = 3.0):
    """Random ``x`` on the unit sphere and ``y`` with log-uniform relative size."""
    x = rng.standard_normal((n, dim))
    x /= _norm(x)[:, None]
    x *= np.exp(rng.uniform(-1.0, 1.0, n))[:, None]
    d = rng.standard_normal((n, dim))
    d /= _norm(d)[:, None]
    size = np.exp(rng.uniform(-log_range, log_range, n) * math.log(10.0))
    y = d * (size * _norm(x))[:, None]
    # a share of exactly anti-parallel and parallel perturbations
    m = n // 10
    y[:m] = -x[:m] * rng.uniform(0.0, 2.5, m)[:, None]
    y[m:2 * m] = x[m:2 * m] * rng.uniform(0.0, 3.0, m)[:, None]
    return x, y


# ---------------------------------------------------------------------------
# manifold projection


@dataclass
class ManifoldProjection:
    c: float
    lam: float
    d: float
    w: Optional[RadialFunction]
    converged: bool
    restarts_used: int
    local_minima: List[Tuple[float, float, float]] = field(default_factory=list)
    unique: bool = True
    stationarity: float = 0.0
    stationarity_c: float = 0.0


@dataclass
class ProjectionOptions:
    n_starts: int = 5
    coarse: int = 21
    log_lam_range: Tuple[float, float] = (-3.0, 3.0)
    xatol: float = 1e-8
    max_restarts: int = 4
    maxiter: int = 4000


class _DistanceObjective:
    """``||u - c U_lam||`` on a fixed grid with ``u'`` sampled once."""

    def __init__(self, u: RadialFunction, params: CknParams, grid: RadialGrid):
        self.params = params
        self.grid = grid
        r = grid.nodes
        self.du = u.derivative(r)
        self.weight = r ** (params.alpha + params.N - 1.0)
        self.area = sphere_area(params.N)
        self.qweights = quadrature_weights(grid)
        self.evals = 0
        # tail exponents of the difference: the slower of u and U; for inputs
        # without hints (tabulated data) the end slope of a near-cancelling
        # difference is noise, so the extremal's own exponents are used
        U = extremal(params)
        o = U.q if u.origin_hint is None else min(u.origin_hint, U.q)
        dcy = U.decay_exponent if u.decay_hint is None else max(u.decay_hint, U.decay_exponent)
        base = params.alpha + params.N - 1.0
        self.hints = (
            None if o is None else base + params.p * (o - 1.0),
            None if dcy is None else base + params.p * (dcy - 1.0),
        )

    def grad_profile(self, lam: float) -> np.ndarray:
        return extremal(self.params, 1.0, lam).derivative(self.grid.nodes)

    def norm_of(self, dv: np.ndarray) -> float:
        F = self.weight * np.abs(dv) ** self.params.p
        val = integrate_samples(F, self.grid, self.hints, estimate_error=False,
                                weights=self.qweights).value
        return (self.area * max(val, 0.0)) ** (1.0 / self.params.p)

    def __call__(self, z) -> float:
        c, loglam = float(z[0]), float(z[1])
        self.evals += 1
        return self.norm_of(self.du - c * self.grad_profile(math.exp(loglam)))


def _nm(obj, z0, opts: ProjectionOptions, step, fatol):
    simplex = np.array([z0, z0 + [step[0], 0.0], z0 + [0.0, step[1]]])
    res = minimize(
        obj, z0, method="Nelder-Mead",
        options={"xatol": opts.xatol, "fatol": fatol, "maxiter": opts.maxiter,
                 "initial_simplex": simplex},
    )
    diam = float(np.max(np.abs(res.final_simplex[0] - res.final_simplex[0][0])))
    return res.x, float(res.fun), diam <= opts.xatol * 1.0001 or res.success


def project_to_manifold(
    u: RadialFunction,
    params: CknParams,
    grid: Optional[RadialGrid] = None,
    opts: Optional[ProjectionOptions] = None,
) -> ManifoldProjection:
    """Minimize ``||u - c U_lam||`` over ``(c, log lam)`` with seeded multi-start Nelder-Mead."""
    opts = opts or ProjectionOptions()
    grid = _grid_for(grid, u)
    obj = _DistanceObjective(u, params, grid)
    nu = obj.norm_of(obj.du)
    if not nu > 0:
        raise ZeroFunction("u has zero norm")
    nU = obj.norm_of(obj.grad_profile(1.0))
    cmax = 2.0 * nu / nU
    cs = np.linspace(-cmax, cmax, opts.coarse)
    ls = np.linspace(*opts.log_lam_range, opts.coarse)
    vals = np.array([[obj((c, l)) for l in ls] for c in cs])
    order = np.argsort(vals, axis=None, kind="stable")
    seeds = []
    for flat in order:
        i, j = np.unravel_index(flat, vals.shape)
        if all(abs(i - a) > 1 or abs(j - b) > 1 for a, b in seeds):
            seeds.append((i, j))
        if len(seeds) == opts.n_starts:
            break
    step = np.array([cs[1] - cs[0], ls[1] - ls[0]])
    fatol = 1e-13 * nu
    results = []
    restarts = 0
    for i, j in seeds:
        z, f, ok = _nm(obj, np.array([cs[i], ls[j]]), opts, step, fatol)
        # restart from the best vertex with a fresh small simplex until it stops improving
        for _ in range(opts.max_restarts):
            restarts += 1
            z2, f2, ok2 = _nm(obj, z, opts, step * 1e-3, fatol)
            improved = f2 < f - 1e-14 * max(nu, 1.0)
            z, f, ok = (z2, f2, ok2) if f2 <= f else (z, f, ok)
            if not improved and ok:
                break
        results.append((z, f, ok))
    results.sort(key=lambda t: t[1])
    minima: List[Tuple[float, float, float]] = []
    for z, f, ok in results:
        c, lam = float(z[0]), math.exp(float(z[1]))
        if all(abs(c - c0) > 1e-4 * (1.0 + abs(c0)) or abs(math.log(lam / l0)) > 1e-4
               for c0, l0, _ in minima):
            minima.append((c, lam, f))
    best_z, best_f, best_ok = results[0]
    ties = [m for m in minima if m[2] <= best_f * (1.0 + 1e-6) + 1e-12 * nu]
    c, lam = float(best_z[0]), math.exp(float(best_z[1]))
    if not any(ok for _, _, ok in results):
        raise NonConvergence(f"projection did not converge; best d={best_f:.3e} at c={c:.6g}, lam={lam:.6g}")
    d = best_f
    w = None
    stat = stat_c = 0.0
    # below this the distance is at the resolution of the objective and w would be noise
    if d > 1e-11 * nu:
        Ul = extremal(params, c, lam).as_radial_function()
        w = combine([(1.0 / d, u), (-1.0 / d, Ul)])
        r = grid.nodes
        dUl = extremal(params, 1.0, lam).derivative(r)
        dw = (obj.du - c * dUl) / d
        p = params.p
        wt = obj.weight
        ref = integrate_samples(wt * np.abs(dUl) ** p, grid, estimate_error=False).value
        stat = integrate_samples(wt * np.abs(dUl) ** (p - 2.0) * dUl * dw, grid,
                                 estimate_error=False).value / ref ** ((p - 1.0) / p)
        stat_c = integrate_samples(wt * np.abs(dw) ** (p - 2.0) * dw * dUl, grid,
                                   estimate_error=False).value / ref ** (1.0 / p)
        stat *= obj.area ** (1.0 / p)
        stat_c *= obj.area ** ((p - 1.0) / p)
    return ManifoldProjection(c, lam, d, w, best_ok, restarts, minima, len(ties) == 1, stat, stat_c)


# ---------------------------------------------------------------------------
# deficit and scans


@dataclass
class DeficitReport:
    norm_p: float
    norm_star_p: float
    deficit: float
    quotient: float
    exponent: float
    dist: float
    relative_deficit: float


def quotient_exponent(p: float) -> float:
    return p if p >= 2.0 else 2.0


def deficit(
    u: RadialFunction,
    params: CknParams,
    grid: Optional[RadialGrid] = None,
    projection: Optional[ManifoldProjection] = None,
    with_distance: bool = True,
) -> DeficitReport:
    """``||u||^p - S ||u||_*^p`` together with the stability quotient."""
    grid = _grid_for(grid, u)
    np_ = d1p_norm_p(u, params, grid).value
    ns = lp_star_norm(u, params, grid).value ** params.p
    dfc = np_ - sharp_constant(params) * ns
    e = quotient_exponent(params.p)
    dist = float("nan")
    quo = float("nan")
    if with_distance:
        proj = projection or project_to_manifold(u, params, grid)
        dist = proj.d
        if dist > 0:
            quo = dfc / dist**e
    return DeficitReport(np_, ns, dfc, quo, e, dist, dfc / np_)


def bump_function(lo: float = 1.0, hi: float = 2.0) -> RadialFunction:
    """Smooth bump supported on ``[lo, hi]`` with unit peak."""
    mid = 0.5 * (lo + hi)
    peak = 1.0 / ((mid - lo) * (hi - mid))

    def core(r):
        r = np.asarray(r, dtype=float)
        inside = (r > lo) & (r < hi)
        g = np.where(inside, (r - lo) * (hi - r), 1.0)
        return inside, g

    def val(r):
        inside, g = core(r)
        return np.exp(np.where(inside, peak - 1.0 / g, -np.inf))

    def der(r):
        r = np.asarray(r, dtype=float)
        inside, g = core(r)
        gp = (hi - r) - (r - lo)
        return np.exp(np.where(inside, peak - 1.0 / g, -np.inf)) * gp / g**2

    return RadialFunction(val, der, label=f"bump[{lo:g},{hi:g}]", breakpoints=(lo, mid, hi))


def orthogonalize(v: RadialFunction, against: Sequence[RadialFunction], params: CknParams,
                  grid: Optional[RadialGrid] = None) -> RadialFunction:
    """Remove the L^2_{beta,*} components of ``v`` along ``against`` (Gram-Schmidt)."""
    basis: List[RadialFunction] = []
    for f in against:
        g = f
        for b in basis:
            g = combine([(1.0, g), (-l2_star_inner(g, b, params, grid).value, b)])
        nrm = math.sqrt(l2_star_inner(g, g, params, grid).value)
        basis.append(g.scaled(1.0 / nrm))
    out = v
    for b in basis:
        out = combine([(1.0, out), (-l2_star_inner(out, b, params, grid).value, b)])
    return out


def third_eigenvector(params: CknParams, n: int = 2000, grid: Optional[RadialGrid] = None) -> RadialFunction:
    """Third radial eigenfunction, made exactly orthogonal to U and W_0 by quadrature."""
    from .spectrum import assemble_mode, eigen_solve, eigenfunction

    prob = assemble_mode(params, 0, n)
    pair = eigen_solve(prob, 3)[2]
    f = eigenfunction(prob, pair, label="eig3")
    U = extremal(params).as_radial_function()
    return orthogonalize(f, [U, w0_function(params)], params, grid)


def perturbation(params: CknParams, family: Union[str, RadialFunction],
                 grid: Optional[RadialGrid] = None) -> RadialFunction:
    """Direction ``w`` for ``u(eps) = U_1 + eps w``, scaled so ``||w|| = ||U_1||``."""
    if isinstance(family, RadialFunction):
        w = family
    elif family == "w0":
        w = w0_function(params)
    elif family == "bump":
        w = bump_function(1.0, 2.0)
    elif family == "eigen3":
        w = third_eigenvector(params, grid=grid)
    elif family == "mixture":
        w = combine([(1.0, bump_function(1.0, 2.0)), (1.0, w0_function(params))])
    else:
        raise ValueError(f"unknown perturbation family {family!r}")
    U = extremal(params).as_radial_function()
    s = d1p_norm(U, params, grid).value / d1p_norm(w, params, grid).value
    out = w.scaled(s)
    return RadialFunction(out.value_at, out.derivative_at, out.second_derivative_at,
                          w.decay_hint, w.origin_hint, None, w.nodes,
                          family if isinstance(family, str) else w.label, w.breakpoints)


@dataclass
class ScanRow:
    eps: float
    deficit: float
    dist: float
    quotient: float


@dataclass
class ScanReport:
    params: CknParams
    family: str
    rows: List[ScanRow]
    empirical_B: float
    slope: float
    exponent: float
    complete: bool = True
    error: str = ""


def loglog_slope(eps, values, lo: float = 1e-3, hi: float = 1e-2) -> float:
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = (eps >= lo * (1 - 1e-12)) & (eps <= hi * (1 + 1e-12)) & (values > 0)
    if sel.sum() < 2:
        sel = values > 0
    if sel.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(eps[sel]), np.log(values[sel]), 1)[0])


def quotient_scan(
    params: CknParams,
    family: Union[str, RadialFunction],
    eps_grid: Sequence[float],
    grid: Optional[RadialGrid] = None,
    opts: Optional[ProjectionOptions] = None,
) -> ScanReport:
    grid = grid or make_grid()
    w = perturbation(params, family, grid)
    U = extremal(params).as_radial_function()
    rows: List[ScanRow] = []
    e = quotient_exponent(params.p)
    label = family if isinstance(family, str) else w.label
    for eps in eps_grid:
        u = combine([(1.0, U), (float(eps), w)])
        try:
            proj = project_to_manifold(u, params, grid, opts)
        except NonConvergence as exc:
            return _finish(params, label, rows, e, False, str(exc))
        rep = deficit(u, params, grid, proj)
        rows.append(ScanRow(float(eps), rep.deficit, rep.dist, rep.quotient))
    return _finish(params, label, rows, e, True, "")


def _finish(params, label, rows, e, complete, err) -> ScanReport:
    q = [r.quotient for r in rows if math.isfinite(r.quotient)]
    B = min(q) if q else float("nan")
    slope = loglog_slope([r.eps for r in rows], [r.deficit for r in rows]) if rows else float("nan")
    return ScanReport(params, label, rows, B, slope, e, complete, err)


def eps_grid(spec: str) -> np.ndarray:
    """Parse ``start:stop:count`` into a log-spaced grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("eps grid must look like start:stop:count")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0 < a < b) or n < 2:
        raise ValueError("need 0 < start < stop and count >= 2")
    return np.logspace(math.log10(a), math.log10(b), n)


# ---------------------------------------------------------------------------
# integral inequalities


def orlicz_poincare_ratio(v: RadialFunction, eps: float, params: CknParams,
                          grid: Optional[RadialGrid] = None) -> float:
    """``int |x|^beta (U+|eps v|)^(p*-2) v^2`` over ``int |x|^alpha (|U'|+eps|v'|)^(p-2) v'^2``."""
    if not scalar_branch_small(params):
        raise BranchViolation("the Orlicz-Poincare ratio needs p <= 2(N+alpha)/(N+2+beta)")
    if not eps > 0:
        raise ValueError("eps must be positive")
    grid = _grid_for(grid, v)
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    ps = derive(params).p_star
    r = grid.nodes
    U = extremal(params)
    vv, dv = v.value(r), v.derivative(r)
    lhs = r ** (b + N - 1.0) * (U.value(r) + np.abs(eps * vv)) ** (ps - 2.0) * vv**2
    rhs = r ** (a + N - 1.0) * (np.abs(U.derivative(r)) + eps * np.abs(dv)) ** (p - 2.0) * dv**2
    return integrate_samples(lhs, grid).value / integrate_samples(rhs, grid).value


def spectral_gap_case(params: CknParams) -> str:
    if params.p >= 2.0:
        return "p>=2"
    return "i" if scalar_branch_small(params) else "ii"


def tangent_cosines(v: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None):
    """L^2_{beta,*} cosines of ``v`` against U and W_0."""
    U = extremal(params).as_radial_function()
    W = w0_function(params)
    nv = math.sqrt(l2_star_inner(v, v, params, grid).value)
    out = []
    for f in (U, W):
        nf = math.sqrt(l2_star_inner(f, f, params, grid).value)
        out.append(l2_star_inner(v, f, params, grid).value / (nv * nf))
    return out


def spectral_gap_lhs_rhs(
    v: RadialFunction,
    params: CknParams,
    grid: Optional[RadialGrid] = None,
    case: Optional[str] = None,
    tau: float = 0.0,
    gamma0: float = 1.0,
    C1: float = 1.0,
    delta: float = 1e-2,
) -> InequalityCheck:
    """Both sides of the spectral-gap estimate for a radial perturbation ``v``.

    ``v`` must be L^2_{beta,*}-orthogonal to U and W_0; non-radial kernel
    directions are orthogonal to every radial function automatically.
    """
    grid = grid or make_grid()
    case = case or spectral_gap_case(params)
    cos = tangent_cosines(v, params, grid)
    if max(abs(c) for c in cos) > ORTHO_TOL:
        raise OrthogonalityViolation(f"v is not orthogonal to the tangent space (cosines {cos})")
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    ps = derive(params).p_star
    U = extremal(params)
    nv = d1p_norm(v, params, grid).value
    if nv > delta * d1p_norm(U.as_radial_function(), params, grid).value:
        warnings.warn("perturbation is not small; the estimate is only asserted near the manifold")
    r = grid.nodes
    dU = U.derivative(r)
    dv = v.derivative(r)
    vv = v.value(r)
    Uv = U.value(r)
    quad, nx, ny, nxy = _quadratic_bracket(dU[:, None], dv[:, None], p)
    integrand = quad / p
    if case in ("i", "ii"):
        integrand = integrand + gamma0 * _gradient_extra(nx, ny, p)
    lhs = integrate_samples(r ** (a + N - 1.0) * integrand, grid).value
    if case == "i":
        dens = (Uv + C1 * np.abs(vv)) ** ps / (Uv**2 + vv**2) * vv**2
    else:
        dens = Uv ** (ps - 2.0) * vv**2
    rhs = (ps - 1.0 + tau) * integrate_samples(r ** (b + N - 1.0) * dens, grid).value
    w = sphere_area(N)
    lhs, rhs = w * lhs, w * rhs
    return _make_check(lhs, rhs, lhs - rhs, abs(lhs) + abs(rhs))
