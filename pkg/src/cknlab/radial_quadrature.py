"""Weighted radial integrals on graded grids with power-law tail corrections.

Integrals ``int_0^inf F(r) dr`` are computed in a uniform auxiliary
variable ``y`` with ``r = r(y)``.  The default grid is log-uniform
(``y = log r``), on which integrands with power-law ends decay
exponentially, so composite Simpson converges fast.  The pieces outside
``[r_min, r_max]`` are added in closed form from the local power law.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .closed_forms import extremal, sphere_area
from .errors import DerivativeRequired, NonIntegrable, ProfileFormatError, ZeroFunction
from .params import CknParams, derive
from .radial import RadialFunction

DEFAULT_R_MIN = 1e-6
DEFAULT_R_MAX = 1e6
DEFAULT_N = 4000


@dataclass(frozen=True)
class RadialGrid:
    """Sample radii with the change of variable ``r = r(y)`` and its Jacobian.

    ``pieces`` holds node indices where Simpson panels must not straddle
    (breakpoints of the integrand); every piece has an even number of
    intervals.
    """

    nodes: np.ndarray
    r_min: float
    r_max: float
    n: int
    grading: str
    y: np.ndarray
    jac: np.ndarray
    rule: str = "simpson"
    pieces: Optional[Tuple[int, ...]] = None

    def halved(self) -> "RadialGrid":
        sl = slice(None, None, 2)
        pieces = None if self.pieces is None else tuple(i // 2 for i in self.pieces)
        return RadialGrid(
            self.nodes[sl], float(self.nodes[0]), float(self.nodes[sl][-1]),
            len(self.nodes[sl]), self.grading, self.y[sl], self.jac[sl], self.rule, pieces,
        )


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    tail_origin: float = 0.0
    tail_infinity: float = 0.0


def _sidi_grading(u: np.ndarray, left: bool, right: bool):
    """Map ``[0, 1]`` onto itself with vanishing slope at the flagged ends.

    Uses ``u - sin(2 pi u) / (2 pi)`` (or one half of it), which turns an
    endpoint singularity ``x^s`` of the integrand into ``u^(3s+2)`` and so
    keeps Simpson's rule at fourth order across breakpoints.
    """
    def both(v):
        return v - np.sin(2 * np.pi * v) / (2 * np.pi), 1.0 - np.cos(2 * np.pi * v)

    if left and right:
        return both(u)
    if left:
        f, d = both(0.5 * u)
        return 2.0 * f, d
    if right:
        f, d = both(0.5 + 0.5 * u)
        return 2.0 * f - 1.0, d
    return u, np.ones_like(u)


def make_grid(
    r_min: float = DEFAULT_R_MIN,
    r_max: float = DEFAULT_R_MAX,
    n: int = DEFAULT_N,
    grading: str = "log",
    breakpoints: Optional[Sequence[float]] = None,
    min_piece: int = 512,
) -> RadialGrid:
    """Log-uniform (or tanh-compactified) grid on ``[r_min, r_max]``.

    With ``breakpoints`` the log grid is split there, each piece receiving a
    share of about ``n`` nodes proportional to its log-length but never
    fewer than ``min_piece`` intervals.
    """
    if not (0.0 < r_min < r_max) or n < 16:
        raise ValueError("need 0 < r_min < r_max and n >= 16")
    lo, hi = math.log(r_min), math.log(r_max)
    inner = sorted({math.log(b) for b in (breakpoints or ()) if r_min < b < r_max})
    if inner:
        if grading != "log":
            raise ValueError("breakpoints need the log grading")
        edges = [lo] + inner + [hi]
        total = hi - lo
        ys, xs, ds, pieces = [np.array([lo])], [np.array([lo])], [np.array([0.0])], [0]
        for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            m = max(min_piece, 2 * int(round(0.5 * (n - 1) * (b - a) / total)))
            m += m % 2
            u = np.linspace(0.0, 1.0, m + 1)[1:]
            phi, dphi = _sidi_grading(u, left=j > 0, right=j < len(edges) - 2)
            ys.append(a + (b - a) * u)
            xs.append(a + (b - a) * phi)
            ds.append(dphi)
            pieces.append(pieces[-1] + m)
        y = np.concatenate(ys)
        r = np.exp(np.concatenate(xs))
        dphi = np.concatenate(ds)
        dphi[0] = 1.0 if len(edges) > 2 else dphi[0]
        r[0], r[-1] = r_min, r_max
        return RadialGrid(r, r_min, r_max, len(r), grading, y, r * dphi, "simpson", tuple(pieces))
    if grading == "log":
        y = np.linspace(lo, hi, n)
        r = np.exp(y)
        jac = r.copy()
    elif grading == "tanh":
        # x = c + L artanh(y) maps (-ymax, ymax) onto [lo, hi]
        ymax = 0.995
        c, L = 0.5 * (lo + hi), 0.5 * (hi - lo) / math.atanh(ymax)
        y = np.linspace(-ymax, ymax, n)
        r = np.exp(c + L * np.arctanh(y))
        jac = r * L / (1.0 - y**2)
    else:
        raise ValueError(f"unknown grading {grading!r}")
    r[0], r[-1] = r_min, r_max
    return RadialGrid(r, r_min, r_max, n, grading, y, jac)


def tabulated_grid(nodes) -> RadialGrid:
    """Grid made of given sample radii; integrated by the trapezoid rule in log r."""
    r = np.asarray(nodes, dtype=float)
    if r.ndim != 1 or len(r) < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ProfileFormatError("nodes must be positive and strictly increasing")
    return RadialGrid(r, float(r[0]), float(r[-1]), len(r), "tabulated", np.log(r), r.copy(), "trapezoid")


def _local_slope(r0, r1, f0, f1) -> Optional[float]:
    if f0 == 0.0 or f1 == 0.0 or np.sign(f0) != np.sign(f1):
        return None
    return math.log(abs(f1) / abs(f0)) / math.log(r1 / r0)


def _tails(F: np.ndarray, r: np.ndarray, scale: float, hints: Tuple[Optional[float], Optional[float]]):
    """Closed-form integrals of the local power law beyond both grid ends."""
    out = []
    extra_err = 0.0
    for end in (0, 1):
        if end == 0:
            f, rr, s = F[0], r[0], hints[0]
            s_est = _local_slope(r[0], r[1], F[0], F[1])
        else:
            f, rr, s = F[-1], r[-1], hints[1]
            s_est = _local_slope(r[-2], r[-1], F[-2], F[-1])
        mass = abs(f * rr)
        if mass <= 1e-17 * scale or not math.isfinite(mass):
            if not math.isfinite(mass):
                raise NonIntegrable("integrand not finite at a grid end")
            out.append(0.0)
            continue
        if s is None:
            s = s_est
        if s is None:
            # sign change at the very end: no reliable power law
            out.append(0.0)
            extra_err += mass
            continue
        if end == 0:
            if s <= -1.0:
                raise NonIntegrable(f"integrand ~ r^{s:.4g} diverges at the origin")
            out.append(f * rr / (s + 1.0))
        else:
            if s >= -1.0:
                raise NonIntegrable(f"integrand ~ r^{s:.4g} diverges at infinity")
            out.append(-f * rr / (s + 1.0))
        if s_est is not None:
            extra_err += abs(out[-1]) * min(1.0, abs(s - s_est))
    return out[0], out[1], extra_err


def _main_sum(F: np.ndarray, grid: RadialGrid):
    """Composite rule along the last axis of ``F``."""
    g = F * grid.jac
    if grid.rule == "trapezoid":
        return np.trapezoid(g, grid.y, axis=-1) if hasattr(np, "trapezoid") else np.trapz(g, grid.y, axis=-1)
    if grid.pieces is None:
        return simpson(g, x=grid.y, axis=-1)
    return sum(
        simpson(g[..., a:b + 1], x=grid.y[a:b + 1], axis=-1)
        for a, b in zip(grid.pieces[:-1], grid.pieces[1:])
    )


def quadrature_weights(grid: RadialGrid) -> np.ndarray:
    """Weights ``w`` with ``w @ F`` equal to the main sum of the grid's rule."""
    # every rule is linear in the samples; apply it to blocks of unit vectors
    n = grid.n
    w = np.empty(n)
    block = 256
    for start in range(0, n, block):
        stop = min(n, start + block)
        E = np.zeros((stop - start, n))
        E[np.arange(stop - start), np.arange(start, stop)] = 1.0
        w[start:stop] = _main_sum(E, grid)
    return w


def integrate_samples(
    F: np.ndarray,
    grid: RadialGrid,
    hints: Tuple[Optional[float], Optional[float]] = (None, None),
    estimate_error: bool = True,
    weights: Optional[np.ndarray] = None,
) -> QuadratureResult:
    """Integrate ``F`` sampled at ``grid.nodes`` over ``(0, inf)``.

    ``hints`` are optional power-law exponents of ``F`` at the origin and at
    infinity; when absent they are read off the last two samples.
    """
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise NonIntegrable("integrand has non-finite samples")
    main = float(weights @ F) if weights is not None else float(_main_sum(F, grid))
    scale = float(np.sum(np.abs(F * grid.jac))) * float(np.mean(np.abs(np.diff(grid.y))))
    t0, t1, terr = _tails(F, grid.nodes, scale, hints)
    value = main + t0 + t1
    err = terr + 1e-15 * scale
    if estimate_error and len(F) >= 33:
        half = grid.halved()
        Fh = F[::2]
        mh = float(_main_sum(Fh, half))
        h0, h1, _ = _tails(Fh, half.nodes, scale, hints)
        err += abs((mh + h0 + h1) - value)
    return QuadratureResult(value, err, t0, t1)


def integrate(fun, grid: Optional[RadialGrid] = None, hints=(None, None)) -> QuadratureResult:
    grid = grid if grid is not None else make_grid()
    return integrate_samples(fun(grid.nodes), grid, hints)


def _grid_for(grid: Optional[RadialGrid], *funcs: RadialFunction) -> RadialGrid:
    """The caller's grid, else the data nodes of a tabulated input, else the
    default log grid split at the inputs' breakpoints."""
    if grid is not None:
        return grid
    for f in funcs:
        if f.tabulated:
            return tabulated_grid(f.nodes)
    return make_grid(breakpoints=breakpoints_of(*funcs))


def breakpoints_of(*funcs: RadialFunction) -> Tuple[float, ...]:
    return tuple(sorted({b for f in funcs for b in (f.breakpoints or ())}))


def _deriv(u: RadialFunction, r: np.ndarray) -> np.ndarray:
    return u.derivative(r)


def d1p_norm_p(u: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None) -> QuadratureResult:
    """``int_{R^N} |x|^alpha |grad u|^p dx`` for radial u."""
    grid = _grid_for(grid, u)
    N, p, a = params.N, params.p, params.alpha
    r = grid.nodes
    F = r ** (a + N - 1.0) * np.abs(_deriv(u, r)) ** p
    hints = (
        None if u.origin_hint is None else a + N - 1.0 + p * (u.origin_hint - 1.0),
        None if u.decay_hint is None else a + N - 1.0 + p * (u.decay_hint - 1.0),
    )
    res = integrate_samples(F, grid, hints)
    w = sphere_area(N)
    return QuadratureResult(w * res.value, w * res.error_estimate, w * res.tail_origin, w * res.tail_infinity)


def lp_star_norm_p(u: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None) -> QuadratureResult:
    """``int_{R^N} |x|^beta |u|^(p*) dx``."""
    grid = _grid_for(grid, u)
    N, b = params.N, params.beta
    ps = derive(params).p_star
    r = grid.nodes
    F = r ** (b + N - 1.0) * np.abs(u.value(r)) ** ps
    hints = (None, None if u.decay_hint is None else b + N - 1.0 + ps * u.decay_hint)
    res = integrate_samples(F, grid, hints)
    w = sphere_area(N)
    return QuadratureResult(w * res.value, w * res.error_estimate, w * res.tail_origin, w * res.tail_infinity)


def _root(res: QuadratureResult, k: float) -> QuadratureResult:
    v = res.value ** (1.0 / k)
    err = v * res.error_estimate / (k * res.value) if res.value > 0 else res.error_estimate
    return QuadratureResult(v, err, res.tail_origin, res.tail_infinity)


def d1p_norm(u: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None) -> QuadratureResult:
    return _root(d1p_norm_p(u, params, grid), params.p)


def lp_star_norm(u: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None) -> QuadratureResult:
    return _root(lp_star_norm_p(u, params, grid), derive(params).p_star)


def rayleigh_quotient(u: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None) -> float:
    """``||u||^p / ||u||_*^p``, bounded below by the sharp constant on radial u."""
    num = d1p_norm_p(u, params, grid).value
    den = lp_star_norm(u, params, grid).value
    if not den > 0:
        raise ZeroFunction("the Rayleigh quotient is undefined for u = 0")
    return num / den**params.p


def l2_star_inner(u: RadialFunction, v: RadialFunction, params: CknParams,
                  grid: Optional[RadialGrid] = None) -> QuadratureResult:
    """``int |x|^beta U^(p*-2) u v dx`` with U the extremal at lambda = 1."""
    grid = _grid_for(grid, u, v)
    N, b = params.N, params.beta
    ps = derive(params).p_star
    r = grid.nodes
    U = extremal(params).value(r)
    F = r ** (b + N - 1.0) * U ** (ps - 2.0) * u.value(r) * v.value(r)
    res = integrate_samples(F, grid)
    w = sphere_area(N)
    return QuadratureResult(w * res.value, w * res.error_estimate, w * res.tail_origin, w * res.tail_infinity)


def d12_star_inner(u: RadialFunction, v: RadialFunction, params: CknParams,
                   grid: Optional[RadialGrid] = None) -> QuadratureResult:
    """``int |x|^alpha |grad U|^(p-2) grad u . grad v dx``."""
    grid = _grid_for(grid, u, v)
    N, p, a = params.N, params.p, params.alpha
    r = grid.nodes
    dU = np.abs(extremal(params).derivative(r))
    F = r ** (a + N - 1.0) * dU ** (p - 2.0) * _deriv(u, r) * _deriv(v, r)
    res = integrate_samples(F, grid)
    w = sphere_area(N)
    return QuadratureResult(w * res.value, w * res.error_estimate, w * res.tail_origin, w * res.tail_infinity)


def transform_to_s(u: RadialFunction, params: CknParams) -> RadialFunction:
    """``v(s) = u(s^t)``, the profile in the variable that flattens the weights."""
    t = derive(params).t

    def val(s):
        return u.value_at(np.asarray(s, dtype=float) ** t)

    def d1(s):
        s = np.asarray(s, dtype=float)
        return u.derivative(s**t) * t * s ** (t - 1.0)

    d2 = None
    if u.derivative_at is not None:
        def d2(s):
            s = np.asarray(s, dtype=float)
            r = s**t
            return u.second_derivative(r) * (t * s ** (t - 1.0)) ** 2 + u.derivative(r) * t * (t - 1.0) * s ** (t - 2.0)

    return RadialFunction(
        value_at=val,
        derivative_at=d1,
        second_derivative_at=d2,
        decay_hint=None if u.decay_hint is None else t * u.decay_hint,
        origin_hint=None if u.origin_hint is None else t * u.origin_hint,
        nodes=None if u.nodes is None else u.nodes ** (1.0 / t),
        label=f"s-transform({u.label})",
        breakpoints=None if u.breakpoints is None else tuple(b ** (1.0 / t) for b in u.breakpoints),
    )


def transform_to_r(v: RadialFunction, params: CknParams) -> RadialFunction:
    """Inverse of :func:`transform_to_s`: ``u(r) = v(r^(1/t))``."""
    t = derive(params).t
    it = 1.0 / t

    def val(r):
        return v.value_at(np.asarray(r, dtype=float) ** it)

    def d1(r):
        r = np.asarray(r, dtype=float)
        return v.derivative(r**it) * it * r ** (it - 1.0)

    return RadialFunction(
        value_at=val,
        derivative_at=d1,
        decay_hint=None if v.decay_hint is None else it * v.decay_hint,
        origin_hint=None if v.origin_hint is None else it * v.origin_hint,
        nodes=None if v.nodes is None else v.nodes**t,
        label=f"r-transform({v.label})",
        breakpoints=None if v.breakpoints is None else tuple(b**t for b in v.breakpoints),
    )


def transformed_integrals(v: RadialFunction, params: CknParams, grid: Optional[RadialGrid] = None):
    """Gradient and L^{p*} integrals of ``u`` recomputed from ``v(s) = u(s^t)``.

    Returns ``(|S^(N-1)| t^(1-p) int s^(K-1) |v'|^p ds,
    |S^(N-1)| t int s^(K-1) |v|^(p*) ds)``, which equal the gradient and
    weighted Lebesgue integrals of ``u``.
    """
    grid = _grid_for(grid, v)
    d = derive(params)
    p = params.p
    s = grid.nodes
    w = sphere_area(params.N)
    grad_hints = (
        None if v.origin_hint is None else d.K - 1.0 + p * (v.origin_hint - 1.0),
        None if v.decay_hint is None else d.K - 1.0 + p * (v.decay_hint - 1.0),
    )
    Fg = s ** (d.K - 1.0) * np.abs(v.derivative(s)) ** p
    Fs = s ** (d.K - 1.0) * np.abs(v.value(s)) ** d.p_star
    star_hints = (None, None if v.decay_hint is None else d.K - 1.0 + d.p_star * v.decay_hint)
    g = integrate_samples(Fg, grid, grad_hints)
    st = integrate_samples(Fs, grid, star_hints)
    return (
        QuadratureResult(w * d.t ** (1.0 - p) * g.value, w * d.t ** (1.0 - p) * g.error_estimate),
        QuadratureResult(w * d.t * st.value, w * d.t * st.error_estimate),
    )


def pde_residual(u: RadialFunction, params: CknParams, r_samples) -> np.ndarray:
    """Relative residual of ``-div(|x|^alpha |grad u|^(p-2) grad u) = |x|^beta |u|^(p*-2) u``.

    Normalised pointwise by ``|x|^beta |u|^(p*-1)``.
    """
    if u.derivative_at is None:
        raise DerivativeRequired("pde_residual needs an analytic derivative")
    r = np.asarray(r_samples, dtype=float)
    N, p, a, b = params.N, params.p, params.alpha, params.beta
    ps = derive(params).p_star
    if u.p_laplacian_at is not None:
        lhs = u.p_laplacian_at(r)
    else:
        du = u.derivative(r)
        d2u = u.second_derivative(r)
        lhs = -(r**a) * np.abs(du) ** (p - 2.0) * ((N - 1.0 + a) * du / r + (p - 1.0) * d2u)
    val = u.value(r)
    rhs = r**b * np.abs(val) ** (ps - 2.0) * val
    return np.abs(lhs - rhs) / np.abs(rhs)


def transformed_residual(v: RadialFunction, params: CknParams, s_samples) -> np.ndarray:
    """Relative residual of ``-s^(1-K)(s^(K-1)|v'|^(p-2) v')' = t^p |v|^(p*-2) v``."""
    s = np.asarray(s_samples, dtype=float)
    d = derive(params)
    p = params.p
    dv = v.derivative(s)
    d2v = v.second_derivative(s)
    lhs = -np.abs(dv) ** (p - 2.0) * ((d.K - 1.0) * dv / s + (p - 1.0) * d2v)
    val = v.value(s)
    rhs = d.t**p * np.abs(val) ** (d.p_star - 2.0) * val
    return np.abs(lhs - rhs) / np.abs(rhs)


def _end_power(r0, r1, f0, f1):
    s = _local_slope(r0, r1, f0, f1)
    return s


def tabulated_function(r, u, du=None, label: str = "tabulated") -> RadialFunction:
    """Radial function from samples; cubic spline in ``log r`` between nodes.

    Outside the sample range the value follows the power law fitted to the
    two end samples (zero if the end samples vanish or change sign).
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    tabulated_grid(r)  # validation
    x = np.log(r)
    spl = CubicSpline(x, u)
    dspl = CubicSpline(x, np.asarray(du, dtype=float)) if du is not None else None
    s_lo = _end_power(r[0], r[1], u[0], u[1])
    s_hi = _end_power(r[-2], r[-1], u[-2], u[-1])

    def _extend(rr, inner, at_nodes_u, at_nodes_du=None):
        rr = np.asarray(rr, dtype=float)
        out = np.asarray(inner(rr), dtype=float).copy()
        lo, hi = rr < r[0], rr > r[-1]
        if np.any(lo):
            out[lo] = 0.0 if s_lo is None else at_nodes_u(0, rr[lo], s_lo)
        if np.any(hi):
            out[hi] = 0.0 if s_hi is None else at_nodes_u(-1, rr[hi], s_hi)
        return out

    def value_at(rr):
        return _extend(rr, lambda z: spl(np.log(np.clip(z, r[0], r[-1]))),
                       lambda i, z, s: u[i] * (z / r[i]) ** s)

    def derivative_at(rr):
        if dspl is not None:
            inner = lambda z: dspl(np.log(np.clip(z, r[0], r[-1])))
        else:
            inner = lambda z: spl(np.log(np.clip(z, r[0], r[-1])), 1) / np.clip(z, r[0], r[-1])
        return _extend(rr, inner, lambda i, z, s: s * u[i] / r[i] * (z / r[i]) ** (s - 1.0))

    def exact_at_nodes(fun, data):
        def wrapped(rr):
            rr = np.asarray(rr, dtype=float)
            if rr.shape == r.shape and np.array_equal(rr, r):
                return data.copy()
            return fun(rr)
        return wrapped

    du_nodes = np.asarray(du, dtype=float) if du is not None else derivative_at(r)
    return RadialFunction(
        value_at=exact_at_nodes(value_at, u),
        derivative_at=exact_at_nodes(derivative_at, du_nodes),
        nodes=r,
        label=label,
    )


def load_profile_csv(path) -> RadialFunction:
    """Read ``r,u[,du]`` samples; rows must have strictly increasing positive r."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ProfileFormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ProfileFormatError("empty profile file")
    header = [h.strip().lower() for h in rows[0]]
    if header not in (["r", "u"], ["r", "u", "du"]):
        raise ProfileFormatError(f"header must be 'r,u' or 'r,u,du', got {','.join(rows[0])!r}")
    width = len(header)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ProfileFormatError(f"line {lineno}: expected {width} columns")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise ProfileFormatError(f"line {lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in vals):
            raise ProfileFormatError(f"line {lineno}: NaN or Inf")
        data.append(vals)
    if len(data) < 4:
        raise ProfileFormatError("need at least 4 samples")
    arr = np.array(data)
    r = arr[:, 0]
    if np.any(r <= 0):
        raise ProfileFormatError("radii must be positive")
    if np.any(np.diff(r) <= 0):
        raise ProfileFormatError("radii must be strictly increasing")
    du = arr[:, 2] if width == 3 else None
    return tabulated_function(r, arr[:, 1], du, label=str(path))


def write_profile_csv(path, r: Sequence[float], u: Sequence[float], du: Optional[Sequence[float]] = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u"] if du is None else ["r", "u", "du"])
        for i in range(len(r)):
            row = [repr(float(r[i])), repr(float(u[i]))]
            if du is not None:
                row.append(repr(float(du[i])))
            w.writerow(row)
