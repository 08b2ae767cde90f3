"""Command-line front end.

Machine-readable output goes to stdout (or ``--out``); a short human summary
goes to stderr.  Exit codes: 0 success, 1 verification failure, 2 bad
parameters or flags, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import closed_forms as cf
from . import spectrum as sp
from . import stability as st
from .errors import CknError, NonConvergence, ParameterError, ProfileFormatError
from .params import CknParams, classify_degeneracy, derive, to_classical, validate
from .radial_quadrature import (
    RadialGrid,
    load_profile_csv,
    make_grid,
    pde_residual,
    rayleigh_quotient,
    transform_to_s,
    transformed_integrals,
    d1p_norm_p,
    lp_star_norm_p,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_PARAMS, EXIT_IO = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    params: CknParams
    grid_n: Optional[int]
    r_min: float
    r_max: float
    k_max: Optional[int]
    n_eigs: int
    tol: float
    fmt: str
    out: Optional[str]
    seed: int

    def quad_grid(self) -> RadialGrid:
        return make_grid(self.r_min, self.r_max, self.grid_n or 4000)

    @property
    def spectrum_n(self) -> int:
        return self.grid_n or 2000


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_PARAMS)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, required=True, help="space dimension")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--grid-n", type=int, default=None,
                   help="nodes of the radial grid (quadrature default 4000, eigen default 2000)")
    p.add_argument("--rmin", type=float, default=1e-6)
    p.add_argument("--rmax", type=float, default=1e6)
    p.add_argument("--kmax", type=int, default=None, help="largest spherical-harmonic mode")
    p.add_argument("--neigs", type=int, default=3, help="eigenvalues per mode")
    p.add_argument("--tol", type=float, default=1e-3, help="relative tolerance for eigenvalue tags")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgParser(prog="cknlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgParser)
    p = sub.add_parser("classify", help="degeneracy classification")
    _common(p)
    p = sub.add_parser("constants", help="sharp constant and derived exponents")
    _common(p)
    p.add_argument("--verify", action="store_true", help="cross-check against quadrature")
    p = sub.add_parser("spectrum", help="linearized eigenvalue table")
    _common(p)
    p = sub.add_parser("deficit", help="deficit and distance of a tabulated profile")
    _common(p)
    p.add_argument("--input", required=True, help="CSV with header r,u[,du]")
    p = sub.add_parser("scan", help="stability quotient along U + eps w")
    _common(p)
    p.add_argument("--family", choices=("w0", "bump", "eigen3", "mixture"), default="bump")
    p.add_argument("--eps", default="1e-3:0.5:20", help="log grid start:stop:count")
    p = sub.add_parser("verify", help="run the built-in invariant suite")
    _common(p)
    return parser


def _config(ns) -> RunConfig:
    params = validate(ns.N, ns.p, ns.alpha, ns.beta)
    if ns.grid_n is not None and ns.grid_n < 16:
        raise ParameterError("--grid-n must be at least 16")
    if not (0.0 < ns.rmin < ns.rmax):
        raise ParameterError("need 0 < --rmin < --rmax")
    if not ns.tol > 0:
        raise ParameterError("--tol must be positive")
    if ns.neigs < 1 or (ns.kmax is not None and ns.kmax < 0):
        raise ParameterError("--neigs must be >= 1 and --kmax >= 0")
    return RunConfig(params, ns.grid_n, ns.rmin, ns.rmax, ns.kmax, ns.neigs, ns.tol,
                     ns.fmt, ns.out, ns.seed)


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj) + 0.0  # drops the sign of -0.0
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _params_dict(params: CknParams) -> Dict[str, Any]:
    return {"N": params.N, "p": params.p, "alpha": params.alpha, "beta": params.beta}


def _envelope(cfg: RunConfig, command: str, body: Dict[str, Any]) -> Dict[str, Any]:
    out = {"schema_version": SCHEMA_VERSION, "command": command,
           "params": _params_dict(cfg.params), "seed": cfg.seed}
    out.update(body)
    return _clean(out)


def _csv_text(header: Sequence[str], rows: List[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else v for v in _clean(list(row))])
    return buf.getvalue()


def _key_value_rows(d: Dict[str, Any], prefix: str = "") -> List[List[Any]]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_key_value_rows(v, key + "."))
        elif isinstance(v, list):
            rows.append([key, json.dumps(_clean(v), sort_keys=True)])
        else:
            rows.append([key, v])
    return rows


def _emit(cfg: RunConfig, report: Dict[str, Any], table=None) -> None:
    if cfg.fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    elif table is not None:
        text = _csv_text(*table)
    else:
        text = _csv_text(["key", "value"], _key_value_rows(report))
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(msg: str) -> None:
    sys.stderr.write(msg + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg: RunConfig) -> int:
    rep = classify_degeneracy(cfg.params)
    body = {
        "k_real": rep.k_real, "degenerate": rep.degenerate, "k": rep.k,
        "multiplicity": rep.multiplicity, "eigenspace_dim": rep.eigenspace_dim,
        "nearest_k": rep.nearest_k, "distance_to_integer": rep.distance_to_integer,
    }
    _emit(cfg, _envelope(cfg, "classify", body))
    state = f"degenerate at k={rep.k}" if rep.degenerate else "non-degenerate"
    _say(f"classify: k_real={rep.k_real:.10g}, {state}, threshold eigenspace dim {rep.eigenspace_dim}")
    return EXIT_OK


def _constants_body(params: CknParams) -> Dict[str, Any]:
    d = derive(params)
    body = {
        "p_star": d.p_star, "t": d.t, "K": d.K,
        "S": cf.sharp_constant(params),
        "S_via_t": cf.sharp_constant_via_t(params),
        "C_pK": cf.radial_constant(d.K, params.p),
        "normalizing_constant": cf.normalizing_constant(params),
        "hardy": cf.hardy_constant(params.N, params.p, params.alpha),
        "sphere_area": cf.sphere_area(params.N),
    }
    try:
        c = to_classical(params)
        body["classical"] = {"a": c.a, "b": c.b, "h": c.h}
    except CknError:
        pass
    return body


def cmd_constants(cfg: RunConfig, verify: bool) -> int:
    body = _constants_body(cfg.params)
    code = EXIT_OK
    if verify:
        rq = rayleigh_quotient(cf.extremal(cfg.params).as_radial_function(), cfg.params, cfg.quad_grid())
        rel = abs(rq / body["S"] - 1.0)
        ok = rel < 1e-6
        body["verify"] = {"rayleigh_quotient": rq, "relative_difference": rel, "tolerance": 1e-6, "passed": ok}
        code = EXIT_OK if ok else EXIT_VERIFY
        _say(f"constants: S={body['S']:.12g}, quadrature relative difference {rel:.2e} ({'ok' if ok else 'FAILED'})")
    else:
        _say(f"constants: S={body['S']:.12g}, p*={body['p_star']:.10g}, K={body['K']:.10g}")
    _emit(cfg, _envelope(cfg, "constants", body))
    return code


def _default_kmax(params: CknParams) -> int:
    rep = classify_degeneracy(params)
    k = rep.k if rep.degenerate else rep.nearest_k
    return max(3, min(int(k), 6))


def cmd_spectrum(cfg: RunConfig) -> int:
    kmax = cfg.k_max if cfg.k_max is not None else _default_kmax(cfg.params)
    table = sp.full_spectrum(cfg.params, kmax, cfg.n_eigs, cfg.spectrum_n, cfg.tol)
    rows = [[r.k, r.index, r.mu, r.lambda_k, r.multiplicity, r.tag] for r in table.rows]
    header = ["k", "index", "mu", "lambda_k", "multiplicity", "tag"]
    body = {
        "n": table.n, "tol": table.tol, "k_max": kmax,
        "rows": [dict(zip(header, r)) for r in rows],
        "threshold": derive(cfg.params).p_star - 1.0,
        "threshold_dimension": table.threshold_dimension(),
    }
    _emit(cfg, _envelope(cfg, "spectrum", body), (header, rows))
    _say(f"spectrum: {len(rows)} eigenvalues for k<={kmax}, threshold dimension {table.threshold_dimension()}")
    return EXIT_OK


def _projection_body(proj: st.ManifoldProjection) -> Dict[str, Any]:
    return {
        "c": proj.c, "lambda": proj.lam, "d": proj.d, "converged": proj.converged,
        "restarts_used": proj.restarts_used, "unique": proj.unique,
        "local_minima": [{"c": c, "lambda": l, "d": d} for c, l, d in proj.local_minima],
    }


def cmd_deficit(cfg: RunConfig, path: str) -> int:
    u = load_profile_csv(path)
    proj = st.project_to_manifold(u, cfg.params)
    rep = st.deficit(u, cfg.params, projection=proj)
    body = {
        "input": path, "norm_p": rep.norm_p, "norm_star_p": rep.norm_star_p,
        "deficit": rep.deficit, "relative_deficit": rep.relative_deficit,
        "exponent": rep.exponent, "dist": rep.dist, "quotient": rep.quotient,
        "projection": _projection_body(proj),
    }
    _emit(cfg, _envelope(cfg, "deficit", body))
    _say(f"deficit: {rep.deficit:.6e} (relative {rep.relative_deficit:.3e}), dist {rep.dist:.6e}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig, family: str, eps_spec: str) -> int:
    try:
        eps = st.eps_grid(eps_spec)
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    rep = st.quotient_scan(cfg.params, family, eps, cfg.quad_grid())
    header = ["eps", "deficit", "dist", "quotient"]
    rows = [[r.eps, r.deficit, r.dist, r.quotient] for r in rep.rows]
    body = {
        "family": rep.family, "rows": [dict(zip(header, r)) for r in rows],
        "empirical_B": rep.empirical_B, "slope": rep.slope, "exponent": rep.exponent,
        "complete": rep.complete,
    }
    if rep.error:
        body["error"] = rep.error
    _emit(cfg, _envelope(cfg, "scan", body), (header, rows))
    _say(f"scan[{rep.family}]: empirical_B={rep.empirical_B:.6g}, slope={rep.slope:.4f}, {len(rows)} rows")
    return EXIT_OK if rep.complete else EXIT_VERIFY


# ---------------------------------------------------------------------------
# verification suite


class _Suite:
    def __init__(self):
        self.checks: List[Dict[str, Any]] = []

    def add(self, name: str, value: float, tol: float, passed: bool) -> None:
        self.checks.append({"name": name, "value": float(value), "tol": float(tol), "passed": bool(passed)})

    def below(self, name: str, value: float, tol: float) -> None:
        self.add(name, value, tol, bool(value < tol))

    def above(self, name: str, value: float, bound: float) -> None:
        self.add(name, value, bound, bool(value > bound))

    @property
    def failed(self) -> List[str]:
        return [c["name"] for c in self.checks if not c["passed"]]


def run_verify(params: CknParams, grid: RadialGrid, n_modes: int, seed: int,
               n_samples: int = 100_000) -> _Suite:
    """Closed forms, quadrature, eigenpairs, degeneracy and inequality sampling."""
    suite = _Suite()
    d = derive(params)
    p = params.p
    U = cf.extremal(params).as_radial_function()
    W0 = cf.w0_function(params)
    S = cf.sharp_constant(params)

    suite.below("sharp_constant.two_routes", abs(cf.sharp_constant_via_t(params) / S - 1.0), 1e-12)
    suite.below("radial_constant.two_forms",
                abs(cf.log_radial_constant(d.K, p) - cf.log_radial_constant_split(d.K, p)), 1e-12)
    suite.below("rayleigh_quotient.extremal", abs(rayleigh_quotient(U, params, grid) / S - 1.0), 1e-6)
    r = np.logspace(-4, 4, 100)
    suite.below("pde_residual.extremal", float(np.max(pde_residual(U, params, r))), 1e-6)

    s_grid = make_grid(grid.r_min ** (1.0 / d.t), grid.r_max ** (1.0 / d.t), grid.n)
    for name, f in (("extremal", U), ("w0", W0)):
        g, h = transformed_integrals(transform_to_s(f, params), params, s_grid)
        ng = d1p_norm_p(f, params, grid).value
        ns = lp_star_norm_p(f, params, grid).value
        suite.below(f"transform_identity.gradient.{name}", abs(g.value / ng - 1.0), 1e-8)
        suite.below(f"transform_identity.star.{name}", abs(h.value / ns - 1.0), 1e-8)

    prob = sp.assemble_mode(params, 0, n_modes)
    pairs = sp.eigen_solve(prob, 2)
    suite.below("eigen.k0.first", abs(pairs[0].mu / (p - 1.0) - 1.0), 1e-3)
    suite.below("eigen.k0.second", abs(pairs[1].mu / (d.p_star - 1.0) - 1.0), 1e-3)
    suite.above("eigen.k0.cosine_profile",
                abs(sp.b_cosine(prob, pairs[0].eta, sp.profile_in_s(params, prob.s))), 0.999)
    suite.above("eigen.k0.cosine_w0", abs(sp.b_cosine(prob, pairs[1].eta, sp.eta0_in_s(params, prob.s))), 0.999)

    rep = classify_degeneracy(params)
    kmax = rep.k if rep.degenerate else min(max(rep.nearest_k, 1), 4)
    table = sp.full_spectrum(params, kmax, 2, n_modes)
    dim = table.threshold_dimension()
    suite.add("degeneracy.threshold_dimension", dim, rep.eigenspace_dim, dim == rep.eigenspace_dim)

    rng = np.random.default_rng(seed)
    x, y = st.sample_vectors(rng, n_samples, params.N)
    chk = st.check_gradient_inequality(x, y, p, 0.1, 0.0)
    suite.add("gradient_inequality.kappa0.1.C1_0", float(np.min(chk.margin)), 0.0, bool(np.all(chk.holds)))
    c1 = float(np.min(st.gradient_constant_samples(x, y, p, 0.1)))
    suite.above("gradient_inequality.empirical_C1", c1, 0.0)
    a = np.linspace(-10.0, 10.0, 201)
    A, B = np.meshgrid(a, a)
    c2 = st.minimal_scalar_constant(A.ravel(), B.ravel(), params, 0.1)
    chk = st.check_scalar_inequality(A.ravel(), B.ravel(), params, 0.1, c2)
    suite.add("scalar_inequality.empirical_C2", c2, 0.0, bool(np.all(chk.holds)) and math.isfinite(c2))
    if p < 2.0:
        br = st.p_less_two_bracket(x, y, p)
        scale = np.sum(x**2, axis=-1) ** ((p - 2.0) / 2.0) * np.sum(y**2, axis=-1)
        suite.add("bracket.nonnegative", float(np.min(br / np.where(scale > 0, scale, 1.0))), 0.0,
                  bool(np.all(br >= -1e-12 * scale)))
        suite.above("fz_lower_bound.empirical_c", float(np.min(st.check_fz_lower_bound(x, y, p))), 0.0)

    on_m = cf.extremal(params, 3.0, 2.0).as_radial_function()
    proj = st.project_to_manifold(on_m, params, grid)
    suite.below("projection.on_manifold", max(abs(proj.c - 3.0), abs(proj.lam - 2.0),
                                              proj.d / cf.extremal(params, 3.0, 2.0).C), 1e-6)
    suite.below("deficit.extremal", abs(st.deficit(U, params, grid, with_distance=False).relative_deficit), 1e-6)
    bumped = st.combine([(1.0, U), (0.1, st.bump_function())])
    suite.above("deficit.perturbed", st.deficit(bumped, params, grid, with_distance=False).deficit, 0.0)
    return suite


def cmd_verify(cfg: RunConfig) -> int:
    suite = run_verify(cfg.params, cfg.quad_grid(), max(cfg.spectrum_n, sp.MIN_NODES), cfg.seed)
    failed = suite.failed
    body = {"checks": suite.checks, "failed": failed, "passed": not failed}
    header = ["name", "value", "tol", "passed"]
    rows = [[c["name"], c["value"], c["tol"], c["passed"]] for c in suite.checks]
    _emit(cfg, _envelope(cfg, "verify", body), (header, rows))
    if failed:
        _say(f"verify: {len(failed)} of {len(suite.checks)} checks FAILED: " + ", ".join(failed))
        return EXIT_VERIFY
    _say(f"verify: all {len(suite.checks)} checks passed")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_PARAMS
    try:
        cfg = _config(ns)
        if ns.command == "classify":
            return cmd_classify(cfg)
        if ns.command == "constants":
            return cmd_constants(cfg, ns.verify)
        if ns.command == "spectrum":
            return cmd_spectrum(cfg)
        if ns.command == "deficit":
            return cmd_deficit(cfg, ns.input)
        if ns.command == "scan":
            return cmd_scan(cfg, ns.family, ns.eps)
        return cmd_verify(cfg)
    except ParameterError as exc:
        _say(f"cknlab: invalid parameters: {exc}")
        return EXIT_PARAMS
    except (ProfileFormatError, OSError) as exc:
        _say(f"cknlab: input/output error: {exc}")
        return EXIT_IO
    except NonConvergence as exc:
        _say(f"cknlab: {exc}")
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
