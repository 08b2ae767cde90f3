"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured figures;
the lines are repeated in the terminal summary (see ``conftest.py``).  Run
``python tests/test_acceptance.py`` to get the lines without pytest.
"""

import contextlib
import io
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import REFERENCE_TUPLES, corpus, random_params  # noqa: E402

from cknlab.cli import main  # noqa: E402
from cknlab.closed_forms import extremal, log_radial_constant, log_radial_constant_split, sharp_constant  # noqa: E402
from cknlab.params import (  # noqa: E402
    classical,
    classify_degeneracy,
    degeneracy_target,
    derive,
    felli_schneider,
    from_classical,
    validate,
)
from cknlab.radial_quadrature import (  # noqa: E402
    d1p_norm_p,
    lp_star_norm_p,
    make_grid,
    pde_residual,
    rayleigh_quotient,
    transform_to_s,
    transformed_integrals,
)
from cknlab.spectrum import (  # noqa: E402
    assemble_mode,
    b_cosine,
    eigen_solve,
    eta0_in_s,
    full_spectrum,
    profile_in_s,
)
from cknlab.stability import (  # noqa: E402
    check_fz_lower_bound,
    check_gradient_inequality,
    check_scalar_inequality,
    gradient_constant_samples,
    minimal_scalar_constant,
    p_less_two_bracket,
    quotient_scan,
    sample_vectors,
    scalar_branch_small,
)

RESULTS = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} ({title}): {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_01_sharp_constant():
    t0 = time.perf_counter()
    worst = 0.0
    for t in REFERENCE_TUPLES:
        P = validate(*t)
        q = rayleigh_quotient(extremal(P).as_radial_function(), P)
        worst = max(worst, abs(q / sharp_constant(P) - 1.0))
    elapsed = time.perf_counter() - t0
    report(1, "sharp constant", worst < 1e-6 and elapsed < 30.0,
           f"max rel err {worst:.2e} (< 1e-6) over {len(REFERENCE_TUPLES)} tuples, {elapsed:.2f} s (< 30 s)")


def test_criterion_02_dual_form():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        P = random_params(rng, margin=0.05)
        d = derive(P)
        a, b = log_radial_constant(d.K, P.p), log_radial_constant_split(d.K, P.p)
        worst = max(worst, abs(math.expm1(a - b)))
    report(2, "dual-form constant", worst < 1e-12, f"max rel diff {worst:.2e} (< 1e-12) on 100 random tuples")


def test_criterion_03_pde_residual():
    r = np.logspace(-4, 4, 100)
    worst = 0.0
    for t in REFERENCE_TUPLES:
        P = validate(*t)
        worst = max(worst, float(np.max(pde_residual(extremal(P).as_radial_function(), P, r))))
    report(3, "PDE residual", worst < 1e-6, f"sup rel residual {worst:.2e} (< 1e-6) over {len(REFERENCE_TUPLES)} tuples")


def test_criterion_04_eigenpairs():
    worst_mu, worst_cos, slowest = 0.0, 1.0, 0.0
    for t in REFERENCE_TUPLES:
        P = validate(*t)
        t0 = time.perf_counter()
        prob = assemble_mode(P, 0, 2000)
        ev = eigen_solve(prob, 2)
        slowest = max(slowest, time.perf_counter() - t0)
        worst_mu = max(worst_mu, abs(ev[0].mu / (P.p - 1) - 1), abs(ev[1].mu / (derive(P).p_star - 1) - 1))
        worst_cos = min(worst_cos, b_cosine(prob, ev[0].eta, profile_in_s(P, prob.s)),
                        b_cosine(prob, ev[1].eta, eta0_in_s(P, prob.s)))
    ok = worst_mu < 1e-3 and worst_cos > 0.999 and slowest < 60.0
    report(4, "eigenpair recovery", ok,
           f"max rel eig err {worst_mu:.2e} (< 1e-3), min cosine {worst_cos:.8f} (> 0.999), "
           f"slowest tuple {slowest:.2f} s (< 60 s)")


def test_criterion_05_degeneracy():
    pairs = [(N, p) for N in (3, 4, 5) for p in (1.5, 2.0, 2.5, 3.0) if p < N]
    bad = []
    for N, p in pairs:
        P = validate(N, p, 0.0, 0.0)
        rep = classify_degeneracy(P)
        table = full_spectrum(P, k_max=2, per_mode=2)
        if not (rep.degenerate and rep.k == 1 and table.threshold_dimension() == 1 + rep.multiplicity):
            bad.append((N, p))
    P = validate(4, 2.0, 0.0, 2.0)
    rep = classify_degeneracy(P)
    mu2 = eigen_solve(assemble_mode(P, 2, 2000), 1)[0].mu
    dim = full_spectrum(P, k_max=3, per_mode=2).threshold_dimension()
    err = abs(mu2 / 5.0 - 1.0)
    ok = not bad and rep.k == 2 and err < 1e-3 and dim == 1 + rep.multiplicity
    report(5, "degeneracy detection", ok,
           f"unweighted k=1 with dim 1+N on {len(pairs) - len(bad)}/{len(pairs)} (N,p); "
           f"(4,2,0,2): k={rep.k}, k=2 eigenvalue rel err {err:.2e} (< 1e-3), threshold dim {dim} (= 10)")


def test_criterion_06_transform_identity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        P = random_params(rng)
        for f in corpus(P):
            v = transform_to_s(f, P)
            g, s = transformed_integrals(v, P, make_grid(breakpoints=v.breakpoints))
            r_grid = make_grid(breakpoints=f.breakpoints)
            worst = max(worst, abs(g.value / d1p_norm_p(f, P, r_grid).value - 1),
                        abs(s.value / lp_star_norm_p(f, P, r_grid).value - 1))
    report(6, "transform identity", worst < 1e-8, f"max rel diff {worst:.2e} (< 1e-8) on 20 tuples x 5 functions")


def test_criterion_07_inequality_sampling():
    rng = np.random.default_rng(42)
    parts, ok = [], True
    for p in (1.5, 3.0):
        x, y = sample_vectors(rng, 100_000, 3)
        holds = bool(np.all(check_gradient_inequality(x, y, p, 0.1, 0.0).holds))
        C1 = float(np.min(gradient_constant_samples(x, y, p, 0.1)))
        ok &= holds and C1 > 0
        parts.append(f"gradient p={p}: C1~{C1:.3g}")
    for t in [(3, 2.0, 0.0, 0.0), (3, 1.5, 0.0, -1.4)]:
        P = validate(*t)
        a, b = rng.uniform(-10, 10, (2, 100_000))
        C2 = minimal_scalar_constant(a, b, P, 0.1)
        holds = bool(np.all(check_scalar_inequality(a, b, P, 0.1, C2).holds))
        ok &= holds and math.isfinite(C2)
        branch = "p*<=2" if scalar_branch_small(P) else "p*>2"
        parts.append(f"scalar {branch}: C2~{C2:.3g}")
    x, y = sample_vectors(rng, 100_000, 3)
    br = p_less_two_bracket(x, y, 1.5)
    scale = np.linalg.norm(x, axis=1) ** -0.5 * np.linalg.norm(y, axis=1) ** 2
    br_min = float(np.min(br / np.where(scale > 0, scale, 1.0)))
    cp = float(np.min(check_fz_lower_bound(x, y, 1.5)))
    ok &= br_min >= -1e-12 and cp > 0
    parts.append(f"bracket min (scaled) {br_min:.2e} (>= 0), c(1.5)~{cp:.4f} (> 0)")
    report(7, "inequality sampling", ok, "; ".join(parts) + " on 1e5 samples each")


def test_criterion_08_stability_positivity():
    eps = np.logspace(-3, math.log10(0.5), 20)
    parts, ok = [], True
    for t in [(4, 1.5, -0.3, 0.2), (3, 2.0, 0.0, 0.0), (5, 3.0, 0.5, 1.0)]:
        P = validate(*t)
        for fam in ("bump", "eigen3"):
            rep = quotient_scan(P, fam, eps)
            good = rep.complete and rep.empirical_B > 0
            if P.p >= 2 and fam == "eigen3":
                good &= abs(rep.slope - 2.0) <= 0.1
                parts.append(f"p={P.p:g} {fam}: B={rep.empirical_B:.3g}, slope={rep.slope:.4f}")
            else:
                parts.append(f"p={P.p:g} {fam}: B={rep.empirical_B:.3g}")
            ok &= good
    report(8, "stability positivity", ok, "; ".join(parts))


def test_criterion_09_felli_schneider():
    worst = 0.0
    for N in (3, 4):
        for a in (-0.5, -1.0, -2.0):
            for k in (1, 2):
                b = felli_schneider(N, a, k)
                P = from_classical(classical(N, 2.0, a, b), N, 2.0)
                worst = max(worst, abs(degeneracy_target(P) - k * (N - 2 + k)))
    report(9, "Felli-Schneider consistency", worst < 1e-10, f"max defect {worst:.2e} (< 1e-10) on 12 cases")


def test_criterion_10_determinism():
    argv = ["verify", "--N", "3", "--p", "2.5", "--alpha", "0.2", "--beta", "0.4", "--seed", "42"]
    outs, codes = [], []
    for _ in range(2):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
            codes.append(main(argv))
        outs.append(buf.getvalue().encode())
    ok = codes == [0, 0] and outs[0] == outs[1]
    report(10, "determinism", ok, f"exit codes {codes}, identical bytes: {outs[0] == outs[1]} ({len(outs[0])} bytes)")


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
