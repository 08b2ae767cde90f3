import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cknlab.closed_forms import (
    aubin_talenti,
    aubin_talenti_constant,
    dilation_constant,
    dilation_generator,
    extremal,
    hardy_constant,
    harmonic_basis,
    log_radial_constant,
    log_radial_constant_split,
    normalizing_constant,
    sharp_constant,
    sharp_constant_via_t,
    sphere_area,
    w0_value,
    w0_zero,
    wk_derivative,
    wk_value,
    w0_derivative,
)
from cknlab.params import angular_eigenvalue, derive, validate
from cknlab.radial_quadrature import pde_residual

from conftest import valid_params


def _fd(f, r, h=1e-3):
    """Five-point centred difference with relative step h."""
    d = h * r
    return (-f(r + 2 * d) + 8 * f(r + d) - 8 * f(r - d) + f(r - 2 * d)) / (12 * d)


def test_sphere_area_low_dimensions():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-14)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-14)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-14)


def test_extremal_at_origin_and_infinity(ref_params):
    U = extremal(ref_params)
    C = normalizing_constant(ref_params)
    assert U.value(1e-12) == pytest.approx(C, rel=1e-9)
    P = ref_params
    decay = (P.N - P.p + P.alpha) / (P.p - 1.0)
    r = 1e8
    assert U.value(r) * r**decay == pytest.approx(C, rel=1e-4)


def test_extremal_derivative_matches_fd(ref_params):
    U = extremal(ref_params, 1.7, 0.6)
    for r in (0.1, 1.0, 10.0):
        assert U.derivative(r) == pytest.approx(_fd(U.value, r), rel=1e-8)
        assert U.second_derivative(r) == pytest.approx(_fd(U.derivative, r), rel=1e-7)


@given(valid_params(), st.floats(0.05, 20.0), st.floats(1e-3, 1e3))
@settings(max_examples=200, deadline=None)
def test_dilation_covariance(P, lam, r):
    e = (P.N - P.p + P.alpha) / P.p
    lhs = extremal(P, 1.0, lam).value(r)
    rhs = lam**e * extremal(P).value(lam * r)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def _mp_flux_residual(P, r):
    """Residual of the weighted equation at r with 50-digit arithmetic."""
    mp.mp.dps = 50
    N, p, a, b = (mp.mpf(x) for x in (P.N, P.p, P.alpha, P.beta))
    q = (p + b - a) / (p - 1)
    m = (N - p + a) / (p + b - a)
    C = ((N + b) * ((N - p + a) / (p - 1)) ** (p - 1)) ** ((N - p + a) / (p * (p + b - a)))
    ps = p * (N + b) / (N - p + a)
    U = lambda s: C * (1 + s**q) ** (-m)
    flux = lambda s: s ** (N - 1 + a) * abs(mp.diff(U, s)) ** (p - 2) * mp.diff(U, s)
    r = mp.mpf(r)
    lhs = -r ** (1 - N) * mp.diff(flux, r)
    rhs = r**b * U(r) ** (ps - 1)
    return lhs, rhs


@pytest.mark.parametrize("t", [(3, 2.0, 0.0, 0.0), (5, 3.0, 0.5, 1.0), (4, 1.5, -0.3, 0.2)])
def test_p_laplacian_against_high_precision(t):
    P = validate(*t)
    U = extremal(P)
    for r in (1e-3, 0.3, 1.0, 7.0, 1e3):
        lhs, rhs = _mp_flux_residual(P, r)
        assert float(lhs / rhs) == pytest.approx(1.0, abs=1e-12)
        assert U.p_laplacian(r) == pytest.approx(float(lhs), rel=1e-12)


def test_sharp_constant_forms_agree(ref_params):
    d = derive(ref_params)
    assert log_radial_constant(d.K, ref_params.p) == pytest.approx(
        log_radial_constant_split(d.K, ref_params.p), abs=1e-12)
    assert sharp_constant_via_t(ref_params) == pytest.approx(sharp_constant(ref_params), rel=1e-12)


def test_sharp_constant_sobolev_value():
    # (N, p) = (3, 2): S = 3 (pi/2)^(4/3)
    assert sharp_constant(validate(3, 2, 0, 0)) == pytest.approx(3 * (math.pi / 2) ** (4 / 3), rel=1e-13)


def test_sharp_constant_large_K_is_finite():
    P = validate(60, 30.0, 5.0, 4.0)
    S = sharp_constant(P)
    assert math.isfinite(S) and S > 0


def test_hardy_constants():
    assert hardy_constant(3, 2, 0) == 0.25
    assert hardy_constant(4, 2, 0) == 1.0
    assert hardy_constant(3, 2, -1 + 1e-9) == pytest.approx(0.0, abs=1e-16)


def test_aubin_talenti_family():
    assert aubin_talenti_constant(4, 2) == pytest.approx(math.sqrt(8), rel=1e-15)
    for N, p in [(3, 2.0), (4, 1.5), (5, 3.0)]:
        P = validate(N, p, 0, 0)
        assert aubin_talenti_constant(N, p) == pytest.approx(normalizing_constant(P), rel=1e-14)
        r = np.logspace(-3, 3, 13)
        assert np.allclose(aubin_talenti(N, p, 2.5, r), extremal(P, 1, 2.5).value(r), rtol=1e-13)
        e = (N - p) / p
        assert np.allclose(aubin_talenti(N, p, 2.5, r), 2.5**e * aubin_talenti(N, p, 1, 2.5 * r), rtol=1e-13)


def test_w0_values(ref_params):
    P = ref_params
    assert w0_value(P, 1e-14) == pytest.approx(P.p - 1.0, rel=1e-10)
    z = w0_zero(P)
    assert abs(w0_value(P, z)) < 1e-14
    assert w0_value(P, 0.9 * z) > 0 > w0_value(P, 1.1 * z)
    assert abs(w0_value(P, 1e20)) < 1e-3
    for r in (0.1, 1.0, 10.0):
        assert w0_derivative(P, r) == pytest.approx(_fd(lambda s: w0_value(P, s), r), rel=1e-8)


def test_wk_values(ref_params):
    P = ref_params
    assert wk_value(P, 1e-30) < 1e-5
    assert wk_value(P, 1e30) < 1e-5
    for r in (0.1, 1.0, 10.0):
        assert wk_derivative(P, r) == pytest.approx(_fd(lambda s: wk_value(P, s), r), rel=1e-8)


def test_dilation_generator_is_scaled_w0(ref_params):
    P = ref_params
    r = np.logspace(-3, 3, 41)
    h = 1e-6
    fd = (extremal(P, 1, 1 + h).value(r) - extremal(P, 1, 1 - h).value(r)) / (2 * h)
    gen = dilation_generator(P, r)
    mask = np.abs(gen) > 1e-6 * np.max(np.abs(gen))
    assert np.allclose(fd[mask], gen[mask], rtol=1e-8)
    C = normalizing_constant(P)
    assert dilation_generator(P, 1e-14, 2.0) == pytest.approx(2.0 * C * (P.N - P.p + P.alpha) / P.p, rel=1e-9)


def test_dilation_generator_exact_proportionality():
    P = validate(4, 2.0, 0.0, 0.0)
    r = np.logspace(-2, 2, 50)
    gen = dilation_generator(P, r)
    w = w0_value(P, r)
    corr = np.dot(gen, w) / (np.linalg.norm(gen) * np.linalg.norm(w))
    assert corr == pytest.approx(1.0, abs=1e-10)
    # analytic lambda-derivative, done by hand
    U = extremal(P)
    q, m, e = U.q, U.m, U.e
    x = r**q
    exact = U.C * (e - m * q * x / (1 + x)) * (1 + x) ** (-m)
    assert np.allclose(gen, exact, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("N, p", [(3, 2.0), (4, 1.5), (5, 2.5)])
def test_k1_factor_proportional_to_gradient_when_unweighted(N, p):
    P = validate(N, p, 0, 0)
    r = np.logspace(-3, 3, 31)
    ratio = np.abs(extremal(P).derivative(r)) / wk_value(P, r)
    assert np.allclose(ratio, ratio[0], rtol=1e-11)


def test_pde_residual_of_extremal(ref_params):
    r = np.logspace(-4, 4, 100)
    res = pde_residual(extremal(ref_params).as_radial_function(), ref_params, r)
    assert np.max(res) < 1e-6


def test_pde_residual_detects_wrong_amplitude(ref_params):
    P = ref_params
    ps = derive(P).p_star
    r = np.logspace(-2, 2, 9)
    res = pde_residual(extremal(P, 2.0).as_radial_function(), P, r)
    expect = abs(2 ** (P.p - 1) - 2 ** (ps - 1)) / 2 ** (ps - 1)
    assert np.allclose(res, expect, rtol=1e-10)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_harmonic_basis_is_harmonic_and_sized(N):
    from cknlab.params import multiplicity

    rng = np.random.default_rng(0)
    pts = rng.standard_normal((5, N))
    h = 1e-4
    for k in (0, 1, 2):
        basis = harmonic_basis(N, k)
        assert len(basis) == multiplicity(N, k)
        for f in basis:
            lap = sum(
                (f(pts + h * np.eye(N)[i]) - 2 * f(pts) + f(pts - h * np.eye(N)[i])) / h**2
                for i in range(N)
            )
            assert np.allclose(lap, 0.0, atol=1e-5)
            # homogeneity of degree k
            assert np.allclose(f(2.0 * pts), 2.0**k * f(pts))
    with pytest.raises(NotImplementedError):
        harmonic_basis(N, 3)


def test_harmonic_basis_spans_the_space():
    N = 4
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((40, N))
    for k in (1, 2):
        vals = np.array([f(pts) for f in harmonic_basis(N, k)])
        assert np.linalg.matrix_rank(vals) == len(vals)


def test_angular_eigen_relation_for_degree_two():
    # on the sphere, -Delta_S Y = k(N-2+k) Y; check with r^-k Y extended harmonically
    N, k = 4, 2
    f = harmonic_basis(N, k)[0]
    assert angular_eigenvalue(N, k) == 8.0
    x = np.array([0.3, -0.2, 0.5, 0.7])
    # the degree-0 extension g(x) = f(x/|x|) satisfies Delta g = -lambda_k g / |x|^2
    g = lambda y: f(y / np.linalg.norm(y, axis=-1, keepdims=True))
    h = 1e-4
    lap = sum((g(x + h * e) - 2 * g(x) + g(x - h * e)) / h**2 for e in np.eye(N))
    assert lap == pytest.approx(-8.0 * g(x) / np.dot(x, x), rel=1e-5)
