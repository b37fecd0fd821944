import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from nentire.specialfn import (
    bessel_j,
    bessel_j_zero,
    bessel_j_zeros,
    gamma,
    loggamma,
    reduced_bessel,
    xi_free,
    xi_free_leading,
)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (1.5, math.sqrt(math.pi) / 2), (2.5, 3 * math.sqrt(math.pi) / 4)])
def test_gamma_examples(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_gamma_domain(bad):
    with pytest.raises(ValueError):
        gamma(bad)


@given(st.floats(0.5, 50.0))
def test_gamma_matches_scipy(x):
    assert gamma(x) == pytest.approx(special.gamma(x), rel=1e-13)


@given(st.floats(0.01, 60.0))
def test_gamma_recurrence(x):
    assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-13)


def test_loggamma_complex_matches_scipy():
    rng = np.random.default_rng(3)
    z = rng.uniform(-30, 300, 400) + 1j * rng.uniform(-300, 300, 400)
    z = z[np.abs(z - np.round(z.real)) > 1e-3]
    ours = loggamma(z)
    ref = special.loggamma(z)
    # branches may differ by 2 pi i; compare exponentials via the difference mod 2 pi i
    d = ours - ref
    assert np.max(np.abs(d.real)) < 1e-10 * np.max(np.abs(ref))
    assert np.max(np.abs(np.angle(np.exp(1j * d.imag)))) < 1e-9


def test_bessel_examples():
    assert abs(bessel_j(0.5, math.pi)) < 1e-15
    assert bessel_j(1.5, math.pi) == pytest.approx(math.sqrt(2) / math.pi, rel=1e-13)
    u = 1.0
    closed = math.sqrt(2 / (math.pi * u)) * ((3 / u**2 - 1) * math.sin(u) - 3 * math.cos(u) / u)
    assert bessel_j(2.5, 1.0) == pytest.approx(closed, rel=1e-13)


def _half_integer(nu, u):
    s, c = np.sin(u), np.cos(u)
    pref = np.sqrt(2 / (np.pi * u))
    if nu == 0.5:
        return pref * s
    if nu == 1.5:
        return pref * (s / u - c)
    return pref * ((3 / u**2 - 1) * s - 3 * c / u)


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.5])
def test_half_integer_closed_forms(nu):
    u = np.linspace(0.1, 80.0, 4001)
    ref = _half_integer(nu, u)
    err = np.abs(bessel_j(nu, u) - ref) / np.maximum(np.abs(ref), 1e-3 * np.sqrt(2 / (np.pi * u)))
    assert err.max() < 1e-10


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 2.25, 3.5, 6.0, 10.0])
def test_bessel_matches_scipy_real(nu):
    u = np.linspace(0.01, 100.0, 5000)
    ref = special.jv(nu, u)
    # relative error with a floor of 1e-3 of the envelope near zeros
    floor = 1e-3 * np.minimum(np.abs(special.jv(nu, u)) + np.sqrt(2 / (np.pi * u)), 1.0)
    err = np.abs(bessel_j(nu, u) - ref) / np.maximum(np.abs(ref), floor)
    assert err.max() < 1e-10


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.5, 3.5, 10.25])
def test_bessel_matches_scipy_complex(nu):
    rng = np.random.default_rng(int(nu * 8))
    r = np.exp(rng.uniform(math.log(0.05), math.log(200.0), 400))
    u = r * np.exp(1j * rng.uniform(-1.5, 1.5, 400))
    ref = special.jv(nu, u)
    assert np.max(np.abs(bessel_j(nu, u) / ref - 1)) < 1e-10


@settings(max_examples=100)
@given(st.floats(1.0, 10.0), st.floats(0.1, 100.0))
def test_recurrence_closure(nu, u):
    lhs = bessel_j(nu - 1.0, u) + bessel_j(nu + 1.0, u)
    rhs = 2 * nu / u * bessel_j(nu, u)
    scale = abs(bessel_j(nu - 1.0, u)) + abs(bessel_j(nu + 1.0, u))
    assert abs(lhs - rhs) <= 1e-9 * scale


@given(st.floats(0.5, 8.0), st.complex_numbers(max_magnitude=2000.0, allow_nan=False, allow_infinity=False))
def test_reduced_recurrence_complex(nu, s):
    # G_{nu-1}(s) + (s/4) G_{nu+1}(s) = nu G_nu(s), valid for all s
    a = reduced_bessel(nu - 0.5 if nu >= 1.5 else nu + 1.0, s)
    base = nu - 0.5 if nu >= 1.5 else nu + 1.0
    g_m = reduced_bessel(base - 1.0, s)
    g_p = reduced_bessel(base + 1.0, s)
    scale = abs(g_m) + abs(s / 4 * g_p) + abs(base * a)
    assert abs(g_m + s / 4 * g_p - base * a) <= 1e-9 * scale


def test_reduced_bessel_at_zero_and_realness():
    for nu in (0.0, 0.5, 2.0):
        assert reduced_bessel(nu, 0.0) == pytest.approx(1 / gamma(nu + 1))
    out = reduced_bessel(1.5, np.array([-50.0, 0.0, 30.0, 1e4]))
    assert out.dtype == np.float64


def test_zero_examples():
    assert bessel_j_zero(0.5, 3) == pytest.approx(3 * math.pi, abs=1e-12)
    ref = optimize.brentq(lambda u: math.tan(u) - u, 4.0, 4.6, xtol=1e-15)
    assert bessel_j_zero(1.5, 1) == pytest.approx(ref, abs=1e-10)
    assert ref == pytest.approx(4.4934094579, abs=1e-10)
    assert abs(bessel_j_zero(0.5, 100) - math.pi / 2 * 200) <= 1e-10


@pytest.mark.parametrize("nu", [0, 1, 2, 5, 10])
def test_zeros_integer_order_vs_scipy(nu):
    ours = bessel_j_zeros(float(nu), 2000)
    ref = special.jn_zeros(nu, 2000)
    assert np.max(np.abs(ours - ref)) < 1e-10 * max(1.0, ref.max())


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.5, 3.5, 4.25, 7.75])
def test_zeros_fractional_order(nu):
    z = bessel_j_zeros(nu, 60)
    assert np.all(np.diff(z) > 0)
    # independent bracket-and-brentq on scipy's jv
    grid = np.arange(0.5, z[-1] + 1.0, 0.05)
    vals = special.jv(nu, grid)
    flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    ref = np.array([optimize.brentq(lambda u: special.jv(nu, u), grid[i], grid[i + 1], xtol=1e-14) for i in flips])
    assert ref.size >= 60
    assert np.max(np.abs(z - ref[:60])) < 1e-10


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.5, 3.0, 6.5])
def test_zero_interlacing(nu):
    a = bessel_j_zeros(nu, 300)
    b = bessel_j_zeros(nu + 1.0, 300)
    assert np.all(a < b)
    assert np.all(b[:-1] < a[1:])


def test_mcmahon_residual_pattern():
    n = np.arange(1, 501)
    for nu in (1.5, 2.5):
        d = np.abs(bessel_j_zeros(nu, 500) - np.pi / 2 * (2 * n + nu - 0.5))
        # O(1/n): n * diff stays bounded and roughly constant
        assert np.all(n[100:] * d[100:] < (4 * nu * nu) / (8 * np.pi) * 1.1 + 1e-6)


def test_xi_free_examples():
    assert xi_free(0, math.pi**2, 0.5).value == pytest.approx(1 / math.pi, rel=1e-14)
    for l in (-0.5, 0.0, 0.5, 1.0, 3.0):
        assert xi_free(l, 0.0, 1.0).value == pytest.approx(xi_free_leading(l), rel=1e-14)
    assert xi_free(0, 0.0, 1.0).value == pytest.approx(1.0)
    l, z, x = 1.0, 4.0, 1.0
    other = z ** (-(2 * l + 1) / 4) * math.sqrt(math.pi * x / 2) * bessel_j(l + 0.5, math.sqrt(z) * x)
    assert xi_free(l, z, x).value == pytest.approx(other, rel=1e-13)


def test_xi_free_domain():
    with pytest.raises(ValueError):
        xi_free(0, 1.0, 0.0)
    with pytest.raises(ValueError):
        xi_free(-0.6, 1.0, 0.5)


def test_xi_free_real_for_real_z_and_vanishes_at_zero():
    v = xi_free(1.5, np.array([-40.0, 3.0, 900.0]), 0.3)
    assert v.value.dtype == np.float64 and v.derivative.dtype == np.float64
    small = xi_free(0.5, 10.0, np.array([1e-2, 1e-4, 1e-6])).value
    assert np.all(np.diff(np.abs(small)) < 0) and abs(small[-1]) < 1e-8


@pytest.mark.parametrize("l", [-0.5, 0.0, 1.0, 2.5])
def test_xi_free_derivative_matches_finite_difference(l):
    z = np.array([-30.0, 2.0, 150.0, 40 + 25j])
    x = 0.6
    h = 1e-5
    fd = (xi_free(l, z, x + h).value - xi_free(l, z, x - h).value) / (2 * h)
    d = xi_free(l, z, x).derivative
    assert np.max(np.abs(fd - d) / np.abs(d)) < 1e-7


@pytest.mark.parametrize("l", [-0.5, 0.0, 1.5])
def test_xi_free_cauchy_riemann(l):
    re, im = np.meshgrid(np.linspace(-50, 200, 11), np.linspace(-20, 20, 9))
    z = (re + 1j * im).ravel()
    h = 1e-4
    f = lambda w: xi_free(l, w, 0.8).value
    dx = (f(z + h) - f(z - h)) / (2 * h)
    dy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    resid = np.abs(dy - 1j * dx) / np.maximum(np.abs(dx), 1e-300)
    assert resid.max() < 1e-7


def test_xi_free_satisfies_ode():
    l, z = 1.0, 55.0
    x = np.linspace(0.2, 1.0, 9)
    h = 1e-4
    f = lambda t: xi_free(l, z, t).value
    second = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    resid = -second + (l * (l + 1) / x**2 - z) * f(x)
    assert np.max(np.abs(resid)) < 1e-4 * np.max(np.abs(z * f(x)))
