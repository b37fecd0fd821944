"""Gamma and Bessel-J machinery in double precision.

The central primitive is the reduced Bessel function

    G_nu(s) = sum_k (-s/4)^k / (k! Gamma(nu + k + 1)),

which is entire in ``s`` and satisfies ``J_nu(u) = (u/2)^nu G_nu(u^2)``.
Everything downstream (the free regular solution, the closed-form
canonical products) is written in terms of ``G_nu`` so that no branch
of ``sqrt(z)`` ever leaks into an entire quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np

from nentire._roots import refine_brackets

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

SERIES_SWITCH = 25.0  # Hankel expansion above max(SERIES_SWITCH, nu^2)
_CANCEL_LIMIT = 6.0  # max |u| - |Im u| for plain double series
_MILLER_IM_LIMIT = 8.0  # max |Im u| for backward recurrence
_SERIES_CAP = 200
_ASYMPTOTIC_TERMS = 40


def _lanczos_sum(x):
    # x is the shifted argument (z - 1)
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (x + i)
    return acc


def gamma(x: float) -> float:
    """Gamma function for real ``x > 0``, relative error about 1e-15."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"gamma: argument must be a finite positive real, got {x!r}")
    if x < 0.5:
        # upward shift, no reflection needed for positive input
        return gamma(x + 1.0) / x
    xm = x - 1.0
    t = xm + _LANCZOS_G + 0.5
    # split the power to postpone overflow up to x ~ 171
    half = t ** ((xm + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * _lanczos_sum(xm)


def loggamma(z):
    """Principal log-Gamma for real or complex arrays (Lanczos + reflection)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    refl = z.real < 0.5
    zr = z[~refl]
    xm = zr - 1.0
    t = xm + _LANCZOS_G + 0.5
    out[~refl] = 0.5 * math.log(2.0 * math.pi) + (xm + 0.5) * np.log(t) - t + np.log(_lanczos_sum(xm))
    if np.any(refl):
        zl = z[refl]
        # Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        out[refl] = math.log(math.pi) - _log_sin_pi(zl) - loggamma(1.0 - zl)
    return out


def _log_sin_pi(z):
    """log sin(pi z) without overflow for large |Im z|."""
    z = np.asarray(z, dtype=complex)
    up = z.imag >= 0
    w = np.where(up, z, np.conj(z))
    # sin(pi w) = e^{-i pi w} (e^{2 i pi w} - 1) / (2i); the bracket is O(1) for Im w >= 0
    out = -1j * np.pi * w + np.log((np.exp(2j * np.pi * w) - 1.0) / 2j)
    return np.where(up, out, np.conj(out))


def _neumaier_add(total, comp, term):
    t = total + term
    big = np.abs(total) >= np.abs(term)
    comp = comp + np.where(big, (total - t) + term, (term - t) + total)
    return t, comp


def _series_double(nu, s):
    s = np.asarray(s, dtype=complex)
    term = np.full(s.shape, 1.0 / gamma(nu + 1.0), dtype=complex)
    q = -s / 4.0
    tr, cr = term.real.copy(), np.zeros(s.shape)
    ti, ci = term.imag.copy(), np.zeros(s.shape)
    for k in range(1, _SERIES_CAP + 1):
        term = term * q / (k * (nu + k))
        tr, cr = _neumaier_add(tr, cr, term.real)
        ti, ci = _neumaier_add(ti, ci, term.imag)
        if np.all(np.abs(term) <= 1e-17 * np.hypot(tr, ti)):
            break
    return (tr + cr) + 1j * (ti + ci)


def _series_extended(nu: float, s: complex) -> complex:
    """Series with a 50-digit accumulator; used where the double series cancels."""
    with localcontext() as ctx:
        ctx.prec = 50
        qr = Decimal(-s.real) / 4
        qi = Decimal(-s.imag) / 4
        dnu = Decimal(nu)
        tr, ti = Decimal(1), Decimal(0)
        sr, si = Decimal(1), Decimal(0)
        tiny = Decimal(10) ** -45
        for k in range(1, 400):
            tr, ti = tr * qr - ti * qi, tr * qi + ti * qr
            den = k * (dnu + k)
            tr /= den
            ti /= den
            sr += tr
            si += ti
            if abs(tr) + abs(ti) < tiny * (abs(sr) + abs(si) + tiny) and k > 4:
                break
    return complex(float(sr), float(si)) / gamma(nu + 1.0)


def _miller(nu, u):
    """G_nu(u^2) by backward recurrence in the order, normalized with
    (u/2)^nu = sum_k (nu + 2k) Gamma(nu + k) / k! J_{nu+2k}(u).

    The normalization cancels like exp(|Im u|), so keep |Im u| moderate.
    """
    u = np.asarray(u, dtype=complex)
    top = int(np.max(np.abs(u))) + 40
    top += top % 2
    k = np.arange(top // 2 + 1)
    ks = np.maximum(k, 1)
    c = np.exp(np.log(nu + 2.0 * ks) + np.array([math.lgamma(nu + kk) for kk in ks]) - np.array([math.lgamma(kk + 1.0) for kk in ks]))
    c[0] = gamma(nu + 1.0)
    f_next = np.zeros_like(u)
    f = np.full(u.shape, 1e-30, dtype=complex)
    norm = c[top // 2] * f
    for m in range(top, 0, -1):
        f_prev = 2.0 * (nu + m) / u * f - f_next
        f_next, f = f, f_prev
        if (m - 1) % 2 == 0:
            norm = norm + c[(m - 1) // 2] * f
        big = np.abs(f) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            f, f_next, norm = f * scale, f_next * scale, norm * scale
    return f / norm


def _hankel_j(nu, u):
    """J_nu(u) from the Hankel expansion with optimal truncation, |u| large."""
    u = np.asarray(u, dtype=complex)
    mu = 4.0 * nu * nu
    p = np.zeros_like(u)
    qsum = np.zeros_like(u)
    term = np.ones_like(u)
    active = np.ones(u.shape, dtype=bool)
    prev = np.full(u.shape, np.inf)
    p += term
    for k in range(1, _ASYMPTOTIC_TERMS):
        factor = (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = term * factor / u
        mag = np.abs(term)
        if (2 * k - 1) ** 2 > mu:
            # past the initial growth phase: stop at the smallest term
            active &= mag < prev
        active &= mag > 0.0
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        contrib = np.where(active, sign * term, 0.0)
        if k % 2 == 0:
            p += contrib
        else:
            qsum += contrib
        prev = np.where(active, mag, prev)
        if not np.any(active & (mag > 1e-18)):
            break
    chi = u - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * u)) * (p * np.cos(chi) - qsum * np.sin(chi))


def reduced_bessel(nu: float, s):
    """G_nu(s) = J_nu(sqrt s) / (sqrt(s)/2)^nu, entire in ``s``.

    Real input gives real output. With u = sqrt(s), evaluation picks per
    element the Hankel expansion (|u| > max(25, nu^2)), the plain double
    series (|u| <= 25 and little cancellation), backward recurrence in the
    order (|Im u| <= 8) or, failing all of these, a 50-digit series.
    """
    if nu < 0:
        raise ValueError("negative orders are not supported")
    scalar = np.ndim(s) == 0
    real_in = np.isrealobj(s)
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    shape = s.shape
    s = s.ravel()
    u = np.sqrt(s)
    au = np.abs(u)
    out = np.empty_like(s)

    switch = max(SERIES_SWITCH, nu * nu)
    series = (au <= SERIES_SWITCH) & (au - np.abs(u.imag) <= _CANCEL_LIMIT)
    asym = au > switch
    miller = ~(series | asym) & (np.abs(u.imag) <= _MILLER_IM_LIMIT)
    extended = ~(series | asym | miller)
    if np.any(miller):
        out[miller] = _miller(nu, u[miller])
    if np.any(series):
        out[series] = _series_double(nu, s[series])
    if np.any(asym):
        ua = u[asym]
        out[asym] = _hankel_j(nu, ua) * np.exp(-nu * np.log(ua / 2.0))
    for idx in np.flatnonzero(extended):
        out[idx] = _series_extended(nu, complex(s[idx]))
    if real_in:
        out = out.real
    return out[0] if scalar else out.reshape(shape)


def bessel_j(nu: float, u):
    """J_nu(u) with the principal branch (cut along the negative real axis)."""
    scalar = np.ndim(u) == 0
    real_in = np.isrealobj(u)
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    g = np.atleast_1d(reduced_bessel(nu, u * u))
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.exp(nu * np.log(u / 2.0))
    pref = np.where(u == 0, 1.0 if nu == 0 else 0.0, pref)
    out = pref * g
    if real_in and np.all(u.real >= 0):
        out = out.real
    return out[0] if scalar else out


def _mcmahon(nu, n):
    mu = 4.0 * nu * nu
    b = (n + 0.5 * nu - 0.25) * math.pi
    return b - (mu - 1) / (8 * b) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * b) ** 3)


def bessel_j_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros j_{nu,1} < ... < j_{nu,count}."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if nu < 0:
        raise ValueError("negative orders are not supported")
    f = lambda x: bessel_j(nu, x)
    n_scan = min(count, int(math.ceil(2 * nu)) + 3)

    # small indices: march from the lower bound sqrt(nu(nu+2)) until n_scan sign changes
    lo_a, lo_b = [], []
    step = 0.25
    x0 = max(math.sqrt(nu * (nu + 2.0)), 1e-3)
    while len(lo_a) < n_scan:
        xs = x0 + step * np.arange(1, 401)
        grid = np.concatenate([[x0], xs])
        vals = f(grid)
        flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        for i in flips:
            if len(lo_a) < n_scan:
                lo_a.append(grid[i])
                lo_b.append(grid[i + 1])
        x0 = grid[-1]

    a = np.array(lo_a)
    b = np.array(lo_b)
    if count > n_scan:
        ns = np.arange(n_scan + 1, count + 1, dtype=float)
        guess = _mcmahon(nu, ns)
        a = np.concatenate([a, guess - math.pi / 2])
        b = np.concatenate([b, guess + math.pi / 2])
    fa, fb = f(a), f(b)
    bad = np.sign(fa) * np.sign(fb) > 0
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise RuntimeError(
            f"bessel_j_zeros: no sign change for nu={nu}, n={i + 1} on [{a[i]!r}, {b[i]!r}]"
        )
    zeros = refine_brackets(f, a, b, fa, fb)
    if np.any(np.diff(zeros) <= 0):
        raise RuntimeError(f"bessel_j_zeros: non-increasing zeros for nu={nu}")
    return zeros


def bessel_j_zero(nu: float, n: int) -> float:
    """The n-th positive zero of J_nu, absolute error about 1e-12."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n_scan = int(math.ceil(2 * nu)) + 3
    if n <= n_scan:
        return float(bessel_j_zeros(nu, n)[-1])
    guess = _mcmahon(nu, float(n))
    a = np.array([guess - math.pi / 2])
    b = np.array([guess + math.pi / 2])
    f = lambda x: bessel_j(nu, x)
    fa, fb = f(a), f(b)
    if fa[0] * fb[0] > 0:
        raise RuntimeError(f"bessel_j_zero: no sign change for nu={nu}, n={n} on [{a[0]!r}, {b[0]!r}]")
    return float(refine_brackets(f, a, b, fa, fb)[0])


@dataclass(frozen=True)
class EntireSolutionValue:
    value: complex | np.ndarray
    derivative: complex | np.ndarray
    at_z: complex | np.ndarray
    at_x: float | np.ndarray


def xi_free(l: float, z, x) -> EntireSolutionValue:
    """Free regular solution sqrt(pi) (x/2)^(l+1) g_l(z, x) and its x-derivative.

    Broadcasts over ``z`` and ``x``.
    """
    if l < -0.5:
        raise ValueError("l must be >= -1/2")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ValueError("xi_free: x must be positive")
    nu = l + 0.5
    z_arr = np.asarray(z)
    zb, xb = np.broadcast_arrays(z_arr, x_arr)
    s = zb * xb * xb
    g0 = reduced_bessel(nu, s)
    g1 = reduced_bessel(nu + 1.0, s)
    pref = math.sqrt(math.pi) * (xb / 2.0) ** (l + 1.0)
    value = pref * g0
    deriv = pref * ((l + 1.0) / xb * g0 - 0.5 * zb * xb * g1)
    if np.ndim(value) == 0:
        value, deriv = value[()], deriv[()]
    return EntireSolutionValue(value=value, derivative=deriv, at_z=z, at_x=x)


def xi_free_leading(l: float) -> float:
    """Coefficient c in xi_l(z, x) ~ c x^(l+1) as x -> 0."""
    return math.sqrt(math.pi) * 2.0 ** (-(l + 1.0)) / gamma(l + 1.5)


__all__ = [
    "gamma",
    "loggamma",
    "reduced_bessel",
    "bessel_j",
    "bessel_j_zero",
    "bessel_j_zeros",
    "xi_free",
    "xi_free_leading",
    "EntireSolutionValue",
]
