"""The free operator (q = 0): closed-form and root-found spectra, closed-form canonical products."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nentire import _scan
from nentire.specialfn import bessel_j_zeros, gamma, reduced_bessel, xi_free

T_NEG_CAP = 600.0


def beta_l(l: float) -> float:
    """The boundary angle with cot(beta) = l + 1."""
    if l < -0.5:
        raise ValueError("l must be >= -1/2")
    return math.atan2(1.0, l + 1.0)


def resolve_beta(beta, l: float) -> float:
    if isinstance(beta, str):
        if beta.strip().lower() in ("beta_l", "betal"):
            return beta_l(l)
        beta = float(beta)
    beta = float(beta)
    if not 0.0 <= beta < math.pi:
        raise ValueError(f"beta must lie in [0, pi), got {beta!r}")
    return beta


def is_beta_l(beta: float, l: float) -> bool:
    return math.isclose(beta, beta_l(l), rel_tol=1e-14, abs_tol=0.0)


@dataclass
class SpectralSequence:
    l: float
    beta: float
    eigenvalues: np.ndarray
    method: str
    residuals: np.ndarray | None = None
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(self.eigenvalues) <= 0):
            raise ValueError("eigenvalues must be strictly increasing")

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def has_zero(self) -> bool:
        return bool(np.any(self.eigenvalues == 0.0))


def boundary_residual(value, deriv, beta):
    """|phi(1) cos b - phi'(1) sin b| relative to |(phi(1), phi'(1))|."""
    return np.abs(value * math.cos(beta) - deriv * math.sin(beta)) / np.hypot(value, deriv)


def _scaled_boundary(value, deriv, beta, s, l):
    d = value * math.cos(beta) - deriv * math.sin(beta)
    # positive rescaling only: sign pattern is what the census uses
    scale = (1.0 + np.abs(s)) ** (l + 0.5) * np.exp(-np.abs(np.minimum(s, 0.0)))
    return d * scale


def free_boundary(l: float, beta: float, s):
    s = np.asarray(s, dtype=float)
    z = s * np.abs(s)
    sol = xi_free(l, z, 1.0)
    return _scaled_boundary(sol.value, sol.derivative, beta, s, l)


def negative_window(beta: float, extra: float = 0.0) -> float:
    if math.sin(beta) == 0.0:
        return 10.0 + extra
    return min(T_NEG_CAP, 10.0 + 2.0 * abs(1.0 / math.tan(beta)) + extra)


def free_spectrum(l: float, beta, count: int, method: str = "auto") -> SpectralSequence:
    """First ``count`` eigenvalues of the free operator with boundary angle ``beta``.

    ``method`` is "auto" (closed form when available), "closed_form" or "root_found".
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    beta = resolve_beta(beta, l)
    nu = l + 0.5
    diagnostics = []
    closed = beta == 0.0 or is_beta_l(beta, l)
    if method == "closed_form" and not closed:
        raise ValueError("closed form is only available for beta = 0 and beta = beta_l")
    if method in ("auto", "closed_form") and closed:
        if beta == 0.0:
            ev = bessel_j_zeros(nu, count) ** 2
        else:
            rest = bessel_j_zeros(nu + 1.0, count - 1) ** 2 if count > 1 else np.array([])
            ev = np.concatenate([[0.0], rest])
        method_used = "closed_form"
    else:
        s = _scan.census(lambda s: free_boundary(l, beta, s), count, l, negative_window(beta), diagnostics=diagnostics)
        ev = s * np.abs(s)
        method_used = "root_found"
    sol = xi_free(l, ev, 1.0)
    res = boundary_residual(sol.value, sol.derivative, beta)
    return SpectralSequence(l, beta, ev, method_used, res, diagnostics)


def h_free(l: float, which: str, z):
    """Closed forms of h_0, h_{beta_l} and h_0' (entire; z = 0 included)."""
    nu = l + 0.5
    z = np.asarray(z)
    if which == "h0":
        out = gamma(nu + 1.0) * reduced_bessel(nu, z)
    elif which in ("h_beta_l", "hbeta_l"):
        out = z * gamma(nu + 2.0) * reduced_bessel(nu + 1.0, z)
    elif which in ("h0_prime", "h0'"):
        out = -0.25 * gamma(nu + 1.0) * reduced_bessel(nu + 1.0, z)
    else:
        raise ValueError(f"unknown product {which!r}")
    return out
