"""Regular solution of -phi'' + (l(l+1)/x^2 + q) phi = z phi, perturbed spectra,
the Hermite-Biehler function e(z) = xi(z,1) + i xi'(z,1), the transform
phi -> int xi(z,x) phi(x) dx, and the bounds comparing xi with the free xi_l.

xi is normalized so that xi(z,x) ~ xi_l(z,x) ~ c x^(l+1) as x -> 0 with the
same leading coefficient c as the free solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nentire import _magnus, _scan
from nentire.free_op import (
    SpectralSequence,
    _scaled_boundary,
    boundary_residual,
    negative_window,
    resolve_beta,
)
from nentire.potential import Potential, as_potential, check_admissibility, q_tilde
from nentire.specialfn import xi_free

_PICARD_T, _PICARD_W = np.polynomial.legendre.leggauss(32)
_PICARD_T = 0.5 * (_PICARD_T + 1.0)
_PICARD_W = 0.5 * _PICARD_W
RHO = 0.05


class StiffnessError(RuntimeError):
    def __init__(self, message, last_x):
        super().__init__(f"{message} (last x reached: {last_x!r})")
        self.last_x = last_x


def _kernel(l, x, y):
    """Free Green kernel at z = 0 and its x-derivative, for y < x."""
    if l == -0.5:
        r = np.sqrt(x * y)
        lg = np.log(x / y)
        return r * lg, np.sqrt(y / x) * (0.5 * lg + 1.0)
    k = (x ** (l + 1.0) * y ** (-l) - y ** (l + 1.0) * x ** (-l)) / (2 * l + 1.0)
    dk = ((l + 1.0) * x**l * y ** (-l) + l * y ** (l + 1.0) * x ** (-l - 1.0)) / (2 * l + 1.0)
    return k, dk


def start_data(l, q: Potential, z, x):
    """xi and xi' at small x: free solution plus one Picard step over (0, x)."""
    z = np.atleast_1d(z)
    free = xi_free(l, z, x)
    if q.is_zero:
        return free.value, free.derivative
    y = x * _PICARD_T**2
    wts = 2.0 * x * _PICARD_T * _PICARD_W
    k, dk = _kernel(l, x, y)
    qy = np.broadcast_to(q(y), y.shape)
    fy = xi_free(l, z[:, None], y[None, :]).value
    corr = (fy * (qy * k * wts)[None, :]).sum(axis=1)
    dcorr = (fy * (qy * dk * wts)[None, :]).sum(axis=1)
    return free.value + corr, free.derivative + dcorr


def _potential_fn(l, q):
    cent = l * (l + 1.0)

    def v(x):
        return cent / (x * x) + q(x)

    return v


def solve(l, q, z, x_out):
    """xi and xi' at the points x_out for every z; arrays of shape (len(x_out), len(z)).

    Two Magnus passes (mesh and halved mesh) are combined by Richardson
    extrapolation; the returned error is the extrapolation correction.
    """
    q = as_potential(q)
    z = np.atleast_1d(np.asarray(z))
    x_out = np.atleast_1d(np.asarray(x_out, dtype=float))
    if np.any(x_out <= 0) or np.any(x_out > 1):
        raise ValueError("x must lie in (0, 1]")
    w = math.sqrt(float(np.max(np.abs(z)))) if z.size else 0.0
    eps = min(1e-4, 0.01 / w) if w > 0 else 1e-4
    eps = min(eps, float(x_out.min()))
    hmax = min(0.01, 1.0 / max(w, 1.0))
    if hmax < 1e-7:
        raise StiffnessError("step size underflow", float(eps))

    p0, d0 = start_data(l, q, z, eps)
    mesh, mask = _magnus.build_mesh(eps, float(x_out.max()), hmax, RHO, x_out)
    vfn = _potential_fn(l, q)
    with np.errstate(all="ignore"):
        p1, d1 = _magnus.march(vfn, mesh, mask, z, p0, d0)
        fine, fmask = _magnus.halve(mesh, mask)
        p2, d2 = _magnus.march(vfn, fine, fmask, z, p0, d0)
    p = (16.0 * p2 - p1) / 15.0
    d = (16.0 * d2 - d1) / 15.0
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(d))):
        raise StiffnessError("non-finite solution values", float(mesh[-1]))
    err = np.maximum(np.abs(p2 - p1), np.abs(d2 - d1) / max(w, 1.0)) / 15.0
    # order of rows follows sorted unique x_out
    order = np.searchsorted(np.unique(x_out), x_out)
    return p[order], d[order], err[order]


@dataclass(frozen=True)
class RegularSolution:
    l: float
    q: Potential
    z: complex
    x: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    start_x: float
    estimated_error: float


def regular_solution(l, q, z, x_end=1.0, x=None) -> RegularSolution:
    q = as_potential(q)
    if x is None:
        x = np.array([x_end])
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p, d, err = solve(l, q, np.array([z]), x)
    w = math.sqrt(abs(z))
    eps = min(1e-4, 0.01 / w) if w > 0 else 1e-4
    vals, ders = p[:, 0], d[:, 0]
    if np.isrealobj(z) or (isinstance(z, complex) and z.imag == 0):
        vals, ders = np.real(vals), np.real(ders)
    return RegularSolution(l, q, z, x, vals, ders, eps, float(np.max(err)))


# ------------------------------------------------------------------ spectra


def _require_admissible(q, l):
    if q.constant is not None:
        return
    adm = check_admissibility(q, l)
    if not adm.admissible:
        raise ValueError(f"potential {q} is not admissible for l={l}: {adm.verdicts}")


def perturbed_boundary(l, q, beta, s):
    s = np.asarray(s, dtype=float)
    z = s * np.abs(s)
    p, d, _ = solve(l, q, z, np.array([1.0]))
    return _scaled_boundary(p[0].real, d[0].real, beta, s, l)


def perturbed_spectrum(l, q, beta, count) -> SpectralSequence:
    q = as_potential(q)
    _require_admissible(q, l)
    beta = resolve_beta(beta, l)
    grid = np.linspace(1e-3, 1.0, 400)
    qmin = float(np.min(np.broadcast_to(q(grid), grid.shape)))
    extra = math.sqrt(max(0.0, -qmin))
    diagnostics = []
    s = _scan.census(lambda s: perturbed_boundary(l, q, beta, s), count, l,
                     negative_window(beta, extra), diagnostics=diagnostics)
    ev = s * np.abs(s)
    p, d, _ = solve(l, q, ev, np.array([1.0]))
    res = boundary_residual(p[0].real, d[0].real, beta)
    return SpectralSequence(l, beta, ev, "root_found", res, diagnostics)


# ------------------------------------------------------------ HB function


@dataclass(frozen=True)
class HBFunction:
    l: float
    q: Potential
    kind: str

    def __call__(self, z):
        z = np.asarray(z)
        scalar = z.ndim == 0
        zz = np.atleast_1d(z)
        if self.kind == "free":
            sol = xi_free(self.l, zz, 1.0)
            out = sol.value + 1j * sol.derivative
        else:
            p, d, _ = solve(self.l, self.q, zz, np.array([1.0]))
            out = p[0] + 1j * d[0]
        return out[0] if scalar else out


def hb_function(l, q) -> HBFunction:
    q = as_potential(q)
    if q.is_zero:
        return HBFunction(l, q, "free")
    _require_admissible(q, l)
    return HBFunction(l, q, "perturbed")


# ---------------------------------------------------------------- transform


def quadrature_grid(w_max=1.0, panels_near_zero=24, nodes=10):
    """Composite Gauss nodes on (0, 1): dyadic panels toward 0, uniform panels of width <= 1/w beyond."""
    t, wt = np.polynomial.legendre.leggauss(nodes)
    width = min(0.05, 1.0 / max(w_max, 1.0))
    coarse = np.concatenate([[0.0], 2.0 ** -np.arange(panels_near_zero, -1, -1.0)])
    edges = [0.0]
    for a, b in zip(coarse[:-1], coarse[1:]):
        n = max(1, int(math.ceil((b - a) / width)))
        edges.extend(np.linspace(a, b, n + 1)[1:])
    edges = np.array(edges)
    a, b = edges[:-1], edges[1:]
    x = (a[:, None] + (b - a)[:, None] * 0.5 * (t[None, :] + 1.0)).ravel()
    w = ((b - a)[:, None] * 0.5 * wt[None, :]).ravel()
    return x, w


def xi_on_grid(l, q, z, x):
    """xi(z_j, x_i) for a batch of z on a quadrature grid; uses xi_free when q = 0."""
    q = as_potential(q)
    z = np.atleast_1d(np.asarray(z))
    if q.is_zero:
        sol = xi_free(l, z[None, :], x[:, None])
        return sol.value, sol.derivative
    p, d, _ = solve(l, q, z, x)
    return p, d


def transform(l, q, phi, z, grid=None):
    """phi_hat(z) = int_0^1 xi(z, x) phi(x) dx; phi is a callable or values on ``grid``."""
    z_arr = np.atleast_1d(np.asarray(z))
    if grid is None:
        w = math.sqrt(float(np.max(np.abs(z_arr)))) if z_arr.size else 0.0
        grid = quadrature_grid(max(w, 1.0))
    x, wts = grid
    vals = phi(x) if callable(phi) else np.asarray(phi)
    xi, _ = xi_on_grid(l, q, z_arr, x)
    out = (xi * (vals * wts)[:, None]).sum(axis=0)
    if np.isrealobj(z_arr):
        out = out.real
    return out[0] if np.ndim(z) == 0 else out


# ------------------------------------------------------------------- bounds


@dataclass
class BoundsReport:
    c_value: float
    c_derivative: float
    c_value_refined: float
    c_derivative_refined: float
    stable: bool
    ratios_value: np.ndarray = field(repr=False, default=None)
    ratios_derivative: np.ndarray = field(repr=False, default=None)


def _envelopes(l, q, z, x):
    """Envelopes multiplying the unknown constant in the two pointwise bounds."""
    az = np.sqrt(np.abs(z))[None, :]
    ims = np.abs(np.sqrt(z.astype(complex)).imag)[None, :]
    # cumulative int_0^x |q~(y)| / (1 + sqrt|z| y) dy by Gauss panels on (0, x_i)
    t, wt = np.polynomial.legendre.leggauss(24)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    cum = np.empty((x.size, az.shape[1]))
    for i, xi_ in enumerate(x):
        # graded substitution y = x t^2 concentrates nodes near 0
        y = xi_ * t**2
        dy = 2.0 * xi_ * t * wt
        qt = np.abs(np.broadcast_to(q_tilde(q, l, y), y.shape))
        cum[i] = ((qt * dy)[:, None] / (1.0 + az * y[:, None])).sum(axis=0)
    base = x[:, None] / (1.0 + az * x[:, None])
    growth = np.exp(ims * x[:, None])
    return base ** (l + 1.0) * growth * cum, base**l * growth * cum


def verify_bounds(l, q, z_grid, x_grid, refine=True) -> BoundsReport:
    """Fit the constants of the pointwise bounds on |xi - xi_l| and |xi' - xi_l'|."""
    q = as_potential(q)

    def fit(zs, xs):
        zs = np.asarray(zs)
        p, d = xi_on_grid(l, q, zs, xs)
        free = xi_free(l, zs[None, :], xs[:, None])
        env_v, env_d = _envelopes(l, q, zs, xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            rv = np.where(env_v > 0, np.abs(p - free.value) / env_v, 0.0)
            rd = np.where(env_d > 0, np.abs(d - free.derivative) / env_d, 0.0)
        return rv, rd

    z_grid = np.asarray(z_grid)
    x_grid = np.asarray(x_grid, dtype=float)
    rv, rd = fit(z_grid, x_grid)
    cv, cd = float(np.max(rv)), float(np.max(rd))
    cv2, cd2 = cv, cd
    if refine:
        z2 = _densify(z_grid)
        x2 = np.sort(np.concatenate([x_grid, 0.5 * (x_grid[1:] + x_grid[:-1])]))
        rv2, rd2 = fit(z2, x2)
        cv2, cd2 = float(np.max(rv2)), float(np.max(rd2))
    stable = all(
        (a == 0 and b == 0) or (math.isfinite(a) and math.isfinite(b) and abs(b - a) <= 0.1 * max(a, b))
        for a, b in ((cv, cv2), (cd, cd2))
    )
    return BoundsReport(cv, cd, cv2, cd2, stable, rv, rd)


def _densify(a):
    a = np.asarray(a)
    if a.size < 2:
        return a
    return np.concatenate([a, 0.5 * (a[1:] + a[:-1])])


def difference_norm(l, q, w):
    """||xi(w^2, .) - xi_l(w^2, .)||_2 for real w (vectorized)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    x, wts = quadrature_grid(float(np.max(np.abs(w))) * 2.0, nodes=12)
    z = w * w
    xi, _ = xi_on_grid(l, q, z, x)
    free = xi_free(l, z[None, :], x[:, None]).value
    return np.sqrt(((np.abs(xi - free) ** 2) * wts[:, None]).sum(axis=0))
