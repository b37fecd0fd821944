"""Numeric checks of the de Branges space picture: the Hermite-Biehler inequality
for e(z) = xi(z,1) + i xi'(z,1), the quotient e/e0 on the real axis, the decay
envelope of xi - xi_l, and constancy of ||phi_hat||_B(e) / ||phi||_2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nentire.free_op import free_spectrum
from nentire.perturbed import (
    HBFunction,
    difference_norm,
    hb_function,
    quadrature_grid,
    solve,
)
from nentire.potential import as_potential, check_admissibility, lp_norm_estimate, q_tilde
from nentire.specialfn import xi_free

_TG, _WG = np.polynomial.legendre.leggauss(16)


# ------------------------------------------------------------ HB inequality


@dataclass
class HBReport:
    passed: bool
    margin: float
    relative_margin: float
    samples: int
    witness: complex | None = None


def upper_half_samples(count, seed=0, re_range=(-100.0, 400.0), im_range=(1e-2, 1e2)):
    """Random points with uniform real part and log-uniform imaginary part."""
    rng = np.random.default_rng(seed)
    re = rng.uniform(*re_range, size=count)
    im = np.exp(rng.uniform(math.log(im_range[0]), math.log(im_range[1]), size=count))
    return re + 1j * im


def hb_inequality_check(e: HBFunction, samples) -> HBReport:
    z = np.atleast_1d(np.asarray(samples, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("samples must lie in the open upper half-plane")
    up = np.abs(e(z))
    down = np.abs(e(np.conj(z)))
    gap = up - down
    rel = gap / np.maximum(up, 1e-300)
    bad = np.flatnonzero(~(gap > 0))
    witness = complex(z[bad[0]]) if bad.size else None
    return HBReport(bad.size == 0, float(gap.min()), float(rel.min()), int(z.size), witness)


# ---------------------------------------------------------------- ratio test


@dataclass
class RatioReport:
    grid: np.ndarray
    ratios: np.ndarray
    liminf_estimate: float
    negative_axis_limit: float
    negative_axis_error: float
    negative_grid: np.ndarray = field(repr=False, default=None)
    negative_ratios: np.ndarray = field(repr=False, default=None)
    skipped: list = field(default_factory=list)
    passed: bool = False


def _local_scale(values, w, half_width=math.pi):
    out = np.empty_like(values)
    for i, wi in enumerate(w):
        sel = np.abs(w - wi) <= half_width
        out[i] = values[sel].max()
    return out


def _extrapolate_inverse(w, r):
    """Value at 1/w = 0 of quadratic and linear fits in 1/w over the upper half of the grid."""
    h = slice(w.size // 2, None)
    u = 1.0 / w[h]
    quad = np.polyfit(u, r[h], 2)[-1] if u.size >= 4 else r[-1]
    lin = np.polyfit(u, r[h], 1)[-1] if u.size >= 2 else r[-1]
    return float(quad), float(abs(quad - lin))


def ratio_test(l, q, w_grid=None, negative_w_grid=None, tol=1e-3) -> RatioReport:
    """|e(x)/e0(x)| along x = w^2 and x = -w^2.

    The positive-axis liminf is the minimum over the upper half of the grid;
    points where |e0| falls below 1e-6 of its local scale are skipped.
    """
    q = as_potential(q)
    e = hb_function(l, q)
    e0 = hb_function(l, 0)
    w = np.asarray(w_grid if w_grid is not None else np.linspace(10.0, 400.0, 1561), dtype=float)
    wn = np.asarray(negative_w_grid if negative_w_grid is not None else np.linspace(10.0, 400.0, 79), dtype=float)

    a0 = np.abs(e0(w * w))
    scale = _local_scale(a0, w)
    keep = a0 > 1e-6 * scale
    skipped = [f"w={wi:.6g}: |e0| = {ai:.3g} below threshold" for wi, ai in zip(w[~keep], a0[~keep])]
    ratios = np.full(w.size, np.nan)
    ratios[keep] = np.abs(e(w[keep] ** 2)) / a0[keep]
    upper = ratios[w.size // 2:]
    liminf = float(np.nanmin(upper))

    neg = np.abs(e(-wn * wn)) / np.abs(e0(-wn * wn))
    lim, err = _extrapolate_inverse(wn, neg)
    passed = liminf > 0 and abs(lim - 1.0) <= tol
    return RatioReport(w, ratios, liminf, lim, err, wn, neg, skipped, bool(passed))


# ---------------------------------------------------------- decay envelope


@dataclass
class EnvelopeReport:
    s: float
    grid: np.ndarray
    norms: np.ndarray
    envelope: np.ndarray
    constants: np.ndarray
    fitted_c: float
    stable: bool
    dominated: bool


def envelope(l, s, w):
    w = np.asarray(w, dtype=float)
    if math.isinf(s):
        return w ** (-l - 2.0) * np.log(w)
    inv_r = 1.0 - 1.0 / s
    return w ** (-l - 1.0 - inv_r)


def lemma_decay_check(l, q, s, w_grid, spread=0.2) -> EnvelopeReport:
    """Fit C in ||xi(w^2,.) - xi_l(w^2,.)||_2 <= C * envelope(w) and test its stability.

    C is the largest ratio over the upper half of the grid; it is stable when
    every ratio there lies within ``spread`` of their median.
    """
    q = as_potential(q)
    if not q.is_zero:
        norm, verdict = lp_norm_estimate(lambda x: q_tilde(q, l, x), s)
        if verdict != "finite":
            raise ValueError(f"q~ is not in L_{s} ({verdict})")
    w = np.asarray(w_grid, dtype=float)
    norms = np.zeros(w.size) if q.is_zero else difference_norm(l, q, w)
    env = envelope(l, s, w)
    ratios = norms / env
    upper = ratios[w.size // 2:]
    c = float(upper.max())
    med = float(np.median(upper))
    stable = bool(med == 0 or np.all(np.abs(upper - med) <= spread * med))
    dominated = bool(np.all(norms[w.size // 2:] <= c * env[w.size // 2:] * (1 + 1e-12)))
    return EnvelopeReport(s, w, norms, env, ratios, c, stable, dominated)


# --------------------------------------------------------- transform ratio


def _batched(l, q, z, phis):
    """phi_hat(z) for every phi and e(z), batching z with a grid sized to the batch."""
    q = as_potential(q)
    order = np.argsort(np.abs(z))
    hats = np.empty((len(phis), z.size), dtype=complex)
    ev = np.empty(z.size, dtype=complex)
    for start in range(0, z.size, 128):
        idx = order[start:start + 128]
        zb = z[idx]
        x, wts = quadrature_grid(max(math.sqrt(float(np.max(np.abs(zb)))), 1.0))
        if q.is_zero:
            sol = xi_free(l, zb[None, :], x[:, None])
            xi = sol.value
            end = xi_free(l, zb, 1.0)
            ev[idx] = end.value + 1j * end.derivative
        else:
            p, d, _ = solve(l, q, zb, np.concatenate([x, [1.0]]))
            xi = p[:-1]
            ev[idx] = p[-1] + 1j * d[-1]
        for k, phi in enumerate(phis):
            hats[k, idx] = (xi * (phi(x) * wts)[:, None]).sum(axis=0)
    return hats, ev


def _spike_centers(l, q, w_max):
    """sqrt of the positive points with xi'(z,1) = 0, where |e| dips on the axis."""
    from nentire.perturbed import perturbed_spectrum

    q = as_potential(q)
    count = int(w_max / math.pi) + 4
    spec = free_spectrum(l, math.pi / 2, count) if q.is_zero else perturbed_spectrum(l, q, math.pi / 2, count)
    ev = spec.eigenvalues
    return np.sqrt(ev[ev > 0])


def _positive_nodes(centers, k_from, k_to, plain_end=None):
    """Quadrature nodes in w for periods k_from..k_to-1 (sinh-graded around each center),
    preceded by plain Gauss panels on [0, plain_end] when given."""
    ws, wts = [], []
    if plain_end is not None:
        edges = np.linspace(0.0, plain_end, max(2, int(math.ceil(plain_end / 0.1))) + 1)
        a, b = edges[:-1], edges[1:]
        ws.append((a[:, None] + (b - a)[:, None] * 0.5 * (_TG + 1.0)).ravel())
        wts.append(((b - a)[:, None] * 0.5 * _WG[None, :]).ravel())
    for k in range(max(k_from, 1), k_to):
        c = centers[k]
        lo = 0.5 * (centers[k - 1] + c)
        hi = 0.5 * (c + centers[k + 1])
        width = 1.0 / c
        for t1, t2 in ((math.asinh((lo - c) / width), 0.0), (0.0, math.asinh((hi - c) / width))):
            t = t1 + (t2 - t1) * 0.5 * (_TG + 1.0)
            ws.append(c + width * np.sinh(t))
            wts.append((t2 - t1) * 0.5 * _WG * width * np.cosh(t))
    return np.concatenate(ws), np.concatenate(wts)


def _richardson_tail(levels):
    """Extrapolate partial integrals at doubling windows assuming I(W) = I - A W^-p."""
    if len(levels) < 3:
        return levels[-1], math.inf
    i1, i2, i3 = levels[-3:]
    d1, d2 = i2 - i1, i3 - i2
    if d2 == 0:
        return i3, 0.0
    ratio = d1 / d2
    if ratio <= 1.0:
        return i3, abs(d2)
    est = i3 + d2 / (ratio - 1.0)
    return est, abs(d2 / (ratio - 1.0))


@dataclass
class TransformRatioReport:
    ratios: np.ndarray
    norms: np.ndarray
    integrals: np.ndarray
    window_w: float
    window_t: float
    tail_converged: bool
    diagnostics: list = field(default_factory=list)

    @property
    def spread(self):
        r = self.ratios
        return float((r.max() - r.min()) / np.mean(r))


def transform_norm_ratio(l, q, phis, tol=1e-4, periods=32, max_doublings=5, t_start=25.0, t_max=600.0):
    """int_R |phi_hat|^2/|e|^2 dx divided by ||phi||_2^2 for each phi.

    The positive axis is integrated in w = sqrt(x) period by period, the
    negative axis in t = sqrt(-x); each window doubles until the
    Richardson-extrapolated integral moves by at most ``tol`` relative.
    """
    q = as_potential(q)
    phis = list(phis)
    diagnostics = []
    xg, wg = quadrature_grid(50.0, nodes=16)
    norms = np.array([float((np.abs(phi(xg)) ** 2 * wg).sum()) for phi in phis])

    w_cap = periods * math.pi * 2**max_doublings + 2 * math.pi
    centers = _spike_centers(l, q, w_cap)
    k_plain = int(np.searchsorted(centers, 8.0))
    k_plain = max(k_plain, 1)
    plain_end = 0.5 * (centers[k_plain - 1] + centers[k_plain])

    def pos_piece(k_from, k_to, plain=None):
        w, wt = _positive_nodes(centers, k_from, k_to, plain)
        hats, ev = _batched(l, q, w * w + 0j, phis)
        return ((np.abs(hats / ev) ** 2) * (2 * w * wt)).sum(axis=1)

    def neg_piece(t_from, t_to):
        edges = np.arange(t_from, t_to + 1e-9, 1.0)
        a, b = edges[:-1], edges[1:]
        t = (a[:, None] + (b - a)[:, None] * 0.5 * (_TG + 1.0)).ravel()
        wt = ((b - a)[:, None] * 0.5 * _WG[None, :]).ravel()
        hats, ev = _batched(l, q, -(t * t) + 0j, phis)
        return ((np.abs(hats / ev) ** 2) * (2 * t * wt)).sum(axis=1)

    # positive axis
    k_end = max(periods, 2 * k_plain)
    acc = pos_piece(k_plain, k_end, plain_end)
    pos_levels = [acc.copy()]
    pos_est, pos_err = acc, np.full(len(phis), math.inf)
    prev_est = None
    for _ in range(max_doublings):
        k_new = min(2 * k_end, centers.size - 1)
        acc = acc + pos_piece(k_end, k_new)
        k_end = k_new
        pos_levels.append(acc.copy())
        if len(pos_levels) >= 3:
            est = np.array([_richardson_tail([lv[i] for lv in pos_levels])[0] for i in range(len(phis))])
            if prev_est is not None and np.all(np.abs(est - prev_est) <= tol * np.abs(est)):
                pos_est = est
                break
            prev_est = est
            pos_est = est
    else:
        diagnostics.append("positive-axis window did not converge")
    pos_conv = not diagnostics
    window_w = float(0.5 * (centers[k_end - 1] + centers[k_end]))

    # negative axis
    t_end = t_start
    acc = neg_piece(0.0, t_end)
    neg_levels = [acc.copy()]
    neg_est = acc
    prev_est = None
    neg_conv = False
    while 2 * t_end <= t_max:
        acc = acc + neg_piece(t_end, 2 * t_end)
        t_end *= 2
        neg_levels.append(acc.copy())
        if len(neg_levels) >= 3:
            est = np.array([_richardson_tail([lv[i] for lv in neg_levels])[0] for i in range(len(phis))])
            if prev_est is not None and np.all(np.abs(est - prev_est) <= tol * np.abs(est)):
                neg_est, neg_conv = est, True
                break
            prev_est = est
            neg_est = est
    if not neg_conv:
        diagnostics.append("negative-axis window did not converge")

    total = pos_est + neg_est
    return TransformRatioReport(total / norms, norms, total, window_w, t_end, pos_conv and neg_conv, diagnostics)
