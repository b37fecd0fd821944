"""Vectorized bracket refinement: bisection to a coarse width, then secant polish."""
from __future__ import annotations

import numpy as np


def refine_brackets(f, a, b, fa=None, fb=None, bisect_width=1e-6, rtol=4e-16, max_polish=30):
    """Refine sign-change brackets ``[a_i, b_i]`` of ``f`` simultaneously.

    ``f`` maps an array of abscissae to an array of real values. Every
    bracket must carry a sign change (or an exact zero at an endpoint).
    Bisection runs until the width is below ``bisect_width`` (relative to
    max(1, |x|)); a bracket-safeguarded secant then polishes to ``rtol``.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    fa = np.asarray(f(a) if fa is None else fa, dtype=float).copy()
    fb = np.asarray(f(b) if fb is None else fb, dtype=float).copy()
    if np.any(np.sign(fa) * np.sign(fb) > 0):
        raise ValueError("refine_brackets: bracket without sign change")

    exact_a = fa == 0
    exact_b = fb == 0

    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    while True:
        wide = (b - a) > bisect_width * scale
        wide &= ~(exact_a | exact_b)
        if not np.any(wide):
            break
        m = 0.5 * (a[wide] + b[wide])
        fm = np.asarray(f(m), dtype=float)
        left = np.sign(fm) == np.sign(fa[wide])
        ia = np.flatnonzero(wide)
        a[ia[left]] = m[left]
        fa[ia[left]] = fm[left]
        b[ia[~left]] = m[~left]
        fb[ia[~left]] = fm[~left]
        hit = fm == 0
        a[ia[hit]] = m[hit]
        fa[ia[hit]] = 0.0
        exact_a[ia[hit]] = True

    x = np.where(exact_a, a, np.where(exact_b, b, 0.5 * (a + b)))
    live = ~(exact_a | exact_b)
    for _ in range(max_polish):
        if not np.any(live):
            break
        idx = np.flatnonzero(live)
        den = fb[idx] - fa[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = b[idx] - fb[idx] * (b[idx] - a[idx]) / den
        tiny = 4 * rtol * np.maximum(1.0, np.abs(a[idx]))
        xs = np.where(np.isfinite(xs), xs, 0.5 * (a[idx] + b[idx]))
        # a secant step landing on an endpoint is pulled just inside
        xs = np.clip(xs, a[idx] + tiny, b[idx] - tiny)
        xs = np.where(a[idx] + tiny < b[idx] - tiny, xs, 0.5 * (a[idx] + b[idx]))
        fx = np.asarray(f(xs), dtype=float)
        same = np.sign(fx) == np.sign(fa[idx])
        # Illinois modification keeps the stale endpoint from stalling
        a_new = np.where(same, xs, a[idx])
        b_new = np.where(same, b[idx], xs)
        fa_new = np.where(same, fx, fa[idx] * 0.5)
        fb_new = np.where(same, fb[idx] * 0.5, fx)
        step = np.abs(xs - x[idx])
        x[idx] = xs
        a[idx], b[idx], fa[idx], fb[idx] = a_new, b_new, fa_new, fb_new
        done = (fx == 0) | (step <= rtol * np.maximum(1.0, np.abs(xs))) | ((b[idx] - a[idx]) <= rtol * np.maximum(1.0, np.abs(xs)))
        live[idx[done]] = False
    return x
