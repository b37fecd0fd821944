"""Root census of a boundary function along z = s|s| (s = sqrt z for z >= 0, -sqrt(-z) below)."""
from __future__ import annotations

import math

import numpy as np

from nentire._roots import refine_brackets

STEP = math.pi / 8
ZERO_SNAP = 1e-7  # |s| below this is reported as the eigenvalue 0


class MissedRootError(RuntimeError):
    pass


def _brackets(grid, vals):
    sign = np.sign(vals)
    exact = np.flatnonzero(sign == 0)
    flips = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    return flips, exact


def _roots_on(boundary, grid):
    vals = np.asarray(boundary(grid), dtype=float)
    flips, exact = _brackets(grid, vals)
    roots = list(grid[exact])
    if flips.size:
        roots.extend(refine_brackets(boundary, grid[flips], grid[flips + 1], vals[flips], vals[flips + 1]))
    return np.sort(np.array(roots, dtype=float))


def census(boundary, count, l, t_neg, step=STEP, diagnostics=None):
    """First ``count`` roots in s of ``boundary`` (vectorized s -> real).

    Negative s down to -t_neg is scanned once; the positive window grows
    until ``count`` roots are found. Consecutive positive roots further
    apart than 1.5*pi (the asymptotic spacing is pi) trigger a rescan of
    the gap at a quarter of the step.
    """
    if diagnostics is None:
        diagnostics = []
    neg = -np.arange(t_neg, 0.0, -step)
    s_max = (math.pi / 2) * (2 * count + max(l, 0.0)) + 2 * math.pi
    grid = np.concatenate([neg, [0.0], np.arange(step, s_max + step, step)])
    roots = _roots_on(boundary, grid)
    while roots.size < count:
        lo = grid[-1]
        grid = np.arange(lo, lo + max(count - roots.size, 4) * math.pi + 2 * math.pi, step)
        roots = np.union1d(roots, _roots_on(boundary, grid))

    for _ in range(3):
        pos = roots[roots > 5.0]
        gaps = np.diff(pos)
        wide = np.flatnonzero(gaps > 1.5 * math.pi)
        if wide.size == 0:
            break
        for i in wide:
            a, b = pos[i], pos[i + 1]
            diagnostics.append(f"rescanned gap ({a:.6g}, {b:.6g}) in sqrt(z) at step {step / 4:.4g}")
            fine = np.linspace(a, b, int(math.ceil((b - a) / (step / 4))) + 1)[1:-1]
            extra = _roots_on(boundary, fine)
            roots = np.union1d(roots, extra)
    else:
        raise MissedRootError("root spacing stays irregular after rescanning: " + "; ".join(diagnostics))

    roots = roots[:count]
    roots = np.where(np.abs(roots) < ZERO_SNAP, 0.0, roots)
    return roots
