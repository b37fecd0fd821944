"""Measured ||xi(w^2,.) - xi_l(w^2,.)||_2 against the decay envelope, as plot-ready columns.

    python scripts/envelope_scan.py                       # q = 1, l = 0, bounded envelope
    python scripts/envelope_scan.py --q "x^(-0.5)" --s 4  # q~ in L_4
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from nentire.debranges import lemma_decay_check


@dataclass
class EnvelopeConfig:
    l: float = 0.0
    q: str = "1"
    s: float = math.inf
    w_min: float = 10.0
    w_max: float = 200.0
    points: int = 40


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--l", type=float)
    p.add_argument("--q")
    p.add_argument("--s", type=float, help="Lebesgue exponent of q~ (default inf)")
    p.add_argument("--w-min", type=float)
    p.add_argument("--w-max", type=float)
    p.add_argument("--points", type=int)
    args = p.parse_args(argv)
    cfg = EnvelopeConfig(**{k: v for k, v in vars(args).items() if v is not None})

    w = np.geomspace(cfg.w_min, cfg.w_max, cfg.points)
    rep = lemma_decay_check(cfg.l, cfg.q, cfg.s, w)
    print("w,difference_norm,envelope,ratio")
    for row in zip(rep.grid, rep.norms, rep.envelope, rep.constants):
        print(",".join(format(v, ".10g") for v in row))
    print(f"# fitted C = {rep.fitted_c:.6g}, stable = {rep.stable}, dominated = {rep.dominated}",
          file=sys.stderr)
    return 0 if rep.stable and rep.dominated else 1


if __name__ == "__main__":
    sys.exit(main())
