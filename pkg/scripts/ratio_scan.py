"""|e(x)/e0(x)| along both real half-axes, plus the transform-isometry constant.

    python scripts/ratio_scan.py --q 5
    python scripts/ratio_scan.py --q 0 --isometry
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from nentire.debranges import ratio_test, transform_norm_ratio


@dataclass
class RatioConfig:
    l: float = 0.0
    q: str = "5"
    w_max: float = 400.0
    isometry: bool = False


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--l", type=float)
    p.add_argument("--q")
    p.add_argument("--w-max", type=float)
    p.add_argument("--isometry", action="store_true", default=None)
    args = p.parse_args(argv)
    cfg = RatioConfig(**{k: v for k, v in vars(args).items() if v is not None})

    rep = ratio_test(cfg.l, cfg.q, np.linspace(10.0, cfg.w_max, 1561), np.linspace(10.0, cfg.w_max, 79))
    print("axis,w,ratio")
    for w, r in zip(rep.negative_grid, rep.negative_ratios):
        print(f"negative,{w:.10g},{r:.12g}")
    for w, r in zip(rep.grid, rep.ratios):
        print(f"positive,{w:.10g},{r:.12g}")
    print(f"# negative-axis limit {rep.negative_axis_limit:.10f} +- {rep.negative_axis_error:.1e}", file=sys.stderr)
    print(f"# positive-axis liminf {rep.liminf_estimate:.6f}; {len(rep.skipped)} points skipped", file=sys.stderr)
    if cfg.isometry:
        phis = [lambda x: np.sin(np.pi * x), lambda x: np.sin(2 * np.pi * x), lambda x: np.ones_like(x),
                lambda x: x, lambda x: np.exp(-3.0 * x) * np.cos(5.0 * x)]
        iso = transform_norm_ratio(cfg.l, cfg.q, phis)
        print(f"# isometry ratios {iso.ratios}, spread {iso.spread:.2e}, converged {iso.tail_converged}",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
