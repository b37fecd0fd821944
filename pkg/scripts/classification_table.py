"""Minimal n for which (C1)-(C3) hold, over a grid of l and potentials.

    python scripts/classification_table.py
    python scripts/classification_table.py --ls 0 0.5 1 --qs 0 "x" --count 300 --csv table.csv
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field

from nentire.criteria import classify_n_entire


@dataclass
class TableConfig:
    ls: list = field(default_factory=lambda: [-0.5, 0.0, 0.5, 1.0, 2.0, 3.0])
    qs: list = field(default_factory=lambda: ["0", "5", "x"])
    count: int = 200
    n_max: int = 8
    csv_path: str | None = None


COLUMNS = ["l", "q", "minimal_n", "predicted_n", "verdict", "c3_exponent", "band_low", "band_high"]


def build_table(cfg: TableConfig):
    rows = []
    for l in cfg.ls:
        for q in cfg.qs:
            c = classify_n_entire(l, q, count=cfg.count, n_max=cfg.n_max)
            n = c.minimal_n
            fit = c.report.c3_decay_exponent.get(n) if n is not None else None
            lo, hi = fit.band if fit else (float("nan"), float("nan"))
            rows.append([l, q, n, c.predicted_n, c.verdict, fit.exponent if fit else float("nan"), lo, hi])
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--ls", type=float, nargs="+")
    p.add_argument("--qs", nargs="+")
    p.add_argument("--count", type=int)
    p.add_argument("--csv", dest="csv_path")
    args = p.parse_args(argv)
    cfg = TableConfig(**{k: v for k, v in vars(args).items() if v is not None})

    start = time.perf_counter()
    rows = build_table(cfg)
    print(f"{'l':>5} {'q':>4} {'min n':>6} {'pred':>5}  {'exponent':>9}  verdict")
    for l, q, n, pred, verdict, p_, _, _ in rows:
        flag = "" if n == pred else "  <-- differs from prediction"
        print(f"{l:>5g} {q:>4} {str(n):>6} {pred:>5}  {p_:>9.3f}  {verdict}{flag}")
    print(f"{len(rows)} cells in {time.perf_counter() - start:.1f} s")
    if cfg.csv_path:
        with open(cfg.csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            w.writerows(rows)
    return 0 if all(r[2] == r[3] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
