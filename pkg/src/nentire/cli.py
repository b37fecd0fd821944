"""Command-line batch front end.

    nentire spectrum --l 0 --beta 0 --count 3 --format csv
    nentire classify --l 0.5 --q "x"
    nentire criteria --l 0 --q 5 --n 1
    nentire --job job.txt

Exit status: 0 on success, 2 on invalid input, 3 on numeric failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile

import numpy as np

from nentire import criteria, debranges, free_op, perturbed
from nentire._scan import MissedRootError
from nentire.potential import ParseError, check_admissibility, parse_potential
from nentire.specialfn import bessel_j_zeros

COMMANDS = ("bessel", "spectrum", "classify", "criteria", "debranges", "bounds")
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(ValueError):
    pass


class NumericFailure(RuntimeError):
    pass


# ------------------------------------------------------------ serialization


def _fmt_json_float(x):
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_json(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_json_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt_csv(v):
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else format(float(v), ".12g")
    if v is None:
        return ""
    return str(v)


def to_csv(columns, rows):
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt_csv(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------------- jobs


def read_job_file(path):
    job = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = {"potential": "q", "output": "out"}.get(key, key)
            job[key] = value.strip('"').strip("'")
    return job


def _job_from_args(args):
    job = {}
    if args.job:
        job.update(read_job_file(args.job))
    for key in ("command", "l", "beta", "q", "count", "n", "format", "out"):
        val = getattr(args, key, None)
        if val is not None:
            job[key] = val
    return job


def _validate(job):
    cmd = job.get("command")
    if cmd not in COMMANDS:
        raise InputError(f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}")
    try:
        l = float(job.get("l", 0.0))
    except ValueError:
        raise InputError(f"l must be a real number, got {job.get('l')!r}") from None
    if not l >= -0.5:
        raise InputError("l must be >= -1/2")
    try:
        beta = free_op.resolve_beta(job.get("beta", 0.0), l)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        q = parse_potential(str(job.get("q", "0")))
    except ParseError as exc:
        raise InputError(f"potential: {exc}") from None
    try:
        count = int(job["count"]) if job.get("count") not in (None, "") else None
        n = int(job.get("n", 1))
    except ValueError:
        raise InputError("count and n must be integers") from None
    if count is not None and count < 1:
        raise InputError("count must be >= 1")
    fmt = job.get("format", "json")
    if fmt not in ("csv", "json"):
        raise InputError("format must be csv or json")
    return dict(command=cmd, l=l, beta=beta, q=q,
                count=count, n=n, format=fmt, out=job.get("out"))


def _require_admissible(q, l, diagnostics):
    if q.is_zero or q.constant is not None:
        return
    adm = check_admissibility(q, l)
    table = ", ".join(f"p={p}: {v}" for p, v in adm.verdicts.items())
    diagnostics.append(f"admissibility of {q}: {table}")
    if not adm.admissible:
        raise InputError(f"potential {q} is not admissible for l={l} ({table})")


# --------------------------------------------------------------- commands


def cmd_bessel(job, diag):
    nu = job["l"] + 0.5
    zeros = bessel_j_zeros(nu, job["count"] or 10)
    rows = [(i + 1, j, j * j) for i, j in enumerate(zeros)]
    return {"nu": nu}, ["n", "zero", "zero_squared"], rows


def cmd_spectrum(job, diag):
    l, q, count = job["l"], job["q"], job["count"] or 10
    if q.is_zero:
        spec = free_op.free_spectrum(l, job["beta"], count)
    else:
        _require_admissible(q, l, diag)
        spec = perturbed.perturbed_spectrum(l, q, job["beta"], count)
    diag.extend(spec.diagnostics)
    rows = [(i + 1, ev, r) for i, (ev, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]
    return {"method": spec.method, "beta": spec.beta}, ["n", "eigenvalue", "residual"], rows


def _fit_rows(report):
    rows = []
    for n, fit in sorted(report.c3_decay_exponent.items()):
        lo, hi = fit.band
        rows.append((n, fit.exponent, fit.stderr, lo, hi, report.c3_verdict[n]))
    return rows


FIT_COLUMNS = ["n", "c3_exponent", "c3_stderr", "band_low", "band_high", "c3_verdict"]


def cmd_classify(job, diag):
    l, q = job["l"], job["q"]
    _require_admissible(q, l, diag)
    res = criteria.classify_n_entire(l, q, count=job["count"] or 200)
    diag.extend(res.diagnostics)
    summary = {
        "minimal_n": res.minimal_n,
        "predicted_n": res.predicted_n,
        "verdict": res.verdict,
        "matches_prediction": res.matches_prediction,
        "c1_verdict": res.report.c1_verdict,
        "c2_limit_estimate": res.report.c2_limit_estimate,
        "c2_satisfied": res.report.c2_satisfied,
    }
    return summary, FIT_COLUMNS, _fit_rows(res.report)


def cmd_criteria(job, diag):
    l, q, n = job["l"], job["q"], job["n"]
    _require_admissible(q, l, diag)
    spec1, spec2 = criteria._spectra(l, q, job["count"] or 200)
    rep = criteria.criteria_report(spec1, spec2, [n])
    fit = rep.c3_decay_exponent[n]
    summary = {
        "n": n,
        "c1_sum": rep.c1_partial_sums[-1][1],
        "c1_verdict": rep.c1_verdict,
        "c2_limit_estimate": rep.c2_limit_estimate,
        "c2_satisfied": rep.c2_satisfied,
        "c2_limit_finite": rep.c2_limit_finite,
        "c3_decay_exponent": fit.exponent,
        "c3_band": list(fit.band),
        "c3_verdict": rep.c3_verdict[n],
    }
    terms = rep.c3_terms[n]
    x = spec1.eigenvalues[spec1.eigenvalues != 0.0]
    rows = [(j + 1, xj, t) for j, (xj, t) in enumerate(zip(x, terms))]
    return summary, ["j", "x_j", "c3_term"], rows


def cmd_debranges(job, diag):
    l, q = job["l"], job["q"]
    _require_admissible(q, l, diag)
    e = perturbed.hb_function(l, q)
    hb = debranges.hb_inequality_check(e, debranges.upper_half_samples(job["count"] or 500))
    rt = debranges.ratio_test(l, q)
    diag.extend(rt.skipped)
    summary = {
        "hb_passed": hb.passed,
        "hb_margin": hb.margin,
        "hb_relative_margin": hb.relative_margin,
        "hb_witness": None if hb.witness is None else [hb.witness.real, hb.witness.imag],
        "liminf_estimate": rt.liminf_estimate,
        "negative_axis_limit": rt.negative_axis_limit,
        "negative_axis_error": rt.negative_axis_error,
        "ratio_test_passed": rt.passed,
    }
    rows = [("positive", w, r) for w, r in zip(rt.grid, rt.ratios)]
    rows += [("negative", w, r) for w, r in zip(rt.negative_grid, rt.negative_ratios)]
    return summary, ["axis", "w", "ratio"], rows


def cmd_bounds(job, diag):
    l, q = job["l"], job["q"]
    _require_admissible(q, l, diag)
    z_grid = np.linspace(-100.0, 1e4, 60)
    x_grid = np.linspace(0.02, 1.0, 50)
    rep = perturbed.verify_bounds(l, q, z_grid, x_grid)
    w = np.linspace(10.0, 200.0, 40)
    env = debranges.lemma_decay_check(l, q, math.inf, w) if q.is_zero or _bounded(q, l) else None
    summary = {
        "c_value": rep.c_value,
        "c_derivative": rep.c_derivative,
        "c_value_refined": rep.c_value_refined,
        "c_derivative_refined": rep.c_derivative_refined,
        "stable": rep.stable,
        "envelope_c": None if env is None else env.fitted_c,
        "envelope_stable": None if env is None else env.stable,
    }
    rows = [] if env is None else [(wi, nm, ev) for wi, nm, ev in zip(env.grid, env.norms, env.envelope)]
    return summary, ["w", "difference_norm", "envelope"], rows


def _bounded(q, l):
    return check_admissibility(q, l).verdicts.get(math.inf) == "finite"


HANDLERS = {
    "bessel": cmd_bessel,
    "spectrum": cmd_spectrum,
    "classify": cmd_classify,
    "criteria": cmd_criteria,
    "debranges": cmd_debranges,
    "bounds": cmd_bounds,
}


def run(job):
    """Execute a validated job; returns the rendered output text."""
    diagnostics = []
    try:
        summary, columns, rows = HANDLERS[job["command"]](job, diagnostics)
    except (MissedRootError, perturbed.StiffnessError, FloatingPointError) as exc:
        raise NumericFailure(str(exc)) from exc
    if job["format"] == "csv":
        return to_csv(columns, rows), diagnostics
    inputs = {
        "l": job["l"],
        "beta": job["beta"],
        "q": str(job["q"]),
        "count": job["count"],
        "n": job["n"],
    }
    results = dict(summary)
    results["columns"] = columns
    results["rows"] = [list(r) for r in rows]
    doc = {"command": job["command"], "inputs": inputs, "results": results, "diagnostics": diagnostics}
    return to_json(doc) + "\n", diagnostics


def build_parser():
    p = argparse.ArgumentParser(prog="nentire", description=__doc__.split("\n")[0])
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--l", type=str)
    p.add_argument("--beta", type=str, help="boundary angle in [0, pi) or 'beta_l'")
    p.add_argument("--q", type=str, help="potential expression in x")
    p.add_argument("--count", type=str)
    p.add_argument("--n", type=str)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", type=str)
    p.add_argument("--job", type=str, help="file of 'key = value' lines")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        job = _validate(_job_from_args(args))
        text, diagnostics = run(job)
        for line in diagnostics:
            print(line, file=sys.stderr)
        if job["out"]:
            write_atomic(job["out"], text)
        else:
            sys.stdout.write(text)
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
