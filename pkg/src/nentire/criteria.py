"""Spectral conditions (C1)-(C3), canonical products from eigenvalue data and the
n-entire classifier.

An operator with spectra x_j (boundary angle beta1) and b_j (angle beta2) is
n-entire when (C1) sum 1/x_j converges, (C2) the positive and non-positive
counting densities match, and (C3) sum |x_j^(2n) h_beta2(x_j) h'_beta1(x_j)|^-1
converges, h_beta being the canonical product over the spectrum for beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nentire.free_op import SpectralSequence, beta_l, free_spectrum
from nentire.potential import as_potential
from nentire.specialfn import gamma, loggamma, reduced_bessel

MARGIN = 0.05  # exponent must clear 1 + MARGIN to count as convergent
CAUCHY_TOL = 1e-6
DIFF_STEP = 1e-5


def _values(spec):
    if isinstance(spec, SpectralSequence):
        return spec.eigenvalues
    return np.asarray(spec, dtype=float)


# ------------------------------------------------------------ exponents


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    stderr: float

    @property
    def band(self):
        return (self.exponent - 2 * self.stderr, self.exponent + 2 * self.stderr)

    def verdict(self, margin=MARGIN):
        lo, hi = self.band
        if lo > 1.0 + margin:
            return "convergent"
        if hi <= 1.0 + margin:
            return "divergent"
        return "inconclusive"


def decay_exponent(terms, min_terms=100) -> DecayFit:
    """p in terms_m ~ m^-p from a least-squares fit of log terms vs log m over the tail half."""
    terms = np.asarray(terms, dtype=float)
    if terms.size < min_terms:
        raise ValueError(f"need at least {min_terms} terms, got {terms.size}")
    if np.any(~(terms > 0)):
        raise ValueError("terms must be positive")
    m = np.arange(1, terms.size + 1, dtype=float)
    tail = slice(terms.size // 2, None)
    x = np.log(m[tail])
    y = np.log(terms[tail])
    xm = x - x.mean()
    slope = float((xm * (y - y.mean())).sum() / (xm * xm).sum())
    resid = y - y.mean() - slope * xm
    dof = max(x.size - 2, 1)
    se = math.sqrt(float((resid * resid).sum()) / dof / float((xm * xm).sum()))
    return DecayFit(-slope, se)


# ------------------------------------------------------------------ (C1)


@dataclass
class C1Result:
    partial_sums: list
    verdict: str
    fit: DecayFit


def c1_check(spec, r_schedule=None) -> C1Result:
    """Partial sums of 1/x_j over 0 < |x_j| <= r, ordered by modulus."""
    x = _values(spec)
    x = x[x != 0.0]
    x = x[np.argsort(np.abs(x), kind="stable")]
    if x.size < 50:
        raise ValueError("c1_check needs at least 50 non-zero eigenvalues")
    cums = np.cumsum(1.0 / x)
    if r_schedule is None:
        sums = [(float(abs(r)), float(s)) for r, s in zip(x, cums)]
    else:
        idx = np.searchsorted(np.abs(x), np.asarray(r_schedule, dtype=float), side="right")
        sums = [(float(r), float(cums[i - 1]) if i > 0 else 0.0) for r, i in zip(r_schedule, idx)]
    fit = decay_exponent(1.0 / np.abs(x), min_terms=50)
    return C1Result(sums, fit.verdict(), fit)


# ------------------------------------------------------------------ (C2)


def _richardson_limit(a):
    """Limit of a_j assuming a_j = L + c1/j + c2/j^2 + ...; returns (L, error estimate)."""
    a = np.asarray(a, dtype=float)
    n = a.size
    if n < 4:
        return float(a[-1]), math.inf
    m = n // 2
    k = m // 2
    r1_m = 2.0 * a[2 * m - 1] - a[m - 1]
    r1_k = 2.0 * a[2 * k - 1] - a[k - 1]
    r2 = (4.0 * r1_m - r1_k) / 3.0
    return float(r2), float(abs(r2 - r1_m))


@dataclass
class C2Result:
    positive_sequence: np.ndarray
    nonpositive_sequence: np.ndarray
    limit_estimate: float
    limit_error: float
    satisfied: bool
    limit_finite: bool


def c2_check(spec, tol=1e-3) -> C2Result:
    """j/x_j+ and its extrapolated limit.

    With finitely many non-positive points the matching condition reduces to
    lim j/x_j+ = 0, which ``satisfied`` reports; ``limit_finite`` records the
    weaker statement that the limit exists and is finite.
    """
    x = _values(spec)
    pos = np.sort(x[x > 0])
    neg = x[x <= 0]
    neg = neg[np.argsort(np.abs(neg), kind="stable")]
    jp = np.arange(1, pos.size + 1)
    seq_p = jp / pos
    with np.errstate(divide="ignore"):
        seq_n = np.arange(1, neg.size + 1) / np.abs(neg)
    lim, err = _richardson_limit(seq_p)
    finite = bool(math.isfinite(lim) and np.all(np.isfinite(seq_p)))
    return C2Result(seq_p, seq_n, lim, err, bool(abs(lim) <= max(tol, 10 * err) and finite), finite)


# -------------------------------------------------------- canonical products


@dataclass(frozen=True)
class TailModel:
    """b_n ~ pi^2 (n + c)^2 + d for the positive eigenvalues beyond the data."""

    c: float
    d: float

    def log_tail(self, n_last, z):
        """log prod_{k > n_last} (1 - z / b_k) under the model; n_last counts positive points."""
        a = n_last + 1.0 + self.c
        alpha = np.sqrt(complex(self.d)) / math.pi
        s = np.sqrt(np.asarray(z, dtype=complex) - self.d) / math.pi
        return (loggamma(a + 1j * alpha) + loggamma(a - 1j * alpha)
                - loggamma(a + s) - loggamma(a - s))


def fit_tail(spec) -> TailModel:
    x = _values(spec)
    pos = np.sort(x[x > 0])
    n = np.arange(1, pos.size + 1, dtype=float)
    sel = slice(pos.size * 3 // 4, None) if pos.size >= 8 else slice(None)
    # b_n - pi^2 n^2 = 2 pi^2 c n + (pi^2 c^2 + d)
    y = pos[sel] - math.pi**2 * n[sel] ** 2
    slope, icpt = np.polyfit(n[sel], y, 1)
    c = slope / (2 * math.pi**2)
    return TailModel(float(c), float(icpt - math.pi**2 * c * c))


@dataclass
class ProductValue:
    value: np.ndarray | complex
    n_terms: int
    truncated: bool
    cauchy_difference: float


def _log_product(x, z, n, tail):
    """log of z^[0 in x] prod_{first n nonzero} (1 - z/x_j), plus the model tail."""
    nz = x[x != 0.0][:n]
    out = np.log(1.0 - z[:, None] / nz[None, :] + 0j).sum(axis=1)
    if tail is not None:
        out += tail.log_tail(int(np.count_nonzero(nz > 0)), z)
    return out


def canonical_product(spec, z, n_terms=None, tail=True) -> ProductValue:
    """h(z) = z^[0 in spec] prod (1 - z/x_j) from eigenvalue data.

    With ``tail`` the omitted factors are replaced by the product over the
    fitted asymptotic law b_n = pi^2 (n + c)^2 + d, which is a ratio of
    gamma functions. Terms are doubled from ``n_terms`` (default 64) until
    n and 2n terms agree to 1e-6 relative; otherwise ``truncated`` is set.
    """
    x = _values(spec)
    scalar = np.ndim(z) == 0
    real_in = np.isrealobj(z)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    nonzero = int(np.count_nonzero(x))
    model = fit_tail(x) if tail else None
    n = min(n_terms or 64, nonzero)
    with np.errstate(divide="ignore"):
        prev = _log_product(x, zz, n, model)
        diff = math.inf
        while True:
            n2 = min(2 * n, nonzero)
            if n2 == n:
                if math.isinf(diff) and n >= 2:
                    half = np.exp(_log_product(x, zz, n // 2, model))
                    b = np.exp(prev)
                    diff = float(np.max(np.abs(half - b) / np.maximum(np.abs(b), 1e-300)))
                break
            cur = _log_product(x, zz, n2, model)
            a, b = np.exp(prev), np.exp(cur)
            diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
            n, prev = n2, cur
            if diff <= CAUCHY_TOL:
                break
        val = np.exp(prev)
    if np.any(x == 0.0):
        val = zz * val
    if real_in:
        val = val.real
    return ProductValue(val[0] if scalar else val, n, not diff <= CAUCHY_TOL, diff)


def product_derivative(spec, z, tail=True):
    """h'(z) by centered differences with step |z| * 1e-5 (at least 1e-5)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    h = DIFF_STEP * np.maximum(np.abs(z), 1.0)
    both = canonical_product(spec, np.concatenate([z + h, z - h]), tail=tail).value
    return (both[: z.size] - both[z.size:]) / (2 * h)


# ------------------------------------------------------------------ (C3)


def c3_base_terms(spec1, spec2, tail=True):
    """1/|h_beta2(x_j) h'_beta1(x_j)| over the non-zero x_j of spec1, with those x_j."""
    x = _values(spec1)
    x = x[x != 0.0]
    h2 = canonical_product(spec2, x, tail=tail).value
    d1 = product_derivative(spec1, x, tail=tail)
    return x, 1.0 / np.abs(h2 * d1)


def c3_terms(spec1, spec2, n, tail=True):
    if isinstance(spec1, SpectralSequence) and isinstance(spec2, SpectralSequence) and spec1.beta == spec2.beta:
        raise ValueError("c3 needs two different boundary angles")
    x, base = c3_base_terms(spec1, spec2, tail)
    return base / np.abs(x) ** (2 * n)


def free_c3_terms(l, n, count):
    """Closed form of the free (C3) terms with beta1 = 0, beta2 = beta_l."""
    nu = l + 0.5
    x = free_spectrum(l, 0.0, count).eigenvalues
    g = reduced_bessel(nu + 1.0, x)
    return 4.0 / (np.abs(x) ** (2 * n + 1) * gamma(nu + 1.0) * gamma(nu + 2.0) * g * g)


# ------------------------------------------------------------ classification


def predicted_n(l) -> int:
    """Smallest integer strictly greater than l/2 + 3/4."""
    return int(math.floor(l / 2 + 0.75)) + 1


@dataclass
class CriteriaReport:
    c1_partial_sums: list
    c1_verdict: str
    c2_sequence: np.ndarray
    c2_limit_estimate: float
    c2_satisfied: bool
    c2_limit_finite: bool
    c3_terms: dict = field(default_factory=dict)
    c3_decay_exponent: dict = field(default_factory=dict)
    c3_verdict: dict = field(default_factory=dict)
    minimal_n: int | None = None


@dataclass
class Classification:
    l: float
    q: str
    minimal_n: int | None
    predicted_n: int
    verdict: str
    report: CriteriaReport
    diagnostics: list = field(default_factory=list)

    @property
    def matches_prediction(self):
        return self.minimal_n == self.predicted_n


def criteria_report(spec1, spec2, n_values, tail=True) -> CriteriaReport:
    c1 = c1_check(spec1)
    c2 = c2_check(spec1)
    report = CriteriaReport(c1.partial_sums, c1.verdict, c2.positive_sequence, c2.limit_estimate,
                            c2.satisfied, c2.limit_finite)
    x, base = c3_base_terms(spec1, spec2, tail)
    for n in n_values:
        terms = base / np.abs(x) ** (2 * n)
        fit = decay_exponent(terms)
        report.c3_terms[n] = terms
        report.c3_decay_exponent[n] = fit
        report.c3_verdict[n] = fit.verdict()
    return report


def _spectra(l, q, count):
    from nentire.perturbed import perturbed_spectrum

    q = as_potential(q)
    if q.is_zero:
        return free_spectrum(l, 0.0, count), free_spectrum(l, beta_l(l), count)
    return perturbed_spectrum(l, q, 0.0, count), perturbed_spectrum(l, q, beta_l(l), count)


def classify_n_entire(l, q=0, count=200, n_max=8) -> Classification:
    """Minimal n for which (C1)-(C3) hold numerically, with the analytic prediction alongside."""
    q = as_potential(q)
    spec1, spec2 = _spectra(l, q, count)
    c1 = c1_check(spec1)
    c2 = c2_check(spec1)
    report = CriteriaReport(c1.partial_sums, c1.verdict, c2.positive_sequence, c2.limit_estimate,
                            c2.satisfied, c2.limit_finite)
    diagnostics = list(spec1.diagnostics) + list(spec2.diagnostics)
    x, base = c3_base_terms(spec1, spec2)
    minimal, verdict = None, "not n-entire for n <= %d" % n_max
    for n in range(n_max + 1):
        fit = decay_exponent(base / np.abs(x) ** (2 * n))
        report.c3_terms[n] = base / np.abs(x) ** (2 * n)
        report.c3_decay_exponent[n] = fit
        report.c3_verdict[n] = fit.verdict()
        if report.c3_verdict[n] == "inconclusive":
            verdict = "inconclusive"
            diagnostics.append(f"c3 exponent band {fit.band} at n={n} straddles 1+{MARGIN}")
            break
        if report.c3_verdict[n] == "convergent":
            # monotonicity: n+1 must not be weaker
            nxt = decay_exponent(base / np.abs(x) ** (2 * n + 2))
            report.c3_decay_exponent[n + 1] = nxt
            report.c3_verdict[n + 1] = nxt.verdict()
            report.c3_terms[n + 1] = base / np.abs(x) ** (2 * n + 2)
            if report.c3_verdict[n + 1] != "convergent":
                verdict = "inconclusive"
                diagnostics.append(f"non-monotone c3 verdicts at n={n}")
            elif c1.verdict == "convergent" and c2.satisfied:
                minimal, verdict = n, "n-entire"
            else:
                verdict = "inconclusive"
                diagnostics.append(f"c1 {c1.verdict}, c2 satisfied={c2.satisfied}")
            break
    report.minimal_n = minimal
    return Classification(l, str(q), minimal, predicted_n(l), verdict, report, diagnostics)
