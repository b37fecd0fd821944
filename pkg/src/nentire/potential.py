"""Potential expressions q(x): parsing, weighting q -> q~, and L_p admissibility.

Grammar (usual precedence, ``^`` right-associative and binding tighter
than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | 'x' | 'pi' | NAME '(' expr ')' | '(' expr ')'
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

FUNCTIONS = {"log": np.log, "exp": np.exp, "sin": np.sin, "cos": np.cos}
SAMPLED_P = (2.5, 3.0, 4.0, math.inf)


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Neg:
    operand: object

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    name: str
    arg: object

    def __str__(self):
        return f"{self.name}({self.arg})"


def evaluate(node, x):
    if isinstance(node, Num):
        return np.full(np.shape(x), node.value) if np.ndim(x) else node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -evaluate(node.operand, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.name](evaluate(node.arg, x))
    a = evaluate(node.left, x)
    b = evaluate(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^(),]))")


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start)
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            inner = self.unary()
            return Neg(inner) if val == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "x":
                return Var()
            if val == "pi":
                return Num(math.pi)
            if val not in FUNCTIONS:
                raise ParseError(f"unknown identifier {val!r}", pos)
            self.expect("(")
            if self.peek()[1] == ")":
                raise ParseError(f"{val}() takes exactly one argument, got 0", self.peek()[2])
            arg = self.expr()
            if self.peek()[1] == ",":
                raise ParseError(f"{val}() takes exactly one argument", self.peek()[2])
            self.expect(")")
            return Call(val, arg)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)


@dataclass(frozen=True)
class Potential:
    expression: object
    description: str = field(default="", compare=False)

    def __call__(self, x):
        with np.errstate(all="ignore"):
            return evaluate(self.expression, x)

    def __str__(self):
        return str(self.expression)

    @property
    def is_zero(self) -> bool:
        return isinstance(self.expression, Num) and self.expression.value == 0.0

    @property
    def constant(self) -> float | None:
        """The value if the expression is a bare literal, else None."""
        e = self.expression
        if isinstance(e, Neg) and isinstance(e.operand, Num):
            return -e.operand.value
        return e.value if isinstance(e, Num) else None


def parse_potential(text: str) -> Potential:
    if not text or not text.strip():
        raise ParseError("empty potential expression", 0)
    return Potential(_Parser(text).parse(), description=text.strip())


def as_potential(q) -> Potential:
    if isinstance(q, Potential):
        return q
    if isinstance(q, (int, float)):
        return Potential(Num(float(q)) if q >= 0 else Neg(Num(-float(q))), description=repr(q))
    return parse_potential(str(q))


def q_tilde(q, l: float, x):
    """x q(x) for l > -1/2, x (1 - log x) q(x) for l == -1/2."""
    q = as_potential(q)
    x = np.asarray(x, dtype=float)
    weight = x * (1.0 - np.log(x)) if l == -0.5 else x
    out = weight * q(x)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- admissibility

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_N_PANELS = 64


@dataclass
class Admissibility:
    q_tilde_norms: dict
    admissible: bool
    witness_p: float | None
    verdicts: dict = field(default_factory=dict)
    note: str = "numeric evidence"


def _dyadic_panels(func):
    """Values of func on Gauss nodes of panels [2^-(k+1), 2^-k], k = 0..N-1."""
    k = np.arange(_N_PANELS)
    hi = 2.0 ** (-k)
    lo = hi / 2.0
    x = lo[:, None] + (hi - lo)[:, None] * (_GL_NODES[None, :] + 1.0) / 2.0
    return x, (hi - lo)[:, None] * _GL_WEIGHTS[None, :] / 2.0, func(x)


def lp_norm_estimate(func, p: float):
    """Estimate the L_p(0, 1) norm of ``func``; returns (norm or inf or nan, verdict).

    Verdict is "finite", "divergent" or "inconclusive". Panels are dyadic
    toward 0; a refinement step adds the next panel.
    """
    x, w, vals = _dyadic_panels(func)
    vals = np.abs(vals)
    if not np.all(np.isfinite(vals)):
        return math.inf, "divergent"
    if math.isinf(p):
        peaks = vals.max(axis=1)
        tail = peaks[-8:]
        growth = tail[1:] / np.maximum(tail[:-1], 1e-300)
        if np.all(growth > 1.01):
            return math.inf, "divergent"
        if np.all(growth <= 1.0 + 1e-3):
            return float(peaks.max()), "finite"
        return math.nan, "inconclusive"

    panel = (vals**p * w).sum(axis=1)
    partial = np.cumsum(panel)
    # divergence rule: the partial integral grows by > 5% for three consecutive refinements
    rel = panel[1:] / np.maximum(partial[:-1], 1e-300)
    tail_rel = rel[-3:]
    ratios = panel[-9:][1:] / np.maximum(panel[-9:][:-1], 1e-300)
    r = float(np.max(ratios)) if np.all(panel[-9:] > 0) else 0.0
    if np.all(tail_rel > 0.05) or r >= 0.999:
        return math.inf, "divergent"
    steady = np.ptp(ratios) <= 1e-3 * r if r > 0 else True
    if r < 0.9 or steady:
        tail = panel[-1] * r / (1.0 - r) if r > 0 else 0.0
        return float((partial[-1] + tail) ** (1.0 / p)), "finite"
    return math.nan, "inconclusive"


def check_admissibility(q, l: float) -> Admissibility:
    q = as_potential(q)
    probe = q(np.linspace(1e-3, 1 - 1e-3, 257))
    if np.iscomplexobj(probe) and np.any(np.abs(np.imag(probe)) > 0):
        raise ValueError(f"potential {q} is not real-valued on (0, 1)")
    if np.any(np.isnan(probe)):
        raise ValueError(f"potential {q} is not real-valued on (0, 1)")
    norms, verdicts = {}, {}
    for p in SAMPLED_P:
        norm, verdict = lp_norm_estimate(lambda x: q_tilde(q, l, x), p)
        norms[p] = norm
        verdicts[p] = verdict
    finite = [p for p in SAMPLED_P if verdicts[p] == "finite"]
    witness = max(finite) if finite else None
    return Admissibility(q_tilde_norms=norms, admissible=bool(finite), witness_p=witness, verdicts=verdicts)
