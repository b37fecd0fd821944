import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nentire.potential import (
    BinOp,
    Call,
    Neg,
    Num,
    ParseError,
    Var,
    as_potential,
    check_admissibility,
    lp_norm_estimate,
    parse_potential,
    q_tilde,
)


def test_zero_and_constant():
    assert parse_potential("0").is_zero
    q = parse_potential("3.5")
    assert q.constant == 3.5 and q(0.3) == 3.5
    assert np.all(q(np.linspace(0.1, 1, 5)) == 3.5)
    assert as_potential(-2).constant == -2.0


def test_example_expression():
    q = parse_potential("x^(-0.5) + sin(x)")
    assert q(0.25) == pytest.approx(2 + math.sin(0.25), rel=1e-15)


@pytest.mark.parametrize(
    "text, x, expected",
    [
        ("2^3^2", 0.0, 512.0),
        ("-x^2", 3.0, -9.0),
        ("(-x)^2", 3.0, 9.0),
        ("1 - 2 - 3", 0.0, -4.0),
        ("8 / 4 / 2", 0.0, 1.0),
        ("2 * x ** 2", 3.0, 18.0),
        ("exp(log(x))", 0.7, 0.7),
        ("pi * cos(0)", 0.0, math.pi),
        ("x*(1-log(x))", 0.5, 0.5 * (1 - math.log(0.5))),
        ("1e-3 + .5", 0.0, 0.501),
    ],
)
def test_precedence(text, x, expected):
    assert parse_potential(text)(x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "text, pos",
    [("1 +", 3), ("sin(x", 5), ("foo(x)", 0), ("x $ 2", 2), ("(x))", 3), ("sin()", 4), ("sin(x, 2)", 5)],
)
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as info:
        parse_potential(text)
    assert info.value.position == pos


def test_empty_rejected():
    with pytest.raises(ParseError):
        parse_potential("   ")


_leaves = st.one_of(st.floats(0.1, 100.0, allow_nan=False).map(Num), st.just(Var()))


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
        st.builds(Call, st.sampled_from(["log", "exp", "sin", "cos"]), children),
    )


@given(st.recursive(_leaves, _extend, max_leaves=12))
def test_round_trip(tree):
    assert parse_potential(str(tree)).expression == tree


CORPUS = [
    "0", "1", "5", "x", "-x", "x^2", "x^(-0.5)", "x^(-1.5)", "sin(x)", "cos(pi*x)",
    "exp(-x)", "log(x)", "x*log(x)", "1/(1+x)", "2^-x", "-3+x", "x^(-0.25)*cos(x)",
    "x - x^2 + x^3", "(x+1)*(x-1)", "exp(sin(x))", "1/log(2/x)", "x**0.5", "-(x)", "--x",
    "3.25e1*x", "x/2/3", "sin(x)^2 + cos(x)^2", "pi", "x^(1/3)", "(1-x)^2",
    "log(1+x)", "x^(-0.3)", "exp(-x^2)", "x*exp(x)", "2*pi*x", "-x^(-0.5)",
    "1 - 1/(1+x^2)", "cos(2*x)*sin(3*x)", "x^x", "log(exp(x))", "x^(-1)*sin(x)",
    "(x)", "((x))", "0.5*(x+1)", "7", "x^(0.75)+1", "sin(log(x))", "x*(1-log(x))",
    "exp(1)", "1/(x+0.1)",
]


def test_round_trip_corpus():
    assert len(CORPUS) == 50
    for text in CORPUS:
        tree = parse_potential(text).expression
        assert parse_potential(str(tree)).expression == tree, text


def test_q_tilde_examples():
    assert q_tilde(1, 0, 0.5) == pytest.approx(0.5)
    assert q_tilde(1, -0.5, 0.5) == pytest.approx(0.5 * (1 - math.log(0.5)))
    assert q_tilde(1, -0.5, 0.5) == pytest.approx(0.8465735903, rel=1e-9)
    assert q_tilde("x^(-0.5)", 0, 0.25) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "a, p", [(a, p) for a in (-0.3, -0.1, 0.0, 0.5, 2.0) for p in (2.5, 3.0, 4.0) if a > -1 / p]
)
def test_lp_norm_of_power(a, p):
    norm, verdict = lp_norm_estimate(lambda x: x**a, p)
    assert verdict == "finite"
    assert norm == pytest.approx((a * p + 1) ** (-1 / p), rel=1e-6)


def test_lp_divergent_and_sup():
    assert lp_norm_estimate(lambda x: x**-0.5, 3.0)[1] == "divergent"
    assert lp_norm_estimate(lambda x: x**-0.1, math.inf)[1] == "divergent"
    norm, verdict = lp_norm_estimate(lambda x: np.sqrt(x), math.inf)
    assert verdict == "finite" and norm <= 1.0


def test_admissibility_examples():
    a = check_admissibility("1", 0)
    assert a.admissible and a.witness_p == math.inf
    assert not check_admissibility("x^(-1.5)", 0).admissible
    assert check_admissibility("x^(-0.5)", 0).admissible
    assert check_admissibility("x", 3).admissible


def test_admissibility_rejects_non_real():
    with pytest.raises(ValueError):
        check_admissibility("log(x - 2)", 0)


@given(st.floats(-0.45, 1.0))
def test_admissibility_nested(a):
    # finite at a larger p implies finite at every smaller sampled p
    verdicts = check_admissibility(f"x^({a!r})", 0.0).verdicts
    ps = [2.5, 3.0, 4.0, math.inf]
    for i, p in enumerate(ps):
        if verdicts[p] == "finite":
            assert all(verdicts[r] == "finite" for r in ps[:i])
