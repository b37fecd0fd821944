import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nentire.debranges import (
    envelope,
    hb_inequality_check,
    lemma_decay_check,
    ratio_test,
    transform_norm_ratio,
    upper_half_samples,
)
from nentire.perturbed import hb_function


def _e0_closed(z):
    r = cmath.sqrt(z)
    return cmath.sin(r) / r + 1j * cmath.cos(r)


@pytest.mark.parametrize("z", [1j, 2j, 1 + 1j])
def test_hb_examples(z):
    e0 = hb_function(0, "0")
    assert e0(z) == pytest.approx(_e0_closed(z), rel=1e-13)
    assert abs(_e0_closed(z)) > abs(_e0_closed(z.conjugate()))
    assert hb_inequality_check(e0, [z]).passed


def test_hb_rejects_real_samples():
    with pytest.raises(ValueError):
        hb_inequality_check(hb_function(0, "0"), [1.0 + 0j])


def test_hb_reports_witness():
    class Flipped:
        def __call__(self, z):
            return np.conj(hb_function(0, "0")(np.conj(z)))

    rep = hb_inequality_check(Flipped(), [2j, 3 + 1j])
    assert not rep.passed and rep.witness == 2j


@pytest.mark.parametrize("l, q", [(-0.5, "0"), (0, "5"), (1, "x")])
def test_hb_margin_positive(l, q):
    rep = hb_inequality_check(hb_function(l, q), upper_half_samples(200, seed=1))
    assert rep.passed and rep.margin > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 300), st.floats(1e-2, 50))
def test_hb_property_free(re, im):
    assert hb_inequality_check(hb_function(0.5, "0"), [complex(re, im)]).passed


def test_upper_half_samples_deterministic():
    a, b = upper_half_samples(50, seed=3), upper_half_samples(50, seed=3)
    assert np.array_equal(a, b) and np.all(a.imag > 0)


def test_ratio_free_is_one():
    rep = ratio_test(0, "0", np.linspace(10, 60, 101), np.linspace(10, 60, 11))
    kept = rep.ratios[np.isfinite(rep.ratios)]
    assert np.all(kept == 1.0) and np.all(rep.negative_ratios == 1.0)
    assert rep.passed


def test_ratio_shift_positive_axis_and_limit():
    rep = ratio_test(0, "5", np.linspace(10, 200, 400), np.linspace(10, 400, 79))
    assert rep.liminf_estimate > 0.1
    assert rep.negative_axis_limit == pytest.approx(1.0, abs=1e-3)
    # at finite w the negative-axis ratio is close to exp(c / (2 w)) for q = c
    w = rep.negative_grid
    np.testing.assert_allclose(rep.negative_ratios[w >= 100], np.exp(2.5 / w[w >= 100]), rtol=1e-3)


def test_ratio_skips_zeros_of_e0():
    # a grid point on a zero of e0 = sin(w)/w + i cos(w) cannot exist for real w,
    # so nothing is skipped in the free l = 0 case
    assert ratio_test(0, "0", np.linspace(10, 40, 50), np.linspace(10, 40, 5)).skipped == []


def test_envelope_shapes():
    w = np.array([10.0, 100.0])
    np.testing.assert_allclose(envelope(0, math.inf, w), w**-2.0 * np.log(w))
    np.testing.assert_allclose(envelope(0, 4.0, w), w ** -(1 + 0.75))


def test_lemma_zero_potential():
    rep = lemma_decay_check(0, "0", math.inf, np.linspace(10, 50, 9))
    assert np.all(rep.norms == 0.0) and rep.stable


def test_lemma_constant_potential():
    rep = lemma_decay_check(0, "1", math.inf, np.geomspace(10, 200, 24))
    assert rep.stable and rep.dominated
    assert math.isfinite(rep.fitted_c) and rep.fitted_c > 0


def test_lemma_singular_potential():
    rep = lemma_decay_check(0, "x^(-0.5)", 4.0, np.geomspace(10, 200, 16))
    assert rep.dominated and np.all(np.isfinite(rep.constants))
    # measured decay is at least as fast as the envelope exponent -(l + 1 + 3/4)
    slope = np.polyfit(np.log(rep.grid[8:]), np.log(rep.norms[8:]), 1)[0]
    assert slope <= -1.75 + 0.1


def test_lemma_rejects_wrong_space():
    with pytest.raises(ValueError):
        lemma_decay_check(0, "x^(-1.2)", math.inf, np.geomspace(10, 100, 4))


@pytest.mark.slow
def test_transform_ratio_constant():
    phis = [
        lambda x: np.sin(np.pi * x),
        lambda x: np.sin(2 * np.pi * x),
        lambda x: np.ones_like(x),
    ]
    rep = transform_norm_ratio(0, "0", phis)
    assert rep.tail_converged
    assert rep.spread <= 0.01
    assert np.all(rep.ratios > 0)
