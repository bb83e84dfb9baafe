"""Parser and jet arithmetic for closed-form chart expressions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projgeo.expr import (DomainError, ParseError, UnknownFunction,
                          UnknownVariable, eval_jet, jet_partial, parse,
                          to_text)


def _value(text, n, p):
    return eval_jet(parse(text, n), p, order=1).value


def test_literals_and_precedence():
    p = np.zeros(1)
    assert _value("1 + 2*3", 1, p) == 7.0
    assert _value("2*3^2", 1, p) == 18.0
    assert _value("(1 + 2)*3", 1, p) == 9.0
    assert _value("4/2/2", 1, p) == 1.0
    assert _value("1 - 2 - 3", 1, p) == -4.0


def test_unary_minus_binds_looser_than_power():
    p = np.array([3.0])
    assert _value("-x1^2", 1, p) == -9.0
    assert _value("(-x1)^2", 1, p) == 9.0


def test_negative_integer_exponent():
    p = np.array([2.0])
    assert _value("x1^-2", 1, p) == 0.25


def test_variables_are_one_based():
    p = np.array([1.5, -0.5])
    assert _value("x1", 2, p) == 1.5
    assert _value("x2", 2, p) == -0.5
    with pytest.raises(UnknownVariable):
        parse("x3", 2)
    with pytest.raises(UnknownVariable):
        parse("x0", 2)


def test_unknown_function_rejected():
    with pytest.raises(UnknownFunction):
        parse("sinh(x1)", 1)


@pytest.mark.parametrize("bad", ["", "1 +", "x1 x2", "((x1)", "*x1", "2 ^ x1"])
def test_malformed_input_raises_parse_error(bad):
    with pytest.raises(ParseError):
        parse(bad, 2)


def test_domain_errors():
    e = parse("ln(x1)", 1)
    with pytest.raises(DomainError):
        eval_jet(e, np.array([-1.0]))
    with pytest.raises(DomainError):
        eval_jet(parse("sqrt(x1)", 1), np.array([-0.25]))
    with pytest.raises(DomainError):
        eval_jet(parse("1/x1", 1), np.array([0.0]))
    with pytest.raises(DomainError):
        eval_jet(parse("x1^-1", 1), np.array([0.0]))
    # non-integer exponent needs a positive base
    with pytest.raises(DomainError):
        eval_jet(parse("x1^0.5", 1), np.array([-2.0]))


def _fd_gradient(text, n, p, h=1e-6):
    e = parse(text, n)
    grad = np.empty(n)
    for i in range(n):
        lo, hi = p.copy(), p.copy()
        lo[i] -= h
        hi[i] += h
        grad[i] = (eval_jet(e, hi, order=1).value
                   - eval_jet(e, lo, order=1).value) / (2 * h)
    return grad


SAMPLE_EXPRS = [
    "x1*x2 - 3*x1 + 0.5",
    "sin(x1)*cos(x2) + exp(0.3*x1)",
    "sqrt(1 + x1^2 + x2^2)",
    "ln(2 + x1) / (1 + x2^2)",
    "(x1 - x2)^3 + x2^-2",
]


@pytest.mark.parametrize("text", SAMPLE_EXPRS)
def test_first_derivatives_match_finite_differences(text):
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = rng.uniform(0.2, 0.9, size=2)
        jet = eval_jet(parse(text, 2), p)
        assert np.allclose(jet.d1, _fd_gradient(text, 2, p), atol=1e-8)


@pytest.mark.parametrize("text", SAMPLE_EXPRS)
def test_higher_jets_differentiate_lower_ones(text):
    """d2 is the exact gradient of d1, and d3 of d2 (checked via FD in x1)."""
    h = 1e-5
    p = np.array([0.4, 0.7])
    e = parse(text, 2)
    hi = eval_jet(e, p + [h, 0], order=3)
    lo = eval_jet(e, p - [h, 0], order=3)
    mid = eval_jet(e, p, order=3)
    assert np.allclose((hi.d1 - lo.d1) / (2 * h), mid.d2[0], atol=1e-6)
    assert np.allclose((hi.d2 - lo.d2) / (2 * h), mid.d3[0], atol=2e-5,
                       rtol=1e-4)


def test_jets_are_symmetric_in_derivative_slots():
    e = parse("sin(x1*x2) * exp(x2 - x1^2)", 2)
    jet = eval_jet(e, np.array([0.3, -0.6]), order=3)
    assert np.allclose(jet.d2, jet.d2.T)
    for perm in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
        assert np.allclose(jet.d3, jet.d3.transpose(perm))


def test_jet_partial_shifts_the_jet():
    e = parse("x1^3 * x2 + cos(x2)", 2)
    jet = eval_jet(e, np.array([0.5, 1.1]), order=3)
    for i in range(2):
        sub = jet_partial(jet, i)
        assert sub.order == 2
        assert sub.value == jet.d1[i]
        assert np.array_equal(sub.d1, jet.d2[i])
        assert np.array_equal(sub.d2, jet.d3[i])


def test_round_trip_through_to_text():
    rng = np.random.default_rng(11)
    for text in SAMPLE_EXPRS:
        e = parse(text, 2)
        again = parse(to_text(e), 2)
        for _ in range(4):
            p = rng.uniform(0.3, 0.8, size=2)
            assert eval_jet(e, p).value == pytest.approx(
                eval_jet(again, p).value, abs=1e-15)


@given(st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4),
       st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
@settings(max_examples=60, deadline=None)
def test_polynomial_jets_are_exact(coeffs, a, b):
    """Cubic polynomial jets agree with hand-computed derivatives."""
    c0, c1, c2, c3 = coeffs
    text = f"{c0} + {c1}*x1 + {c2}*x1*x2 + {c3}*x1^3"
    jet = eval_jet(parse(text, 2), np.array([a, b]), order=3)
    assert jet.value == pytest.approx(c0 + c1 * a + c2 * a * b + c3 * a**3,
                                      abs=1e-9)
    assert jet.d1[0] == pytest.approx(c1 + c2 * b + 3 * c3 * a**2, abs=1e-9)
    assert jet.d1[1] == pytest.approx(c2 * a, abs=1e-12)
    assert jet.d2[0, 1] == pytest.approx(c2, abs=1e-12)
    assert jet.d3[0, 0, 0] == pytest.approx(6 * c3, abs=1e-12)


@given(st.floats(0.1, 1.4))
@settings(max_examples=40, deadline=None)
def test_function_jets_match_closed_forms(x):
    jet = eval_jet(parse("ln(x1)", 1), np.array([x]), order=3)
    assert jet.d1[0] == pytest.approx(1 / x, rel=1e-12)
    assert jet.d2[0, 0] == pytest.approx(-1 / x**2, rel=1e-12)
    assert jet.d3[0, 0, 0] == pytest.approx(2 / x**3, rel=1e-12)
    jet = eval_jet(parse("sin(x1)", 1), np.array([x]), order=3)
    assert jet.d3[0, 0, 0] == pytest.approx(-math.cos(x), rel=1e-12)
