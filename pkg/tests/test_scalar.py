from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherentpairs.errors import ConvergenceError, ModeError, ResourceError
from coherentpairs.scalar import (
    Ball,
    as_rational,
    format_scalar,
    mode_of,
    nonzero_status,
    sum_series,
    worst_status,
    zero_status,
)

rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
nonzero = rationals.filter(lambda q: q != 0)

# partial sum of 1/(k!)^2 over 40 terms, evaluated once in exact arithmetic
BESSEL_I0_2 = Fraction("2.2795853023360672674372044408115333532858411027855")


def test_geometric_series_to_128_bits():
    s = sum_series(lambda k: Fraction(1, 2**k), Fraction(1, 2), onset=0, target_bits=128)
    assert s.contains(2)
    assert Fraction(*s.rad.as_integer_ratio()) <= Fraction(1, 2**128)


def test_hypergeometric_0f1_matches_partial_sum():
    s = sum_series(lambda k: Fraction(1, factorial(k) ** 2), Fraction(1, 4), onset=1, target_bits=128)
    rad = Fraction(*s.rad.as_integer_ratio())
    # the frozen decimal is itself good to 1e-49
    assert abs(Fraction(*s.mid.as_integer_ratio()) - BESSEL_I0_2) <= rad + Fraction(1, 10**49)
    assert rad <= Fraction(1, 2**128) * 3


def test_single_nonzero_term_is_exact():
    z = 0
    s = sum_series(lambda k: Fraction(z**k, factorial(k)), 0)
    assert s.contains(1) and s.rad == 0


def test_series_certificate_errors():
    with pytest.raises(ConvergenceError):
        sum_series(lambda k: 1, 1)
    with pytest.raises(ResourceError):
        sum_series(lambda k: Fraction(1, 2**k), Fraction(1, 2), onset=10**8)


def test_as_rational_parses_and_refuses_floats():
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(" -7 ") == -7
    with pytest.raises(ModeError):
        as_rational(0.5)
    with pytest.raises(ValueError):
        as_rational("1/0")


def test_mode_mixing_is_refused():
    assert mode_of([Fraction(1), 2]) == "exact"
    assert mode_of([Ball(1)]) == "approx"
    with pytest.raises(ModeError):
        mode_of([Fraction(1), Ball(1)])


def test_minimum_precision():
    with pytest.raises(ModeError):
        Ball(1, prec=32)


def test_statuses():
    assert zero_status(Fraction(0)) == "pass"
    assert zero_status(Fraction(1, 10**40)) == "fail"
    tol = Fraction(1, 2**90)
    assert zero_status(Ball(Fraction(1, 2**100)), tol) == "pass"
    assert zero_status(Ball(Fraction(1, 2**80)), tol) == "fail"
    assert zero_status(Ball(0, rad=Fraction(1, 2**89)), tol) == "inconclusive"
    assert nonzero_status(Ball(0, rad=Fraction(1, 10))) == "inconclusive"
    assert worst_status(["pass", "inconclusive", "pass"]) == "inconclusive"
    assert worst_status(["pass", "fail", "inconclusive"]) == "fail"


def test_format_scalar():
    assert format_scalar(Fraction(-3, 4)) == "-3/4"
    assert format_scalar(Fraction(5)) == "5"
    assert "+/-" in format_scalar(Ball(Fraction(1, 3)))


@given(rationals, rationals, nonzero)
def test_ball_arithmetic_encloses_exact_result(a, b, c):
    A, B, C = Ball(a), Ball(b), Ball(c)
    assert (A + B).contains(a + b)
    assert (A - B).contains(a - b)
    assert (A * B).contains(a * b)
    assert (A / C).contains(a / c)
    assert (-A).contains(-a)
    assert ((A * B - C) * (A + C) / C).contains((a * b - c) * (a + c) / c)


@given(rationals, st.integers(min_value=0, max_value=12))
def test_ball_power_encloses(a, k):
    assert (Ball(a) ** k).contains(a**k)


@given(st.lists(rationals, min_size=1, max_size=8), st.randoms())
def test_exact_sums_are_order_independent(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert sum(xs, Fraction(0)) == sum(ys, Fraction(0))


@given(rationals)
def test_negation_keeps_full_precision(a):
    # unary minus must not round through a 53-bit context
    b = Ball(a + Fraction(1, 3**60))
    assert (-b).contains(-(a + Fraction(1, 3**60)))
    assert (-b).rad == b.rad
