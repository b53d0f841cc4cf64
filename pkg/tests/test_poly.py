from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherentpairs.poly import (
    FALLING,
    MONOMIAL,
    STIRLING,
    Polynomial,
    convert_basis,
    delta,
    difference,
    expand_in_basis,
    falling_factorial,
    ff_basis,
    nabla,
    shift,
    shifted_ff_expand,
)

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def polys(max_degree=8, basis=MONOMIAL):
    return st.lists(small, max_size=max_degree + 1).map(lambda cs: Polynomial(cs, basis))


def test_ff_basis_examples():
    assert ff_basis(0) == Polynomial([1])
    assert ff_basis(3)(5) == 60
    assert ff_basis(2).to(MONOMIAL).coeffs == (0, -1, 1)
    with pytest.raises(ValueError):
        ff_basis(-1)


def test_difference_examples():
    assert delta(ff_basis(3)) == 3 * ff_basis(2)
    assert delta(Polynomial([7])).is_zero()
    assert nabla(Polynomial([0, 0, 1])) == Polynomial([-1, 2])
    with pytest.raises(ValueError):
        difference(Polynomial([1]), "sideways")


def test_convert_basis_examples():
    assert Polynomial([0, 0, 1]).to(FALLING).coeffs == (0, 1, 1)
    assert ff_basis(3).to(MONOMIAL).coeffs == (0, 2, -3, 1)


def test_shifted_ff_expand_examples():
    assert shifted_ff_expand(0) == Polynomial([1])
    assert shifted_ff_expand(2).coeffs == (2, -2, 1)
    assert shifted_ff_expand(2)(3) == falling_factorial(2, 2) == 2


def test_stirling_tables():
    for n in range(12):
        assert STIRLING.second(n)[n] == 1
        assert STIRLING.second(n)[0] == (1 if n == 0 else 0)
        # signed first kind: coefficients of phi_n, so they sum to phi_n(1)
        assert sum(STIRLING.first(n)) == falling_factorial(1, n)


@pytest.mark.parametrize("n", range(21))
def test_shift_lemma_matches_direct_shift(n):
    direct = Polynomial([1])
    for k in range(n):
        direct = direct * Polynomial([-1 - k, 1])
    assert shifted_ff_expand(n) == direct


def test_recurrence_x_phi():
    x = Polynomial.x(FALLING)
    for n in range(31):
        assert x * ff_basis(n) == ff_basis(n + 1) + n * ff_basis(n)
        assert ff_basis(n).mul_x() == ff_basis(n + 1) + n * ff_basis(n)


def test_expand_in_basis_rejects_short_basis():
    with pytest.raises(ValueError):
        expand_in_basis(ff_basis(3), [ff_basis(0), ff_basis(1)])


@given(polys())
def test_round_trip_is_identity(p):
    assert convert_basis(convert_basis(p, FALLING), MONOMIAL).coeffs == p.coeffs


@given(polys(), st.integers(min_value=-5, max_value=15))
def test_conversion_preserves_values(p, x):
    assert p.to(FALLING)(x) == p(x)


@given(polys(), st.integers(min_value=-10, max_value=10))
def test_differences_pointwise(p, x):
    assert delta(p)(x) == p(x + 1) - p(x)
    assert nabla(p)(x) == p(x) - p(x - 1)
    assert shift(p, 1)(x) == p(x + 1)
    assert shift(p, -1)(x) == p(x - 1)


@given(polys(6))
def test_difference_drops_degree(p):
    if p.degree >= 1:
        assert delta(p).degree == p.degree - 1
        assert nabla(p).degree == p.degree - 1


@given(polys(6), polys(6))
def test_product_rules(f, g):
    df, dg = delta(f), delta(g)
    assert delta(f * g) == g * df + f * dg + df * dg
    nf, ng = nabla(f), nabla(g)
    assert nabla(f * g) == g * nf + f * ng - nf * ng


@given(polys(5), polys(5), st.integers(min_value=0, max_value=20), st.integers(min_value=0, max_value=20))
def test_summation_by_parts(f, g, a, b):
    a, b = min(a, b), max(a, b)
    lhs = sum((f(x) * delta(g)(x) for x in range(a, b + 1)), Fraction(0))
    boundary = f(b) * g(b + 1) - f(a - 1) * g(a)
    rhs = boundary - sum((g(x) * nabla(f)(x) for x in range(a, b + 1)), Fraction(0))
    assert lhs == rhs


@given(polys(5), polys(5), st.integers(min_value=-6, max_value=12))
def test_falling_product_matches_monomial_product(f, g, x):
    assert (f.to(FALLING) * g.to(FALLING))(x) == (f * g)(x)


@given(polys(6))
def test_expand_in_falling_basis(p):
    basis = [ff_basis(k) for k in range(max(p.degree, 0) + 1)]
    coeffs = expand_in_basis(p, basis)
    assert Polynomial(coeffs, FALLING) == p
