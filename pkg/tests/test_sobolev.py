from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherentpairs.coherence import build_case
from coherentpairs.errors import DegenerateFunctional
from coherentpairs.poly import MONOMIAL, Polynomial
from coherentpairs.sobolev import (
    build_sobolev,
    collapse_status,
    connection_check,
    initial_condition_status,
    orthogonality_status,
    sobolev_gram,
    sobolev_inner,
)

F = Fraction
X = Polynomial.x()


@pytest.fixture(scope="module")
def iia():
    return build_case("IIa", dict(z=F(1, 2), omega=F(3, 2)), nmax=10)


@pytest.fixture(scope="module")
def iia_unit():
    return build_case("IIa", dict(z=1, omega=2), nmax=6)


def test_inner_product_basics(iia):
    one = Polynomial([1])
    assert sobolev_inner(one, one, iia, F(1, 2)) == iia.L0.mu0
    f, g = X * X + 1, X - 3
    assert sobolev_inner(f, g, iia, 2) == sobolev_inner(g, f, iia, 2)
    assert sobolev_inner(f, g, iia, 0) == iia.L0.apply(f * g)
    # Delta(x^2 + 1) = 2x + 1, Delta(x - 3) = 1
    assert sobolev_inner(f, g, iia, 2) == iia.L0.apply(f * g) + 2 * iia.L1.apply(2 * X + 1)


def test_first_polynomial_and_collapse(iia):
    sys = build_sobolev(iia, F(1, 2), 6)
    assert sys.S[1] == iia.mops0.P(1)
    assert initial_condition_status(sys) == "pass"
    flat = build_sobolev(iia, 0, 6)
    assert collapse_status(flat) == "pass"
    assert all(g == 0 for g in flat.gamma)


def test_frozen_sobolev_polynomials(iia_unit):
    # independent dense Gram-Schmidt over monomials, exact arithmetic
    sys = build_sobolev(iia_unit, F(1, 2), 3)
    assert sys.S[2].to(MONOMIAL) == X * X - F(17, 5) * X + F(7, 5)
    assert sys.S[3].to(MONOMIAL) == X**3 - F(53, 8) * X * X + F(81, 8) * X - F(15, 8)


@pytest.mark.parametrize("lam", [0, F(1, 2), 2])
def test_connection_lines_iia(iia, lam):
    sys = build_sobolev(iia, lam, 8)
    assert orthogonality_status(sys) == "pass"
    for n in range(1, 9):
        row = connection_check(sys, n)
        assert row["line1"].is_zero() and row["line2"].is_zero()


def test_connection_lines_case_i():
    pair = build_case("I", dict(b=F(3, 2), z=F(3, 4)), nmax=10)
    sys = build_sobolev(pair, F(1, 2), 8)
    assert orthogonality_status(sys) == "pass"
    for n in range(1, 9):
        row = connection_check(sys, n)
        assert row["line1_status"] == row["line2_status"] == "pass"


def test_wrong_gamma_breaks_first_line(iia):
    sys = build_sobolev(iia, 1, 4)
    sys.gamma[2] += 1
    assert connection_check(sys, 2)["line1_status"] == "fail"


def test_singular_gram_raises(iia):
    # <S_1, S_1> = h_1 + lam L1[1] vanishes for this negative lam
    lam = -iia.mops0.h(1) / iia.L1.mu0
    with pytest.raises(DegenerateFunctional, match="order 1"):
        build_sobolev(iia, lam, 3)


def _leading_minors(G):
    out = []
    for k in range(1, len(G) + 1):
        M = [row[:k] for row in G[:k]]
        det = F(1)
        for i in range(k):
            p = next(r for r in range(i, k) if M[r][i] != 0)
            if p != i:
                M[i], M[p] = M[p], M[i]
                det = -det
            det *= M[i][i]
            for r in range(i + 1, k):
                f = M[r][i] / M[i][i]
                M[r] = [a - f * b for a, b in zip(M[r], M[i])]
        out.append(det)
    return out


@settings(max_examples=15)
@given(st.fractions(min_value=0, max_value=5, max_denominator=7))
def test_gram_is_symmetric_positive_definite(lam):
    # both weights are positive on the support, so lam >= 0 gives a positive definite form
    pair = build_case("IIa", dict(z=F(1, 2), omega=F(3, 2)), nmax=8)
    G = sobolev_gram(pair, lam, 6)
    assert all(G[i][j] == G[j][i] for i in range(6) for j in range(6))
    assert all(d > 0 for d in _leading_minors(G))
    sys = build_sobolev(pair, lam, 4)
    assert all(h > 0 for h in sys.norms)
