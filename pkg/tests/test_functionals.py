from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherentpairs.errors import DegenerateFunctional, ModeError
from coherentpairs.functionals import (
    christoffel,
    direct_moment,
    dual_path_moments,
    ff_moments,
    from_family,
    hankel_determinants,
    quasidefinite_profile,
    recurrence_moments,
    series_certificate,
)
from coherentpairs.mops import build_mops
from coherentpairs.poly import FALLING, Polynomial, delta, ff_basis
from coherentpairs.scalar import Ball, nonzero_status, zero_status
from coherentpairs.weights import make_family, pearson_data

F = Fraction
X = Polynomial.x()
TOL = F(1, 2**90)


def poch(a, n):
    out = F(1)
    for k in range(n):
        out *= a + k
    return out


def test_charlier_normalized_moments_are_powers():
    z = F(5, 3)
    L = from_family(make_family("charlier", z=z))
    assert ff_moments(L, 10) == [z**n for n in range(11)]


def test_charlier_approx_moments_enclose_powers():
    z = F(1, 2)
    L = from_family(make_family("charlier", z=z), mode="approx")
    nu = L.moments(10)
    for n in range(11):
        assert (nu[n] / nu[0]).contains(z**n)


def test_meixner_moments_closed_form():
    # sum phi_n(x) (a)_x z^x / x! = (a)_n z^n (1 - z)^(-a-n)
    a, z = F(3, 2), F(1, 3)
    L = from_family(make_family("meixner", a=a, z=z))
    assert ff_moments(L, 12) == [poch(a, n) * (z / (1 - z)) ** n for n in range(13)]


def test_kravchuk_small_moments():
    L = from_family(make_family("kravchuk", N=2, z=-1))
    assert L.moments(2) == [4, 4, 2]
    assert L.support_size() == 3


def test_apply_examples():
    L = from_family(make_family("kravchuk", N=2, z=-1))
    assert L.apply(Polynomial([1])) == L.mu0
    assert L.apply(ff_basis(2) + ff_basis(1)) == L.moment(2) + L.moment(1)
    C = from_family(make_family("charlier", z=1))
    assert C.apply(X) / C.apply(Polynomial([1])) == 1


def test_christoffel_examples():
    L = from_family(make_family("charlier", z=1))
    assert christoffel(L, Polynomial([1])).moments(8) == L.moments(8)
    omega = F(2)
    L1 = christoffel(L, X + omega)
    nu, mu = L.moments(9), L1.moments(8)
    assert mu == [nu[n + 1] + (n + omega) * nu[n] for n in range(9)]
    assert mu[0] / nu[0] == 3


def test_christoffel_with_zero_mass_rejected():
    L = from_family(make_family("kravchuk", N=2, z=-1))
    # nu_0 = nu_1 = 4, so L[x - 1] = 0
    with pytest.raises(DegenerateFunctional):
        christoffel(L, X - 1)


def test_exact_mode_refused_for_transcendental_ratios():
    with pytest.raises(ModeError):
        from_family(make_family("gen-charlier", b=F(1, 2), z=F(3, 4)))


def test_gen_charlier_dual_paths_agree():
    fam = make_family("gen-charlier", b=F(1, 2), z=F(3, 4))
    direct, rec = dual_path_moments(fam, 12)
    for a, b in zip(direct, rec):
        assert zero_status(a - b, TOL) == "pass"


def test_recurrence_needs_right_seed_count():
    fam = make_family("gen-meixner", a=F(3, 2), b=F(1, 2), z=F(3, 4))
    with pytest.raises(ValueError):
        recurrence_moments(fam, 5, [F(1)])


def test_series_certificate_bounds_ratio():
    fam = make_family("gen-meixner", a=F(3, 2), b=F(1, 2), z=F(3, 4))
    term = fam.hyper()
    for n in (0, 3, 7):
        r, X0 = series_certificate(term, n)
        assert r < 1
        # check the claimed bound on a stretch of actual ratios
        for x in range(X0, X0 + 200):
            t0 = term.ratio(x + 1) * F(x + 1) / (x + 1 - n) if x + 1 - n else 0
            assert abs(t0) <= r


def test_direct_moment_of_charlier_matches_exponential_series():
    # nu_0 of Charlier z=1 is e
    e = F("2.71828182845904523536028747135266249775724709369995")
    m = direct_moment(make_family("charlier", z=1), 0)
    assert abs(F(*m.mid.as_integer_ratio()) - e) <= F(*m.rad.as_integer_ratio()) + F(1, 10**49)


def test_charlier_hankel_determinants():
    L = from_family(make_family("charlier", z=2))
    prof = quasidefinite_profile(L, 10)
    assert prof.dets[:4] == [1, 2, 16, 768]
    expected, acc = [], F(1)
    for k in range(11):
        acc *= F(2) ** k * poch(1, k)
        expected.append(acc)
    assert prof.dets == expected
    assert prof.quasidefinite and prof.first_zero is None


def test_kravchuk_profile_is_rank_limited():
    prof = quasidefinite_profile(from_family(make_family("kravchuk", N=3, z=-1)), 5)
    assert prof.statuses[:4] == ["pass"] * 4
    assert prof.first_zero == 4


def test_hankel_determinants_after_zero_pivot():
    # D_0 = 0 but D_1 = -1
    assert hankel_determinants([F(0), F(1), F(0)], 1) == [0, -1]


def test_approx_determinant_can_be_undecided():
    # D_1 = m0 m2 - m1^2 straddles zero
    eps = F(1, 10**3)
    dets = hankel_determinants([Ball(1), Ball(1, rad=eps), Ball(1, rad=eps)], 1)
    assert nonzero_status(dets[0]) == "pass"
    assert nonzero_status(dets[1]) == "inconclusive"


PEARSON_EXACT = [
    ("charlier", dict(z=F(3, 2))),
    ("meixner", dict(a=F(5, 2), z=F(1, 2))),
    ("kravchuk", dict(N=20, z=F(-1, 2))),
    ("hahn", dict(N=20, a=F(3, 2), b=F(1, 3))),
    ("gen-kravchuk", dict(N=20, a=F(1, 2), z=-1)),
    ("gen-hahn-2", dict(N=20, a1=F(1, 2), a2=F(3, 2), b1=F(1, 3), b2=2)),
]


@pytest.mark.parametrize("tag,params", PEARSON_EXACT)
def test_pearson_duality_exact(tag, params):
    fam = make_family(tag, params)
    L = from_family(fam)
    pair = pearson_data(fam)
    phi = pair.phi.to(FALLING)
    for k in range(16):
        p = ff_basis(k)
        assert L.apply(phi * delta(p)) == L.apply(pair.psi * p)


@pytest.mark.parametrize(
    "tag,params",
    [("gen-charlier", dict(b=F(1, 2), z=F(3, 4))), ("gen-meixner", dict(a=F(3, 2), b=F(1, 2), z=F(3, 4)))],
)
def test_pearson_duality_approx(tag, params):
    fam = make_family(tag, params)
    L = from_family(fam, mode="approx")
    pair = pearson_data(fam)
    for k in range(16):
        p = ff_basis(k)
        r = L.apply(pair.phi * delta(p)) - L.apply(pair.psi * p)
        assert zero_status(r, TOL) == "pass"


small = st.fractions(min_value=-9, max_value=9, max_denominator=7)


@given(st.lists(small, max_size=11), st.lists(small, min_size=1, max_size=3))
def test_christoffel_consistency(cs, ms):
    L = from_family(make_family("meixner", a=F(3, 2), z=F(1, 3)))
    lam = Polynomial(ms + [1])
    p = Polynomial(cs)
    assert christoffel(L, lam).apply(p) == L.apply(lam * p)


@given(st.fractions(min_value=F(1, 9), max_value=9, max_denominator=9))
def test_normalization_covariance(c):
    L = from_family(make_family("hahn", N=12, a=F(3, 2), b=F(1, 3)))
    scaled = christoffel(L, Polynomial([c]))
    assert ff_moments(scaled, 10) == ff_moments(L, 10)
    a, b = build_mops(L, 6), build_mops(scaled, 6)
    assert a.polys == b.polys and a.alpha == b.alpha
    assert [h * c for h in a.norms] == b.norms
