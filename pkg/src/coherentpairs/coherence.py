"""Coherent pairs of the second kind: construction, verification and classification.

A pair ``(L0, L1)`` is coherent of the second kind when

    Delta P^{(0)}_{n+1} / (n+1) = P^{(1)}_n - tau_n P^{(1)}_{n-1},  tau_n != 0.

Every pair here is built from a catalog functional ``L0`` and ``q = x + omega``
(or ``q = 1``) through

    Lambda2 = (q - nabla q) psi0 - phi0 nabla q,   Lambda3 = q phi0,
    L1 = Lambda3 L0,

and then checked against independently computed MOPs.

Sign convention.  ``Lambda2`` above is the *Pearson* polynomial of
``Lambda3 L0``: ``nabla(Lambda3 rho0) + Lambda2 rho0 = 0``.  With the adjoint
``(Delta* L)[p] = -L[Delta p]`` this reads ``Delta*(L1) = -Lambda2 L0``, so the
polynomial entering the functional relation and ``tau_n`` is ``-Lambda2``
(exposed as :attr:`CoherentPairCase.lambda2_functional`).
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

from .errors import ConsistencyError, DegenerateFunctional, InvalidParameter, ModeError
from .functionals import christoffel, from_family
from .mops import build_mops
from .poly import FALLING, MONOMIAL, Polynomial, delta, expand_in_basis, ff_basis, nabla
from .scalar import DEFAULT_PREC, as_rational, is_exact, nonzero_status, worst_status, zero_status
from .weights import FAMILIES, HyperTerm, hyper_term, make_family, pearson_data, rho_values

X = Polynomial.x()

# case -> (base family of L0, companion tag listed in the classification table)
CASES = {
    "I": ("gen-charlier", "gen-charlier"),
    "IIa": ("charlier", "gen-meixner"),
    "IIb": ("kravchuk", "gen-kravchuk"),
    "III": ("meixner", "gen-hahn-1"),
    "IV": ("hahn", "gen-hahn-2"),
}

TOL = Fraction(1, 2**90)


def canonical_case(tag):
    key = str(tag).strip().upper().replace("CASE", "").strip()
    for name in CASES:
        if name.upper() == key:
            return name
    raise InvalidParameter(f"unknown case {tag!r}; expected one of {', '.join(CASES)}")


def stated_mapping(case, p, omega):
    """Companion parameters exactly as stated alongside each case of the classification.

    Entries whose target slot does not exist in the companion family are
    returned under their own key so the mismatch stays visible.
    """
    if case == "I":
        return dict(b=p["b"], z=p["z"])
    if case == "IIa":
        return dict(a=omega, b=omega - 1, z=p["z"])
    if case == "IIb":
        return dict(N=p["N"], a=omega, b=omega - 1, z=p["z"])
    if case == "III":
        return dict(a1=p["a"], a2=omega, b=omega - 1, z=p["z"])
    return dict(N=p["N"], a1=p["a"], a2=omega, b1=p["b"], b2=omega - 1)


def shifted_mapping(case, p, omega):
    """Companion family and parameters of ``Lambda3 * rho0`` as found by the weight-ratio oracle.

    Every factor ``x + omega`` of ``Lambda3`` raises the matching upper
    parameter by one relative to the stated mapping.  In case IIb the factor
    ``x - N`` also drops the upper ``-N`` by one, which leaves a terminating
    generalized Hahn term of type I rather than a generalized Kravchuk one.
    """
    if case == "I":
        return "gen-charlier", dict(b=p["b"], z=p["z"])
    if case == "IIa":
        return "gen-meixner", dict(a=omega + 1, b=omega - 1, z=p["z"])
    if case == "IIb":
        return "gen-hahn-1", dict(a1=1 - p["N"], a2=omega + 1, b=omega - 1, z=p["z"])
    if case == "III":
        return "gen-hahn-1", dict(a1=p["a"] + 1, a2=omega + 1, b=omega - 1, z=p["z"])
    return "gen-hahn-2", dict(N=p["N"] - 1, a1=p["a"] + 1, a2=omega + 1, b1=p["b"], b2=omega - 1)


def displayed_lambda2(case, p, omega):
    """The quadratic ``Lambda2`` as displayed for each case (Pearson sign)."""
    z = p.get("z")
    if case == "I":
        return X * Polynomial.linear_factor(p["b"]) / z - 1
    if case == "IV":
        N, a, b = p["N"], p["a"], p["b"]
        return Polynomial([N * a * omega, N * omega + N * a - a * omega + b * omega - b, N - a + b - 1])
    head = X * Polynomial.linear_factor(omega - 1) / z
    q = Polynomial.linear_factor(omega)
    if case == "IIa":
        return head - q
    if case == "IIb":
        return head - q * Polynomial.linear_factor(-p["N"])
    return head - q * Polynomial.linear_factor(p["a"])


def christoffel_lambdas(phi0, psi0, q):
    """``(Lambda2, Lambda3)`` from a Pearson pair of ``L0`` and a polynomial ``q``."""
    dq = nabla(q)
    return ((q - dq) * psi0 - phi0 * dq).to(MONOMIAL), (q * phi0).to(MONOMIAL)


def admissibility_n(lambda2_functional, lambda3):
    """First ``n >= 1`` with ``lambda2_2 + (n-1) lambda3_3 = 0``, or ``None``."""
    l2 = lambda2_functional.to(MONOMIAL).coeff(2)
    l3 = lambda3.to(MONOMIAL).coeff(3)
    if l3 == 0:
        return 1 if l2 == 0 else None
    n = 1 - Fraction(l2) / Fraction(l3)
    if n.denominator == 1 and n >= 1:
        return int(n)
    return None


@dataclass
class CoherentPairCase:
    case: str
    params: dict
    omega: Fraction
    base: object
    lambda2: Polynomial
    lambda3: Polynomial
    L0: object
    L1: object
    mops0: object
    mops1: object
    companion: str
    nmax: int
    notes: list = field(default_factory=list)

    @property
    def lambda2_functional(self):
        """``Lambda2`` with the sign that makes ``-L1[Delta p] = L0[Lambda2 p]``."""
        return -self.lambda2

    @property
    def mode(self):
        return self.L0.mode

    @property
    def tol(self):
        return None if self.mode == "exact" else TOL

    def describe(self):
        extra = "" if self.omega is None else f", omega={_fmt(self.omega)}"
        return f"case {self.case}: {self.base.describe()}{extra}"


def _fmt(v):
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def build_case(case_tag, params, nmax=12, mode=None, prec=DEFAULT_PREC):
    """Assemble ``(L0, L1)`` for one case, with MOPs ``P^(0)`` to ``nmax+1`` and ``P^(1)`` to ``nmax``.

    ``params`` holds the base-family parameters plus ``omega`` (cases II-IV).
    Case I defaults to approximate mode since its moments are transcendental.
    """
    case = canonical_case(case_tag)
    base_tag, companion = CASES[case]
    raw = dict(params)
    omega = raw.pop("omega", None)
    if case == "I":
        if omega is not None:
            raise InvalidParameter("case I takes no omega")
    else:
        if omega is None:
            raise InvalidParameter(f"case {case} needs omega")
        omega = as_rational(omega)
    if mode is None:
        mode = "approx" if case == "I" else "exact"
    if case == "I" and mode == "exact":
        raise ModeError("case I has transcendental moment ratios; use mode='approx'")
    family = make_family(base_tag, raw)
    p = family.p
    pair0 = pearson_data(family)
    q = Polynomial([1]) if case == "I" else Polynomial.linear_factor(omega)
    lam2, lam3 = christoffel_lambdas(pair0.phi, pair0.psi, q)
    shown = displayed_lambda2(case, p, omega)
    if lam2 != shown:
        raise ConsistencyError(f"case {case}: Lambda2 {lam2} differs from the displayed {shown}")
    if lam2.degree != 2:
        raise InvalidParameter(f"case {case}: Lambda2 must be quadratic, got degree {lam2.degree}")
    bad = admissibility_n(-lam2, lam3)
    if bad is not None:
        raise InvalidParameter(f"case {case}: admissibility fails at n={bad}")

    L0 = from_family(family, mode=mode, prec=prec)
    L1 = christoffel(L0, lam3)
    mops0 = build_mops(L0, nmax + 1)
    mops1 = build_mops(L1, nmax)
    for name, seq, need in (("L0", mops0, nmax + 1), ("L1", mops1, nmax)):
        if seq.truncated_at is not None and seq.truncated_at <= need:
            raise DegenerateFunctional(f"case {case}: {name} is not quasi-definite to order {need}")
    return CoherentPairCase(case, p, omega, family, lam2, lam3, L0, L1, mops0, mops1, companion, nmax)


# tau and the coherence relation -----------------------------------------


def tau(pair, n):
    """``tau_n = [l2 + (n-1) l3] / (n+1) * h^(0)_{n+1} / h^(1)_{n-1}`` (functional sign of Lambda2)."""
    if n < 1:
        raise InvalidParameter("tau_n is defined for n >= 1")
    l2 = pair.lambda2_functional.coeff(2)
    l3 = pair.lambda3.coeff(3)
    return (l2 + (n - 1) * l3) / (n + 1) * pair.mops0.h(n + 1) / pair.mops1.h(n - 1)


def q_poly(pair, n):
    return delta(pair.mops0.P(n + 1)) / (n + 1)


def tau_bruteforce(pair, n):
    """``(tau_n, lower)``: minus the ``P^(1)_{n-1}`` coefficient of ``Q_n``, and the coefficients below it."""
    coeffs = expand_in_basis(q_poly(pair, n), pair.mops1.polys[: n + 1])
    return -coeffs[n - 1], coeffs[: n - 1]


def coherence_residual(pair, n, taus=None):
    """``R_n = Q_n - P^(1)_n + tau_n P^(1)_{n-1}`` as a falling-factorial polynomial."""
    t = tau(pair, n) if n >= 1 else 0
    if taus is not None and n >= 1:
        t = taus[n]
    return q_poly(pair, n) - pair.mops1.P(n) + pair.mops1.P(n - 1) * t


def poly_status(p, tol):
    return worst_status(zero_status(c, tol) for c in p.to(FALLING).coeffs) if p.coeffs else "pass"


def coherence_report(pair, nmax=None):
    """Per-``n`` verdicts for the coherence relation and for ``tau_n`` against its brute-force value."""
    nmax = pair.nmax if nmax is None else nmax
    out = []
    for n in range(1, nmax + 1):
        t = tau(pair, n)
        bt, lower = tau_bruteforce(pair, n)
        res = coherence_residual(pair, n)
        out.append(
            dict(
                n=n,
                tau=t,
                tau_bruteforce=bt,
                residual=res,
                residual_status=poly_status(res, pair.tol),
                tau_nonzero=nonzero_status(t),
                tau_match=zero_status(t - bt, pair.tol),
                lower_status=worst_status(zero_status(c, pair.tol) for c in lower),
            )
        )
    return out


# reconstruction and functional relations ---------------------------------


def lambdas_from_mops(L0, L1, mops0, mops1):
    """Rebuild ``(Lambda2, Lambda3)`` from the two MOP families alone.

    ``Lambda2`` is the functional-sign polynomial (``Delta* L1 = Lambda2 L0``).
    For ``Lambda3`` the identity ``P Delta p = Delta((P - 1) p) - p`` (valid for
    monic linear ``P``) gives ``Lambda3 = R - Lambda2 (P^(1)_1 - 1)``, where
    ``R`` is the right-hand side of the dual identity at ``n = 1``.
    """
    def tau_of(n):
        coeffs = expand_in_basis(delta(mops0.P(n + 1)) / (n + 1), mops1.polys[: n + 1])
        return -coeffs[n - 1]

    t1, t2 = tau_of(1), tau_of(2)
    if nonzero_status(t1) == "fail":
        raise DegenerateFunctional("tau_1 = 0, so Lambda2 would not be quadratic")
    h0, h1 = mops0.h, mops1.h
    P0 = mops0.P
    lam2 = P0(2) * (2 * t1 * h1(0) / h0(2)) - P0(1) * (h1(0) / h0(1))
    rhs = P0(3) * (3 * t2 * h1(1) / h0(3)) - P0(2) * (2 * h1(1) / h0(2))
    lam3 = rhs - lam2 * (mops1.P(1) - 1)
    return lam2.to(MONOMIAL), lam3.to(MONOMIAL)


def functional_relation_check(pair, degmax=20, lambda2=None, lambda3=None):
    """Residuals of ``-L1[Delta phi_k] = L0[Lambda2 phi_k]`` and ``L1[phi_k] = L0[Lambda3 phi_k]``."""
    lam2 = pair.lambda2_functional if lambda2 is None else lambda2
    lam3 = pair.lambda3 if lambda3 is None else lambda3
    out = []
    for k in range(degmax + 1):
        f = ff_basis(k)
        r1 = -pair.L1.apply(delta(f)) - pair.L0.apply(lam2 * f)
        r2 = pair.L1.apply(f) - pair.L0.apply(lam3 * f)
        out.append(dict(k=k, delta_relation=r1, christoffel_relation=r2,
                        status=worst_status([zero_status(r1, pair.tol), zero_status(r2, pair.tol)])))
    return out


def _coeff_status(a, b, tol):
    a, b = a.to(MONOMIAL), b.to(MONOMIAL)
    n = max(len(a.coeffs), len(b.coeffs))
    return worst_status(zero_status(a.coeff(k) - b.coeff(k), tol) for k in range(n))


def reconstruction_check(pair):
    """Compare rebuilt ``Lambda``'s with the construction (``mu0`` of ``L1`` is ``L0[Lambda3]`` by design)."""
    lam2, lam3 = lambdas_from_mops(pair.L0, pair.L1, pair.mops0, pair.mops1)
    return dict(
        lambda2=lam2,
        lambda3=lam3,
        lambda2_status=_coeff_status(lam2, pair.lambda2_functional, pair.tol),
        lambda3_status=_coeff_status(lam3, pair.lambda3, pair.tol),
        relation_status=worst_status(
            r["status"] for r in functional_relation_check(pair, 15, lam2, lam3)
        ),
    )


def dual_identity_check(pair, n, test_degmax=None, random_tests=3, seed=0):
    """Apply both sides of ``Delta* v^(1)_n = tau_{n+1}(n+2) v^(0)_{n+2} - (n+1) v^(0)_{n+1}``.

    Test polynomials are ``P^(0)_k`` for ``k <= test_degmax`` (default ``n+3``)
    plus a few seeded random rational combinations of them.  Combinations in
    the ``P^(0)`` basis keep approximate-mode radii on the scale of the
    individual tests; monomial combinations would multiply them by the size of
    the high moments.
    """
    test_degmax = n + 3 if test_degmax is None else test_degmax
    m0, m1 = pair.mops0, pair.mops1
    t = tau(pair, n + 1)
    w1 = m1.P(n) / m1.h(n)
    a = m0.P(n + 2) * (t * (n + 2) / m0.h(n + 2))
    b = m0.P(n + 1) * ((n + 1) / m0.h(n + 1))

    def sides(p):
        lhs = -pair.L1.apply(w1 * delta(p))
        rhs = pair.L0.apply(a * p) - pair.L0.apply(b * p)
        return lhs, rhs

    rng = random.Random(seed)
    tests = [(f"P0_{k}", m0.P(k)) for k in range(test_degmax + 1)]
    for j in range(random_tests):
        deg = rng.randint(0, test_degmax)
        p = Polynomial((), FALLING)
        for k in range(deg + 1):
            p = p + m0.P(k) * Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        tests.append((f"random_{j}", p))
    out = []
    for label, p in tests:
        lhs, rhs = sides(p)
        out.append(dict(test=label, lhs=lhs, rhs=rhs, status=zero_status(lhs - rhs, pair.tol)))
    return out


# companion identification --------------------------------------------------


def _rational_roots(poly):
    """All rational roots of an exact polynomial, with multiplicity."""
    p = poly.to(MONOMIAL)
    roots = []
    while p.degree > 0:
        coeffs = [Fraction(c) for c in p.coeffs]
        if coeffs[0] == 0:
            roots.append(Fraction(0))
            p = Polynomial(coeffs[1:])
            continue
        scale = 1
        for c in coeffs:
            scale = scale * c.denominator // _gcd(scale, c.denominator)
        ints = [int(c * scale) for c in coeffs]
        found = None
        for num in _divisors(abs(ints[0])):
            for den in _divisors(abs(ints[-1])):
                for r in (Fraction(num, den), Fraction(-num, den)):
                    if p(r) == 0:
                        found = r
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        roots.append(found)
        p = _deflate(p, found)
    return roots


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0] if n else [1]


def _deflate(p, r):
    coeffs = list(p.coeffs)
    out = [Fraction(0)] * (len(coeffs) - 1)
    acc = Fraction(0)
    for k in range(len(coeffs) - 1, 0, -1):
        acc = acc * r + coeffs[k]
        out[k - 1] = acc
    return Polynomial(out)


def multiplied_term(term, multiplier):
    """Hypergeometric description of ``multiplier(x) * rho(x)`` for a product of linear factors.

    Each factor ``x + c`` turns into an upper parameter ``c + 1`` and a lower
    parameter ``c - 1``; matching pairs are then cancelled.
    """
    m = multiplier.to(MONOMIAL)
    roots = _rational_roots(m)
    if len(roots) != m.degree:
        raise InvalidParameter(f"multiplier {m} does not split into rational linear factors")
    upper, lower = list(term.upper), list(term.lower)
    for r in roots:
        upper.append(1 - r)
        lower.append(-r - 1)
    return HyperTerm(term.z, tuple(upper), tuple(lower)).canonical()


def ratio_matches(term, candidate):
    """Cross-multiplied comparison of the term ratios as rational functions of x."""
    n1, d1 = term.ratio_polys()
    n2, d2 = candidate.ratio_polys()
    return n1 * d2 == n2 * d1


_SLOTS = {
    "charlier": ((), ()),
    "meixner": (("a",), ()),
    "kravchuk": (("-N",), ()),
    "hahn": (("-N", "a"), ("b",)),
    "gen-charlier": ((), ("b",)),
    "gen-meixner": (("a",), ("b",)),
    "gen-kravchuk": (("-N", "a"), ()),
    "gen-hahn-1": (("a1", "a2"), ("b",)),
    "gen-hahn-2": (("-N", "a1", "a2"), ("b1", "b2")),
}


def fit_family(term, tag, prefer=None):
    """Parameters of ``tag`` whose weight has exactly the ratio of ``term``, or ``None``.

    Families without ``z`` need ``z = 1``; a ``-N`` slot needs a nonpositive
    integer.  Symmetric slots can admit several assignments; the one agreeing
    with ``prefer`` on the most slots wins (ties go to the first found).
    """
    ups, lows = _SLOTS[tag]
    if len(ups) != len(term.upper) or len(lows) != len(term.lower):
        return None
    has_z = "z" in FAMILIES[tag][1]
    if not has_z and term.z != 1:
        return None
    found = []
    for up in permutations(term.upper):
        params = {}
        ok = True
        for slot, v in zip(ups, up):
            if slot == "-N":
                if v.denominator != 1 or v > 0:
                    ok = False
                    break
                params["N"] = -v
            else:
                params[slot] = v
        if not ok:
            continue
        for low in permutations(term.lower):
            full = dict(params)
            full.update(zip(lows, low))
            if has_z:
                full["z"] = term.z
            if ratio_matches(term, hyper_term(tag, full)):
                fit = {k: full[k] for k in FAMILIES[tag][1]}
                if fit not in found:
                    found.append(fit)
    if not found:
        return None
    prefer = prefer or {}
    return max(found, key=lambda f: sum(prefer.get(k) == v for k, v in f.items()))


def identify_family(L1, candidates):
    """Check each candidate ``(label, tag, params)`` against the weight ratio of ``L1``.

    Also returns the derived hypergeometric term of ``L1`` and the Pearson pair
    read off from it.  A candidate whose parameters do not fit its family's
    slots is reported as not matching.
    """
    term = multiplied_term(L1.root.hyper(), L1.total_multiplier)
    results = []
    for label, tag, params in candidates:
        slots = set(FAMILIES[tag][1])
        if set(params) != slots:
            results.append(dict(label=label, tag=tag, params=params, match=False,
                                note=f"parameters {sorted(params)} do not fit {tag} slots {sorted(slots)}"))
            continue
        cand = hyper_term(tag, params)
        results.append(dict(label=label, tag=tag, params=params, match=ratio_matches(term, cand), note=""))
    phi, psi = term.pearson()
    return dict(term=term, pearson=(phi, psi), candidates=results)


def _weights_agree(L1, tag, params, xmax=30):
    # pointwise check of the fitted weight against Lambda3 * rho0, up to the value at 0
    lam = L1.total_multiplier
    fam = L1.root
    r0 = rho_values(fam, xmax)
    r1 = [lam(x) * r0[x] for x in range(xmax + 1)]
    cand = rho_values(hyper_term(tag, params), xmax)
    if r1[0] == 0:
        return False
    return all(r1[x] == r1[0] * cand[x] for x in range(xmax + 1))


def classify_case(pair):
    """One row of the classification table, with both the stated and the fitted companion mappings."""
    p, omega = pair.params, pair.omega
    stated = stated_mapping(pair.case, p, omega)
    shifted_tag, shifted = shifted_mapping(pair.case, p, omega)
    ident = identify_family(
        pair.L1, [("stated", pair.companion, stated), ("shifted", shifted_tag, shifted)]
    )
    stated_ok, shifted_ok = (c["match"] for c in ident["candidates"])
    term = ident["term"]
    # independent route: search the catalog for a slot assignment from the ratio alone
    fitted_tag, fitted = pair.companion, fit_family(term, pair.companion, prefer=stated)
    if fitted is None:
        for tag in FAMILIES:
            fitted = fit_family(term, tag, prefer=shifted if tag == shifted_tag else None)
            if fitted is not None:
                fitted_tag = tag
                break
    elif fitted_tag == shifted_tag:
        fitted = fit_family(term, fitted_tag, prefer=shifted)
    pointwise = fitted is not None and _weights_agree(pair.L1, fitted_tag, fitted)
    phi, psi = ident["pearson"]
    return dict(
        case=pair.case,
        L0=pair.base.tag,
        L1=pair.companion,
        stated_mapping=stated,
        stated_verified=stated_ok,
        shifted_family=shifted_tag,
        shifted_mapping=shifted,
        shifted_verified=shifted_ok,
        fitted_family=fitted_tag if fitted is not None else None,
        fitted_mapping=fitted,
        fitted_pointwise=pointwise,
        companion_phi=phi,
        companion_psi=psi,
    )


def load_fixture(path=None):
    """Parse ``key=value`` lines (``#`` comments allowed) into dicts of strings."""
    if path is None:
        from importlib import resources

        text = resources.files("coherentpairs").joinpath("fixtures/coherence_points.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        row = {}
        for item in line.split():
            if "=" not in item:
                raise InvalidParameter(f"fixture entry {item!r} is not key=value")
            k, v = item.split("=", 1)
            row[k] = v
        rows.append(row)
    return rows


def case_from_fixture(row, nmax=None, prec=DEFAULT_PREC):
    row = dict(row)
    case = row.pop("case")
    n = int(row.pop("nmax", 12)) if nmax is None else nmax
    row.pop("nmax", None)
    mode = row.pop("mode", None)
    prec = int(row.pop("prec", prec))
    return build_case(case, row, nmax=n, mode=mode, prec=prec)
