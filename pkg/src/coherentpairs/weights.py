"""The nine discrete weight families and their Pearson data.

Every catalog weight is a hypergeometric term normalised to ``rho(0) = 1``::

    rho(x) / rho(x-1) = z * prod_i (x + a_i - 1) / (x * prod_j (x + b_j))

with "upper" parameters ``a_i`` (Pochhammer ``(a_i)_x`` in the numerator,
``-N`` for finite families) and "lower" parameters ``b_j`` (``(b_j + 1)_x`` in
the denominator).  :class:`HyperTerm` carries that description and is used as
an independent source of Pearson pairs, summation certificates and family
identification.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidParameter
from .poly import Polynomial
from .scalar import as_rational

X = Polynomial.x()

# tag -> (display name, required parameters, finite support)
FAMILIES = {
    "charlier": ("Charlier", ("z",), False),
    "meixner": ("Meixner", ("a", "z"), False),
    "kravchuk": ("Kravchuk", ("N", "z"), True),
    "hahn": ("Hahn", ("N", "a", "b"), True),
    "gen-charlier": ("generalized Charlier", ("b", "z"), False),
    "gen-meixner": ("generalized Meixner", ("a", "b", "z"), False),
    "gen-kravchuk": ("generalized Kravchuk", ("N", "a", "z"), True),
    "gen-hahn-1": ("generalized Hahn of type I", ("a1", "a2", "b", "z"), False),
    "gen-hahn-2": ("generalized Hahn of type II", ("N", "a1", "a2", "b1", "b2"), True),
}

ALIASES = {
    "krawtchouk": "kravchuk",
    "kravchouk": "kravchuk",
    "genkrawtchouk": "gen-kravchuk",
    "genhahni": "gen-hahn-1",
    "genhahnii": "gen-hahn-2",
}

A_TYPE = ("a", "a1", "a2")
B_TYPE = ("b", "b1", "b2")


def canonical_tag(tag):
    t = tag.strip().lower().replace("_", "-")
    if t in FAMILIES:
        return t
    key = t.replace("-", "")
    for name in FAMILIES:
        if name.replace("-", "") == key:
            return name
    if key in ALIASES:
        return ALIASES[key]
    raise InvalidParameter(f"unknown weight family {tag!r}; expected one of {sorted(FAMILIES)}")


@dataclass(frozen=True)
class HyperTerm:
    """Term-ratio description ``z * prod(x + a - 1) / (x * prod(x + b))``."""

    z: Fraction
    upper: tuple
    lower: tuple

    def ratio(self, x):
        num = self.z
        for a in self.upper:
            num *= x + a - 1
        den = Fraction(x)
        for b in self.lower:
            den *= x + b
        return num / den

    def ratio_polys(self):
        """``(numerator, denominator)`` of the term ratio as monomial polynomials in x."""
        num = Polynomial([self.z])
        for a in self.upper:
            num = num * Polynomial.linear_factor(a - 1)
        den = X
        for b in self.lower:
            den = den * Polynomial.linear_factor(b)
        return num, den

    def pearson(self):
        """Pearson pair read off the ratio: ``phi = prod(x + a)``, ``psi = x prod(x + b) / z - phi``."""
        phi = Polynomial([1])
        for a in self.upper:
            phi = phi * Polynomial.linear_factor(a)
        top = X
        for b in self.lower:
            top = top * Polynomial.linear_factor(b)
        return phi, top / self.z - phi

    def finite_top(self):
        """Largest support point for a terminating term, else ``None``."""
        tops = [-a for a in self.upper if a <= 0 and a.denominator == 1]
        return int(min(tops)) if tops else None

    def canonical(self):
        """Cancel upper/lower pairs with ``a - 1 == b`` and sort both lists."""
        upper = sorted(self.upper)
        lower = sorted(self.lower)
        for a in list(upper):
            if a - 1 in lower:
                upper.remove(a)
                lower.remove(a - 1)
        return HyperTerm(self.z, tuple(sorted(upper)), tuple(sorted(lower)))


@dataclass(frozen=True)
class WeightFamily:
    tag: str
    params: tuple

    @property
    def p(self):
        return dict(self.params)

    @property
    def name(self):
        return FAMILIES[self.tag][0]

    @property
    def finite(self):
        return FAMILIES[self.tag][2]

    @property
    def N(self):
        return int(self.p["N"]) if "N" in self.p else None

    @property
    def support_top(self):
        """``N`` for finite families, ``None`` (meaning infinity) otherwise."""
        return self.N if self.finite else None

    def describe(self):
        return f"{self.tag}(" + ", ".join(f"{k}={_fmt(v)}" for k, v in self.params) + ")"

    def hyper(self):
        return hyper_term(self.tag, self.p)


@dataclass(frozen=True)
class PearsonPair:
    phi: Polynomial
    psi: Polynomial
    class_s: int
    admissible: bool = True
    offending_n: int = None


def _fmt(v):
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def hyper_term(tag, p):
    tag = canonical_tag(tag)
    N = p.get("N")
    upper = {
        "charlier": (),
        "meixner": (p.get("a"),),
        "kravchuk": (-N if N is not None else None,),
        "hahn": (-N if N is not None else None, p.get("a")),
        "gen-charlier": (),
        "gen-meixner": (p.get("a"),),
        "gen-kravchuk": (-N if N is not None else None, p.get("a")),
        "gen-hahn-1": (p.get("a1"), p.get("a2")),
        "gen-hahn-2": (-N if N is not None else None, p.get("a1"), p.get("a2")),
    }[tag]
    lower = {
        "hahn": (p.get("b"),),
        "gen-charlier": (p.get("b"),),
        "gen-meixner": (p.get("b"),),
        "gen-hahn-1": (p.get("b"),),
        "gen-hahn-2": (p.get("b1"), p.get("b2")),
    }.get(tag, ())
    z = Fraction(1) if tag in ("hahn", "gen-hahn-2") else p.get("z")
    return HyperTerm(Fraction(z), tuple(Fraction(a) for a in upper), tuple(Fraction(b) for b in lower))


def catalog_pearson(tag, p):
    """The displayed (phi, psi) pair of a catalog family, as raw polynomials.

    No parameter validation happens here, so degenerate substitutions (such as
    ``z = 1`` in the type I generalized Hahn data) can be inspected directly.
    """
    tag = canonical_tag(tag)
    g = {k: Fraction(v) for k, v in p.items()}
    z = g.get("z")
    N = g.get("N")
    lin = Polynomial.linear_factor
    if tag == "charlier":
        return Polynomial([1]), X / z - 1
    if tag == "meixner":
        phi = lin(g["a"])
        return phi, X / z - phi
    if tag == "kravchuk":
        phi = lin(-N)
        return phi, X / z - phi
    if tag == "hahn":
        a, b = g["a"], g["b"]
        return lin(-N) * lin(a), Polynomial([a * N, N - a + b])
    if tag == "gen-charlier":
        return Polynomial([1]), X * lin(g["b"]) / z - 1
    if tag == "gen-meixner":
        phi = lin(g["a"])
        return phi, X * lin(g["b"]) / z - phi
    if tag == "gen-kravchuk":
        phi = lin(-N) * lin(g["a"])
        return phi, X / z - phi
    if tag == "gen-hahn-1":
        phi = lin(g["a1"]) * lin(g["a2"])
        return phi, X * lin(g["b"]) / z - phi
    a1, a2, b1, b2 = g["a1"], g["a2"], g["b1"], g["b2"]
    phi = lin(-N) * lin(a1) * lin(a2)
    psi = Polynomial([N * a1 * a2, N * a1 + N * a2 - a1 * a2 + b1 * b2, N - a1 - a2 + b1 + b2])
    return phi, psi


def pearson_class(phi, psi):
    return max(phi.degree - 2, psi.degree - 1)


def admissibility(phi, psi, s):
    """``(ok, n)``: when ``deg phi = deg psi + 1`` the leading ``psi`` coefficient must avoid ``n - s``."""
    if phi.degree != psi.degree + 1:
        return True, None
    lead = Fraction(psi.leading())
    if lead.denominator == 1 and lead + s >= 0:
        return False, int(lead + s)
    return True, None


def make_pair(phi, psi):
    s = pearson_class(phi, psi)
    ok, n = admissibility(phi, psi, s)
    return PearsonPair(phi, psi, s, ok, n)


def make_family(tag, params=None, **kwargs):
    """Validate parameters and build a :class:`WeightFamily`.

    Parameters may be given as a mapping and/or keyword arguments; values are
    ints, Fractions or ``'p/q'`` strings.
    """
    tag = canonical_tag(tag)
    raw = dict(params or {})
    raw.update(kwargs)
    required = FAMILIES[tag][1]
    missing = [k for k in required if k not in raw]
    extra = [k for k in raw if k not in required]
    if missing:
        raise InvalidParameter(f"{tag}: missing parameter(s) {', '.join(missing)}")
    if extra:
        raise InvalidParameter(f"{tag}: unexpected parameter(s) {', '.join(sorted(extra))}")
    try:
        values = {k: as_rational(v) for k, v in raw.items()}
    except (ValueError, TypeError) as exc:
        raise InvalidParameter(f"{tag}: {exc}") from exc

    if "N" in values:
        N = values["N"]
        if N.denominator != 1 or N < 1:
            raise InvalidParameter(f"{tag}: N must be a positive integer, got {_fmt(N)}")
    if "z" in values and values["z"] == 0:
        raise InvalidParameter(f"{tag}: z must be nonzero")
    for k in B_TYPE:
        v = values.get(k)
        if v is not None and v.denominator == 1 and v <= -1:
            raise InvalidParameter(f"{tag}: {k}={_fmt(v)} puts a pole (b+1)_x = 0 on the support")
    for k in A_TYPE:
        v = values.get(k)
        if v is not None and v.denominator == 1 and v <= 0:
            raise InvalidParameter(f"{tag}: {k}={_fmt(v)} makes the weight vanish on the support")
    if tag in ("meixner", "gen-hahn-1") and abs(values["z"]) >= 1:
        raise InvalidParameter(f"{tag}: |z| < 1 is needed for finite moments, got z={_fmt(values['z'])}")

    phi, psi = catalog_pearson(tag, values)
    if psi.degree < 1:
        raise InvalidParameter(f"{tag}: parameters make deg(psi) < 1 (not semiclassical)")
    order = FAMILIES[tag][1]
    return WeightFamily(tag, tuple((k, values[k]) for k in order))


def pearson_data(family):
    phi, psi = catalog_pearson(family.tag, family.p)
    return make_pair(phi, psi)


def rho_values(family, xmax):
    """``[rho(0), ..., rho(xmax)]`` by the term-ratio recurrence."""
    term = family.hyper() if isinstance(family, WeightFamily) else family
    out = [Fraction(1)]
    for x in range(1, xmax + 1):
        out.append(out[-1] * term.ratio(x) if out[-1] else Fraction(0))
    return out


def rho(family, x):
    """Exact weight value; ``rho(-1) = 0`` and ``rho(x) = 0`` past a finite support."""
    if x < -1:
        raise ValueError("weights are defined for x >= -1")
    if x == -1:
        return Fraction(0)
    return rho_values(family, x)[x]


def pearson_residual(family, x, pair=None):
    """``nabla(phi rho)(x) + psi(x) rho(x)`` for the family's (or a supplied) Pearson pair."""
    if pair is None:
        pair = pearson_data(family)
    phi, psi = pair.phi, pair.psi
    r = rho_values(family, x)
    prev = r[x - 1] if x >= 1 else Fraction(0)
    return phi(x) * r[x] - phi(x - 1) * prev + psi(x) * r[x]


def pearson_residuals(family, xmax, pair=None):
    """Residuals for ``0 <= x <= xmax`` from a single pass over the weights."""
    if pair is None:
        pair = pearson_data(family)
    phi, psi = pair.phi, pair.psi
    r = rho_values(family, xmax)
    out = []
    prev = Fraction(0)
    for x in range(xmax + 1):
        out.append(phi(x) * r[x] - phi(x - 1) * prev + psi(x) * r[x])
        prev = r[x]
    return out


def parse_params(items):
    """Parse ``['z=1/2', 'omega=3/2']`` into ``{'z': Fraction(1, 2), ...}``."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InvalidParameter(f"parameter assignment must look like name=p/q, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if k in out:
            raise InvalidParameter(f"parameter {k} given twice")
        try:
            out[k] = as_rational(v)
        except (ValueError, TypeError) as exc:
            raise InvalidParameter(str(exc)) from exc
    return out
