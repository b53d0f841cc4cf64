"""Linear functionals realised as streams of falling-factorial moments.

``nu_n = L[phi_n]`` is stored relative to a per-functional *unit*:

* finite-support families: the unit is 1, moments are exact finite sums;
* infinite-support families in exact mode: the unit is the (usually
  transcendental) total mass, so ``nu_0 = 1`` and higher moments follow from
  the Pearson moment recurrence;
* approximate mode: moments are true sums, certified as balls.

A Christoffel transform ``(Lambda L)[p] = L[Lambda p]`` inherits the unit of
its base, which keeps the norms of a pair ``(L, Lambda L)`` on a common scale.
"""

import threading
from fractions import Fraction

from .errors import ConsistencyError, DegenerateFunctional, ModeError
from .poly import FALLING, STIRLING, Polynomial, _ff_product, falling_factorial, ff_basis
from .scalar import (
    DEFAULT_PREC,
    GUARD_BITS,
    MIN_PREC,
    Ball,
    is_exact,
    is_exact_zero,
    nonzero_status,
    sum_series,
)
from .weights import WeightFamily, pearson_data, rho_values


class MomentFunctional:
    """A moment functional built from a weight family or as a Christoffel transform."""

    def __init__(self, family=None, *, base=None, multiplier=None, mode="exact", prec=DEFAULT_PREC):
        if (family is None) == (base is None):
            raise ValueError("give exactly one of family= or base=")
        if base is not None:
            mode, prec = base.mode, base.prec
            multiplier = multiplier.to(FALLING)
            if not multiplier.is_exact():
                raise ModeError("Christoffel multipliers must have exact coefficients")
            if multiplier.is_zero():
                raise DegenerateFunctional("Christoffel multiplier is the zero polynomial")
        if mode not in ("exact", "approx"):
            raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")
        if mode == "approx" and prec < MIN_PREC:
            raise ModeError(f"approximate mode needs at least {MIN_PREC} bits")
        self.family = family
        self.base = base
        self.multiplier = multiplier
        self.mode = mode
        self.prec = prec
        self._moments = []
        self._lock = threading.Lock()
        if family is not None and mode == "exact" and not family.finite:
            if _seed_count(pearson_data(family)) > 1:
                raise ModeError(
                    f"{family.describe()}: normalised moments are not rational; use mode='approx'"
                )

    @classmethod
    def from_family(cls, family, mode="exact", prec=DEFAULT_PREC):
        return cls(family, mode=mode, prec=prec)

    # description --------------------------------------------------------

    @property
    def root(self):
        return self.family if self.base is None else self.base.root

    @property
    def total_multiplier(self):
        if self.base is None:
            return Polynomial([1], FALLING)
        return self.base.total_multiplier * self.multiplier

    @property
    def unit(self):
        fam = self.root
        if self.mode == "approx":
            return "absolute"
        return "absolute" if fam.finite else f"mass of {fam.describe()}"

    def describe(self):
        if self.base is None:
            return self.family.describe()
        return f"({self.multiplier.to('monomial')}) * {self.base.describe()}"

    def support_size(self):
        """Number of support points for finite functionals, ``None`` if infinite."""
        fam = self.root
        if not fam.finite:
            return None
        lam = self.total_multiplier
        r = rho_values(fam, fam.N)
        return sum(1 for x in range(fam.N + 1) if r[x] != 0 and lam(x) != 0)

    # moments ------------------------------------------------------------

    def moment(self, n):
        if n < len(self._moments):
            return self._moments[n]
        self._extend(n)
        return self._moments[n]

    def moments(self, nmax):
        self.moment(nmax)
        return list(self._moments[: nmax + 1])

    @property
    def mu0(self):
        return self.moment(0)

    def _extend(self, n):
        with self._lock:
            if n < len(self._moments):
                return
            if self.base is not None:
                new = [self._christoffel_moment(k) for k in range(len(self._moments), n + 1)]
            elif self.family.finite:
                new = self._finite_moments(len(self._moments), n)
            elif self.mode == "exact":
                new = recurrence_moments(self.family, n, [Fraction(1)])[len(self._moments):]
            else:
                new = self._approx_moments(len(self._moments), n)
            if not self._moments and is_exact_zero(new[0]):
                raise DegenerateFunctional(f"{self.describe()}: nu_0 = 0")
            self._moments.extend(new)

    def _finite_moments(self, lo, hi):
        fam = self.family
        r = rho_values(fam, fam.N)
        out = []
        for n in range(lo, hi + 1):
            s = sum((falling_factorial(x, n) * r[x] for x in range(n, fam.N + 1)), Fraction(0))
            out.append(s if self.mode == "exact" else Ball(s, prec=self.prec))
        return out

    def _christoffel_moment(self, n):
        prod = _ff_product(self.multiplier.coeffs, ff_basis(n).coeffs)
        return self.base.apply(Polynomial(prod, FALLING))

    def _approx_moments(self, lo, hi):
        direct, rec = dual_path_moments(self.family, hi, self.prec)
        for n in range(lo, hi + 1):
            if not rec[n].overlaps(direct[n]):
                raise ConsistencyError(
                    f"{self.family.describe()}: recurrence and direct summation disagree at n={n}"
                )
        return direct[lo:]

    # functional application -------------------------------------------

    def apply(self, p):
        """``L[p] = sum_k c_k nu_k`` over the falling-factorial coefficients of ``p``."""
        coeffs = p.to(FALLING).coeffs
        if self.mode == "exact" and not all(is_exact(c) for c in coeffs):
            raise ModeError("approximate polynomial applied to an exact functional")
        if not coeffs:
            return Fraction(0) if self.mode == "exact" else Ball(0, prec=self.prec)
        nu = self.moments(len(coeffs) - 1)
        acc = Fraction(0) if self.mode == "exact" else Ball(0, prec=self.prec)
        for c, m in zip(coeffs, nu):
            if not is_exact_zero(c):
                acc = acc + c * m
        return acc

    __call__ = apply

    def christoffel(self, multiplier):
        return christoffel(self, multiplier)

    def ff_moments(self, nmax):
        return ff_moments(self, nmax)

    def power_moments(self, nmax):
        nu = self.moments(nmax)
        out = []
        for j in range(nmax + 1):
            acc = Fraction(0)
            for k, s in enumerate(STIRLING.second(j)):
                if s:
                    acc = acc + s * nu[k]
            out.append(acc)
        return out

    def __repr__(self):
        return f"MomentFunctional({self.describe()}, mode={self.mode!r})"


def from_family(family, mode="exact", prec=DEFAULT_PREC):
    return MomentFunctional(family, mode=mode, prec=prec)


def christoffel(L0, multiplier):
    """``L1[p] = L0[multiplier * p]``; the unit of ``L0`` is kept."""
    L1 = MomentFunctional(base=L0, multiplier=multiplier)
    if is_exact_zero(L1.mu0):
        raise DegenerateFunctional(f"Christoffel transform {L1.describe()} has nu_0 = 0")
    return L1


def ff_moments(L, nmax):
    """Normalised falling-factorial moments ``nu_n / nu_0`` for ``0 <= n <= nmax``."""
    nu = L.moments(nmax)
    return [m / nu[0] for m in nu]


def apply(L, p):
    return L.apply(p)


# Pearson moment recurrence ----------------------------------------------


def _seed_count(pair):
    return max(pair.psi.degree, pair.phi.degree - 1)


def pearson_rows(pair, nmax):
    """Falling-factorial coefficient rows of ``psi phi_n - phi Delta phi_n``, ``n <= nmax``.

    ``L`` satisfies the Pearson equation exactly when ``L`` annihilates every
    row; row ``n`` has degree ``n + d`` with ``d = max(deg psi, deg phi - 1)``.
    """
    psi = pair.psi.to(FALLING).coeffs
    phi = pair.phi.to(FALLING).coeffs
    rows = []
    for n in range(nmax + 1):
        a = _ff_product(psi, ff_basis(n).coeffs)
        b = _ff_product(phi, [0] * (n - 1) + [n]) if n else []
        width = max(len(a), len(b))
        rows.append([_get(a, j) - _get(b, j) for j in range(width)])
    return rows


def _get(seq, j):
    return seq[j] if j < len(seq) else Fraction(0)


def recurrence_moments(family, nmax, seeds, pair=None):
    """Run the Pearson moment recurrence upward from ``seeds = [nu_0, ..., nu_{d-1}]``."""
    if pair is None:
        pair = pearson_data(family)
    d = _seed_count(pair)
    if len(seeds) != d:
        raise ValueError(f"need {d} seed moment(s), got {len(seeds)}")
    nu = list(seeds)
    rows = pearson_rows(pair, max(nmax - d, 0))
    for n, row in enumerate(rows):
        top = n + d
        if top > nmax:
            break
        lead = row[top] if top < len(row) else 0
        if lead == 0:
            raise DegenerateFunctional(
                f"{family.describe()}: Pearson recurrence has a vanishing leading coefficient at n={n}"
            )
        acc = 0
        for j in range(top):
            if row[j]:
                acc = acc + row[j] * nu[j]
        nu.append(-acc / lead)
    return nu[: nmax + 1]


def dual_path_moments(family, nmax, prec=DEFAULT_PREC):
    """Moments ``nu_0..nu_nmax`` twice: direct summation, and the recurrence from summed seeds.

    The upward recurrence loses bits to cancellation, so its seeds are summed
    with the guard band included.  Both lists are returned at ``prec`` bits.
    """
    direct = [direct_moment(family, n, prec) for n in range(nmax + 1)]
    d = _seed_count(pearson_data(family))
    seeds = [direct_moment(family, n, prec + GUARD_BITS) for n in range(d)]
    rec = [m.round(prec) for m in recurrence_moments(family, nmax, seeds)]
    return direct, rec


# direct summation -------------------------------------------------------


def _ratio_bound(term, n, X):
    """Upper bound, valid for every ``x >= X``, of ``|t(x+1) / t(x)|`` with ``t = phi_n rho``.

    The ratio is ``z prod(x + a_i) / ((x + 1 - n) prod(x + 1 + b_j))``.  Each
    numerator factor is paired with a denominator factor and bounded by the
    worse of 1 and its value at ``X``; unpaired denominators only shrink it.
    Returns ``None`` when some denominator is not yet positive at ``X``.
    """
    dens = [Fraction(1 - n)] + [1 + b for b in term.lower]
    if any(X + d <= 0 for d in dens):
        return None
    nums = [abs(a) for a in term.upper]
    if len(nums) > len(dens):
        return None
    bound = abs(term.z)
    for i, d in enumerate(dens):
        if i < len(nums):
            bound *= max(Fraction(1), (X + nums[i]) / (X + d))
        else:
            bound /= X + d
    return bound


def series_certificate(term, n):
    """``(r, X)`` with ``|t(x+1)/t(x)| <= r < 1`` for ``x >= X``; X is the smallest such index."""
    target = Fraction(1, 2)
    if len(term.upper) == len(term.lower) + 1:
        target = max(target, (1 + abs(term.z)) / 2)
    if target >= 1:
        raise DegenerateFunctional("moment series does not converge")

    def ok(X):
        b = _ratio_bound(term, n, X)
        return b is not None and b <= target

    hi = max(n, 1)
    while not ok(hi):
        hi *= 2
        if hi > 10**7:
            raise DegenerateFunctional("no convergence certificate below 10^7 terms")
    lo = n
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return _ratio_bound(term, n, lo), lo


def direct_moment(family, n, prec=DEFAULT_PREC):
    """``nu_n = sum_x phi_n(x) rho(x)`` by certified truncated summation."""
    term = family.hyper() if isinstance(family, WeightFamily) else family
    r, X = series_certificate(term, n)
    wp = prec + GUARD_BITS
    cache = {}

    def rho_ball(x):
        # ball weights built by the ratio recurrence, shared across calls
        if x not in cache:
            prev = rho_ball(x - 1) if x else None
            cache[x] = Ball(1, prec=wp) if x == 0 else prev * term.ratio(x)
        return cache[x]

    def t(k):
        x = n + k
        return rho_ball(x) * falling_factorial(x, n)

    for x in range(n + 1):
        rho_ball(x)
    return sum_series(t, r, onset=X - n, target_bits=prec).round(prec)


# quasi-definiteness -----------------------------------------------------


class HankelProfile:
    """Leading principal Hankel determinants ``D_0 .. D_nmax`` and their verdicts."""

    def __init__(self, dets, statuses):
        self.dets = dets
        self.statuses = statuses

    @property
    def first_zero(self):
        for k, s in enumerate(self.statuses):
            if s == "fail":
                return k
        return None

    @property
    def first_undecided(self):
        for k, s in enumerate(self.statuses):
            if s != "pass":
                return k
        return None

    @property
    def quasidefinite(self):
        return all(s == "pass" for s in self.statuses)

    @property
    def inconclusive(self):
        return "inconclusive" in self.statuses and self.first_zero is None

    def __repr__(self):
        return f"HankelProfile(order={len(self.dets) - 1}, first_zero={self.first_zero})"


def hankel_determinants(moments, nmax):
    """``D_k = det[m_{i+j}]_{0<=i,j<=k}`` by elimination, falling back to pivoting after a zero pivot."""
    size = nmax + 1
    H = [[moments[i + j] for j in range(size)] for i in range(size)]
    dets = []
    A = [row[:] for row in H]
    prod = None
    broke = False
    for k in range(size):
        if broke:
            dets.append(_det([row[: k + 1] for row in H[: k + 1]]))
            continue
        pivot = A[k][k]
        prod = pivot if prod is None else prod * pivot
        dets.append(prod)
        if nonzero_status(pivot) != "pass":
            broke = True
            continue
        for i in range(k + 1, size):
            f = A[i][k] / pivot
            for j in range(k, size):
                A[i][j] = A[i][j] - f * A[k][j]
    return dets


def _det(M):
    M = [row[:] for row in M]
    n = len(M)
    sign = 1
    det = 1
    for k in range(n):
        p = next((i for i in range(k, n) if nonzero_status(M[i][k]) == "pass"), None)
        if p is None:
            return M[k][k] * 0 if not is_exact(M[k][k]) else Fraction(0)
        if p != k:
            M[k], M[p] = M[p], M[k]
            sign = -sign
        det = det * M[k][k]
        for i in range(k + 1, n):
            f = M[i][k] / M[k][k]
            for j in range(k, n):
                M[i][j] = M[i][j] - f * M[k][j]
    return det * sign


def quasidefinite_profile(L, nmax):
    m = L.power_moments(2 * nmax)
    dets = hankel_determinants(m, nmax)
    return HankelProfile(dets, [nonzero_status(d) for d in dets])
