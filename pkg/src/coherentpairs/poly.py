"""Univariate polynomials over the monomial and falling-factorial bases.

The falling factorial ``phi_n(x) = x (x-1) ... (x-n+1)`` is the working basis
for everything involving the forward difference: ``Delta phi_n = n phi_{n-1}``
is pure coefficient bookkeeping there.  The monomial basis is the I/O basis.
Coefficients may be exact rationals or :class:`~coherentpairs.scalar.Ball`.
"""

import threading
from fractions import Fraction
from math import comb, factorial

from .scalar import format_scalar, is_exact, is_exact_zero

MONOMIAL = "monomial"
FALLING = "falling"
BASES = (MONOMIAL, FALLING)


class StirlingCache:
    """Grow-only tables of signed first-kind and second-kind Stirling numbers.

    ``first(n)[k]`` is the coefficient of ``x**k`` in ``phi_n(x)`` and
    ``second(n)[k]`` the coefficient of ``phi_k`` in ``x**n``.
    """

    def __init__(self):
        self._first = [[1]]
        self._second = [[1]]
        self._lock = threading.Lock()

    def _extend(self, n):
        with self._lock:
            while len(self._first) <= n:
                m = len(self._first) - 1
                prev1, prev2 = self._first[m], self._second[m]
                row1 = [0] * (m + 2)
                row2 = [0] * (m + 2)
                for k in range(m + 1):
                    # phi_{m+1} = (x - m) phi_m ;  x^{m+1} = x * sum S2(m,k) phi_k
                    row1[k + 1] += prev1[k]
                    row1[k] -= m * prev1[k]
                    row2[k + 1] += prev2[k]
                    row2[k] += k * prev2[k]
                self._first.append(row1)
                self._second.append(row2)

    def first(self, n):
        if n >= len(self._first):
            self._extend(n)
        return self._first[n]

    def second(self, n):
        if n >= len(self._second):
            self._extend(n)
        return self._second[n]

    @property
    def size(self):
        return len(self._first) - 1


STIRLING = StirlingCache()


def _norm(c):
    if isinstance(c, int) and not isinstance(c, bool):
        return Fraction(c)
    return c


class Polynomial:
    """Immutable polynomial stored as a coefficient tuple in one basis.

    ``coeffs[k]`` multiplies ``x**k`` (monomial basis) or ``phi_k(x)``
    (falling-factorial basis).  Trailing exact zeros are trimmed, so the zero
    polynomial has an empty tuple and degree -1.
    """

    __slots__ = ("coeffs", "basis")

    def __init__(self, coeffs=(), basis=MONOMIAL):
        if basis not in BASES:
            raise ValueError(f"unknown basis {basis!r}")
        cs = [_norm(c) for c in coeffs]
        while cs and is_exact_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)
        self.basis = basis

    @classmethod
    def constant(cls, c, basis=MONOMIAL):
        return cls([c], basis)

    @classmethod
    def x(cls, basis=MONOMIAL):
        return cls([0, 1], basis)

    @classmethod
    def linear_factor(cls, shift):
        """The monic linear polynomial ``x + shift``."""
        return cls([shift, 1])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def coeff(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def leading(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_exact(self):
        return all(is_exact(c) for c in self.coeffs)

    def to(self, basis):
        return convert_basis(self, basis)

    def monomial_coeffs(self):
        return self.to(MONOMIAL).coeffs

    def falling_coeffs(self):
        return self.to(FALLING).coeffs

    # arithmetic ---------------------------------------------------------

    def _common(self, other):
        # mixed-basis arithmetic happens in the falling basis: converting ball
        # coefficients to monomials would amplify their radii by Stirling numbers
        if not isinstance(other, Polynomial):
            return self, Polynomial([other], self.basis)
        basis = self.basis if self.basis == other.basis else FALLING
        return self.to(basis), other.to(basis)

    def __add__(self, other):
        a, b = self._common(other)
        n = max(len(a.coeffs), len(b.coeffs))
        return Polynomial([a.coeff(k) + b.coeff(k) for k in range(n)], a.basis)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs], self.basis)

    def __sub__(self, other):
        a, b = self._common(other)
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coeffs], self.basis)
        a, b = self._common(other)
        if a.is_zero() or b.is_zero():
            return Polynomial((), a.basis)
        if a.basis == MONOMIAL:
            out = [Fraction(0)] * (a.degree + b.degree + 1)
            for i, x in enumerate(a.coeffs):
                if is_exact_zero(x):
                    continue
                for j, y in enumerate(b.coeffs):
                    out[i + j] = out[i + j] + x * y
            return Polynomial(out, MONOMIAL)
        return Polynomial(_ff_product(a.coeffs, b.coeffs), FALLING)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return Polynomial([c / scalar for c in self.coeffs], self.basis)

    def __pow__(self, k):
        out = Polynomial([1], self.basis)
        for _ in range(k):
            out = out * self
        return out

    def mul_x(self):
        """Multiply by ``x`` without leaving the current basis."""
        if self.basis == MONOMIAL:
            return Polynomial([Fraction(0), *self.coeffs], MONOMIAL)
        # x phi_n = phi_{n+1} + n phi_n
        out = [Fraction(0)] * (len(self.coeffs) + 1)
        for n, c in enumerate(self.coeffs):
            out[n + 1] = out[n + 1] + c
            if n:
                out[n] = out[n] + n * c
        return Polynomial(out, FALLING)

    def __call__(self, x):
        acc = Fraction(0)
        if self.basis == MONOMIAL:
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        for k in range(self.degree, -1, -1):
            acc = self.coeffs[k] + (x - k) * acc
        return acc

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial([other], self.basis)
        if not (self.is_exact() and other.is_exact()):
            return NotImplemented
        return self.to(FALLING).coeffs == other.to(FALLING).coeffs

    __hash__ = None

    def __repr__(self):
        return f"Polynomial({[format_scalar(c) for c in self.coeffs]}, {self.basis!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        sym = "x^{}" if self.basis == MONOMIAL else "phi_{}"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if is_exact_zero(c):
                continue
            term = format_scalar(c)
            if k:
                term = f"({term})*" + (sym.format(k) if k > 1 or self.basis == FALLING else "x")
            parts.append(term)
        return " + ".join(parts)


def _ff_product(a, b):
    # phi_m phi_n = sum_k C(m,k) C(n,k) k! phi_{m+n-k}
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for m, ca in enumerate(a):
        if is_exact_zero(ca):
            continue
        for n, cb in enumerate(b):
            if is_exact_zero(cb):
                continue
            prod = ca * cb
            for k in range(min(m, n) + 1):
                out[m + n - k] = out[m + n - k] + comb(m, k) * comb(n, k) * factorial(k) * prod
    return out


def ff_basis(n):
    """The falling factorial ``phi_n`` as a polynomial in the falling basis."""
    if n < 0:
        raise ValueError(f"falling factorial index must be nonnegative, got {n}")
    return Polynomial([0] * n + [1], FALLING)


def falling_factorial(x, n):
    """Evaluate ``phi_n(x) = x (x-1) ... (x-n+1)`` directly."""
    out = 1
    for k in range(n):
        out = out * (x - k)
    return out


def convert_basis(p, target):
    if target not in BASES:
        raise ValueError(f"unknown basis {target!r}")
    if p.basis == target:
        return p
    n = p.degree
    out = [Fraction(0)] * (n + 1)
    table = STIRLING.first if target == MONOMIAL else STIRLING.second
    for k, c in enumerate(p.coeffs):
        if is_exact_zero(c):
            continue
        for j, s in enumerate(table(k)):
            if s:
                out[j] = out[j] + s * c
    return Polynomial(out, target)


def shifted_ff_expand(n):
    """``phi_n(x - 1)`` expanded over falling factorials: coefficients ``(-1)^k phi_k(n)``."""
    if n < 0:
        raise ValueError(f"falling factorial index must be nonnegative, got {n}")
    out = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        out[n - k] = Fraction((-1) ** k * falling_factorial(n, k))
    return Polynomial(out, FALLING)


def shift(p, h):
    """Return ``x -> p(x + h)`` for ``h`` in ``{+1, -1}``, in the basis of ``p``."""
    if h not in (1, -1):
        raise ValueError("only unit shifts are supported")
    q = p.to(FALLING)
    if h == 1:
        out = q + _delta_ff(q)
    else:
        acc = Polynomial((), FALLING)
        for n, c in enumerate(q.coeffs):
            if not is_exact_zero(c):
                acc = acc + shifted_ff_expand(n) * c
        out = acc
    return out.to(p.basis)


def _delta_ff(q):
    return Polynomial([n * c for n, c in enumerate(q.coeffs)][1:], FALLING)


def difference(p, direction="forward"):
    """Forward ``Delta p(x) = p(x+1) - p(x)`` or backward ``nabla p(x) = p(x) - p(x-1)``."""
    q = p.to(FALLING)
    if direction in ("forward", "delta"):
        out = _delta_ff(q)
    elif direction in ("backward", "nabla"):
        out = q - shift(q, -1)
    else:
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return out.to(p.basis)


def delta(p):
    return difference(p, "forward")


def nabla(p):
    return difference(p, "backward")


def expand_in_basis(p, basis_polys):
    """Coefficients ``c_k`` with ``p = sum c_k basis_polys[k]`` for a monic triangular basis.

    ``basis_polys[k]`` must be monic of degree ``k``.  Raises ``ValueError`` if
    ``p`` has a degree beyond the supplied basis.
    """
    r = p.to(FALLING)
    if r.degree >= len(basis_polys):
        raise ValueError(f"degree {r.degree} exceeds the basis length {len(basis_polys)}")
    coeffs = [Fraction(0)] * (r.degree + 1)
    work = list(r.coeffs)
    for k in range(r.degree, -1, -1):
        c = work[k]
        coeffs[k] = c
        if is_exact_zero(c):
            continue
        bk = basis_polys[k].to(FALLING).coeffs
        for j in range(k + 1):
            work[j] = work[j] - c * bk[j]
    return coeffs
