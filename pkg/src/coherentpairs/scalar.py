"""Scalars: exact rationals and midpoint-radius balls.

Exact values are plain :class:`fractions.Fraction` (or ``int``).  Approximate
values are :class:`Ball` instances: an MPFR midpoint at an explicit precision
plus a nonnegative radius rounded upward, so the true value always lies in
``mid +/- rad``.  Every operation takes its precision from the operands, never
from a global context.
"""

import threading
from fractions import Fraction
from numbers import Rational

import gmpy2
from gmpy2 import mpfr, mpz

from .errors import ConvergenceError, ModeError, ResourceError

DEFAULT_PREC = 128
MIN_PREC = 64
GUARD_BITS = 32
RAD_PREC = 64
MAX_TERMS = 10**7

_local = threading.local()


def _contexts():
    try:
        return _local.ctx
    except AttributeError:
        _local.ctx = {
            "near": {},
            "up": gmpy2.context(precision=RAD_PREC, round=gmpy2.RoundUp),
            "down": gmpy2.context(precision=RAD_PREC, round=gmpy2.RoundDown),
        }
        return _local.ctx


def _near(prec):
    near = _contexts()["near"]
    ctx = near.get(prec)
    if ctx is None:
        ctx = near[prec] = gmpy2.context(precision=prec, round=gmpy2.RoundToNearest)
    return ctx


def _up():
    return _contexts()["up"]


def _down():
    return _contexts()["down"]


def _up_from(value):
    """Upper bound for a nonnegative rational or float, rounded toward +inf."""
    if isinstance(value, (int, Rational)):
        value = Fraction(value)
        return _up().div(mpz(value.numerator), mpz(value.denominator))
    return _up().plus(value)


def _rounding_error(ctx, m):
    # half an ulp of the rounded result, only when the last op was inexact
    if not ctx.inexact or m.is_zero():
        return mpfr(0)
    return gmpy2.mul_2exp(mpfr(1), gmpy2.get_exp(m) - ctx.precision - 1)


def _mag(m):
    # |m| at m's own precision is exact; plain abs() would round to 53 bits
    return _near(max(m.precision, 2)).abs(m)


def _rational_mid(value, prec):
    ctx = _near(prec)
    ctx.clear_flags()
    value = Fraction(value)
    m = ctx.div(mpz(value.numerator), mpz(value.denominator))
    return m, _rounding_error(ctx, m)


class Ball:
    """A real number known to lie in ``[mid - rad, mid + rad]``."""

    __slots__ = ("mid", "rad", "prec")

    def __init__(self, mid, rad=0, prec=DEFAULT_PREC):
        if prec < MIN_PREC:
            raise ModeError(f"ball precision must be at least {MIN_PREC} bits, got {prec}")
        if isinstance(mid, (int, Rational)) and not isinstance(mid, bool):
            m, err = _rational_mid(mid, prec)
        else:
            ctx = _near(prec)
            ctx.clear_flags()
            m = ctx.plus(mid if isinstance(mid, type(mpfr(0))) else mpfr(float(mid)))
            err = _rounding_error(ctx, m)
        if rad < 0:
            raise ValueError("ball radius must be nonnegative")
        r = _up().add(_up_from(rad), err) if rad or err else mpfr(0)
        self.mid = m
        self.rad = r
        self.prec = prec

    @classmethod
    def _raw(cls, mid, rad, prec):
        b = object.__new__(cls)
        b.mid = mid
        b.rad = rad
        b.prec = prec
        return b

    def _coerce(self, other):
        if isinstance(other, Ball):
            return other
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return Ball(other, prec=self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        ctx = _near(prec)
        ctx.clear_flags()
        m = ctx.add(self.mid, other.mid)
        up = _up()
        r = up.add(up.add(self.rad, other.rad), _rounding_error(ctx, m))
        return Ball._raw(m, r, prec)

    __radd__ = __add__

    def __neg__(self):
        return Ball._raw(_near(max(self.mid.precision, 2)).minus(self.mid), self.rad, self.prec)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        ctx = _near(prec)
        ctx.clear_flags()
        m = ctx.mul(self.mid, other.mid)
        err = _rounding_error(ctx, m)
        up = _up()
        r = up.add(
            up.add(up.mul(_mag(self.mid), other.rad), up.mul(_mag(other.mid), self.rad)),
            up.add(up.mul(self.rad, other.rad), err),
        )
        return Ball._raw(m, r, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.certainly_nonzero():
            raise ZeroDivisionError(f"division by a ball containing zero: {other}")
        prec = max(self.prec, other.prec)
        ctx = _near(prec)
        ctx.clear_flags()
        m = ctx.div(self.mid, other.mid)
        err = _rounding_error(ctx, m)
        up, down = _up(), _down()
        bm = _mag(other.mid)
        num = up.add(up.mul(_mag(self.mid), other.rad), up.mul(self.rad, bm))
        den = down.mul(bm, down.sub(bm, other.rad))
        r = up.add(up.div(num, den), err) if num else err
        return Ball._raw(m, r, prec)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = Ball(1, prec=self.prec)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def upper_abs(self):
        return _up().add(_mag(self.mid), self.rad)

    def lower_abs(self):
        v = _down().sub(_mag(self.mid), self.rad)
        return v if v > 0 else mpfr(0)

    def certainly_nonzero(self):
        return _mag(self.mid) > self.rad

    def contains(self, value):
        """True if the exact rational ``value`` lies inside the ball."""
        value = Fraction(value)
        mid = Fraction(*self.mid.as_integer_ratio())
        rad = Fraction(*self.rad.as_integer_ratio())
        return abs(value - mid) <= rad

    def overlaps(self, other):
        up = _up()
        ctx = _near(max(self.prec, other.prec) + 2)
        gap = _mag(ctx.sub(self.mid, other.mid))
        return gap <= up.add(up.add(self.rad, other.rad), _rounding_error(ctx, gap))

    def round(self, prec):
        """Re-round the midpoint to ``prec`` bits, widening the radius."""
        ctx = _near(prec)
        ctx.clear_flags()
        m = ctx.plus(self.mid)
        return Ball._raw(m, _up().add(self.rad, _rounding_error(ctx, m)), prec)

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"Ball({self.mid!s}, {self.rad!s}, prec={self.prec})"

    def __str__(self):
        digits = max(6, int(self.prec * 0.30103) + 1)
        return f"{_sci(self.mid, digits)}+/-{_sci(self.rad, 3)}"


def _sci(x, ndigits):
    # deterministic scientific notation straight from the MPFR digit string
    if x.is_zero():
        return "0"
    mant, exp, _ = gmpy2.digits(x, 10, ndigits)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+d}"


def is_exact(x):
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def as_rational(value):
    """Parse ``'p/q'`` strings, ints and Fractions into a Fraction; floats are refused."""
    if isinstance(value, float):
        raise ModeError("floats are not accepted as exact parameters; use 'p/q' strings")
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        try:
            if "/" in text:
                p, q = text.split("/")
                return Fraction(int(p), int(q))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    return Fraction(value)


def mode_of(values):
    """Return ``'exact'`` or ``'approx'`` for a collection of scalars, refusing mixtures."""
    kinds = {"approx" if isinstance(v, Ball) else "exact" for v in values}
    if len(kinds) > 1:
        raise ModeError("exact and approximate scalars mixed in one computation")
    return kinds.pop() if kinds else "exact"


def is_exact_zero(x):
    if isinstance(x, Ball):
        return x.mid.is_zero() and x.rad.is_zero()
    return x == 0


def zero_status(x, tol=None):
    """Classify a residual as ``pass`` / ``fail`` / ``inconclusive``.

    Exact scalars pass only when they are exactly zero.  A ball passes when it
    lies entirely inside ``[-tol, tol]`` and fails when it lies entirely
    outside.
    """
    if not isinstance(x, Ball):
        return "pass" if x == 0 else "fail"
    if tol is None:
        raise ValueError("approximate residuals need a tolerance")
    tol = Fraction(tol)
    upper = Fraction(*x.upper_abs().as_integer_ratio())
    lower = Fraction(*x.lower_abs().as_integer_ratio())
    if upper <= tol:
        return "pass"
    if lower > tol:
        return "fail"
    return "inconclusive"


def nonzero_status(x):
    if not isinstance(x, Ball):
        return "fail" if x == 0 else "pass"
    if x.certainly_nonzero():
        return "pass"
    return "fail" if is_exact_zero(x) else "inconclusive"


def worst_status(statuses):
    statuses = list(statuses)
    if "fail" in statuses:
        return "fail"
    if "inconclusive" in statuses:
        return "inconclusive"
    return "pass"


def format_scalar(x):
    if isinstance(x, Ball):
        return str(x)
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def sum_series(term, ratio, onset=0, target_bits=DEFAULT_PREC, max_terms=MAX_TERMS):
    """Sum ``term(0) + term(1) + ...`` with a certified truncation bound.

    ``ratio`` must bound ``|term(k+1) / term(k)|`` for every ``k >= onset``.
    Summation runs at ``target_bits + GUARD_BITS`` and stops once the geometric
    tail bound ``|term(X)| * r / (1 - r)`` falls below ``2**-(target_bits+2)``
    times the partial sum (or absolutely, for series smaller than
    ``2**-target_bits``).  The tail bound is folded into the returned radius.
    """
    r = as_rational(ratio) if not isinstance(ratio, Fraction) else ratio
    if r < 0 or r >= 1:
        raise ConvergenceError(f"ratio bound must satisfy 0 <= r < 1, got {r}")
    if onset < 0:
        raise ValueError("onset index must be nonnegative")
    if onset > max_terms:
        raise ResourceError(f"onset index {onset} exceeds the {max_terms}-term cap")
    wp = target_bits + GUARD_BITS
    tail_factor = r / (1 - r)
    rel = Fraction(1, 2 ** (target_bits + 2))
    tiny = Fraction(1, 2**target_bits)
    total = Ball(0, prec=wp)
    for k in range(max_terms + 1):
        t = term(k)
        if not isinstance(t, Ball):
            t = Ball(t, prec=wp)
        total = total + t
        if k < onset:
            continue
        tail = Fraction(*t.upper_abs().as_integer_ratio()) * tail_factor
        magnitude = Fraction(*total.lower_abs().as_integer_ratio())
        if tail <= rel * magnitude or (magnitude < tiny and tail <= rel * tiny):
            if tail:
                total = Ball._raw(total.mid, _up().add(total.rad, _up_from(tail)), wp)
            return total
    raise ResourceError(f"series did not reach {target_bits} bits within {max_terms} terms")
