"""Monic orthogonal polynomials from moment functionals.

Two independent constructions are run and compared on every build:

* Gram-Schmidt against the falling-factorial Gram matrix ``L[phi_i phi_j]``;
* the modified Chebyshev algorithm, fed the falling-factorial moments as
  modified moments (``phi_{k+1} = (x - k) phi_k`` is the auxiliary recurrence).

The polynomials themselves come from the three-term recurrence, expressed in
the falling-factorial basis.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConsistencyError, DegenerateFunctional, InvalidParameter
from .poly import FALLING, Polynomial, _ff_product, delta, expand_in_basis, ff_basis
from .scalar import Ball, is_exact, is_exact_zero, nonzero_status, worst_status, zero_status


@dataclass
class MOPSequence:
    """Recurrence data and polynomials ``P_0 .. P_nmax`` of one functional.

    ``beta[0]`` holds ``h_0`` (the usual convention of the Chebyshev
    algorithm); ``beta[n] = h_n / h_{n-1}`` for ``n >= 1``.  ``alpha`` runs one
    index further than needed for ``P_nmax`` so that ``P_{nmax+1}`` is
    available when the moments allowed it.
    """

    functional: object
    alpha: list
    beta: list
    norms: list
    polys: list
    truncated_at: int = None
    notes: list = field(default_factory=list)

    @property
    def nmax(self):
        return len(self.norms) - 1

    @property
    def mode(self):
        return self.functional.mode

    def P(self, n):
        if n < 0:
            return Polynomial((), FALLING)
        if n >= len(self.polys):
            raise DegenerateFunctional(f"P_{n} not available (built to degree {len(self.polys) - 1})")
        return self.polys[n]

    def h(self, n):
        if n >= len(self.norms):
            raise DegenerateFunctional(f"h_{n} not available (built to degree {self.nmax})")
        return self.norms[n]


def _zero(L):
    return Fraction(0) if L.mode == "exact" else Ball(0, prec=L.prec)


def _usable(h):
    return nonzero_status(h) == "pass"


def gram_schmidt(L, nmax):
    """Path one: Gram-Schmidt over ``phi_0, phi_1, ...`` using the Gram matrix.

    Returns ``(alpha, norms, coeff_rows, stop)`` where ``coeff_rows[n]`` are the
    falling-factorial coefficients of ``P_n`` and ``stop`` is the first index
    with a vanishing (or undecidable) norm, else ``None``.
    """
    size = nmax + 2
    nu = L.moments(2 * size - 2)
    G = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            prod = _ff_product([0] * i + [1], [0] * j + [1])
            acc = _zero(L)
            for k, c in enumerate(prod):
                if c:
                    acc = acc + c * nu[k]
            G[i][j] = G[j][i] = acc
    rows, norms = [], []
    stop = None
    for n in range(size):
        row = [Fraction(0)] * n + [Fraction(1)]
        for k in range(n):
            proj = sum((rows[k][j] * G[n][j] for j in range(k + 1)), _zero(L))
            f = proj / norms[k]
            for j in range(k + 1):
                row[j] = row[j] - f * rows[k][j]
        rows.append(row)
        h = sum((row[j] * G[n][j] for j in range(n + 1)), _zero(L))
        norms.append(h)
        if not _usable(h):
            stop = n
            break
    alpha = []
    for n in range(len(rows) - 1):
        # coefficient of phi_n in x P_n is c_{n-1} + n; in P_{n+1} it is row[n]
        below = rows[n][n - 1] if n else 0
        alpha.append(below + n - rows[n + 1][n])
    return alpha, norms, rows, stop


def modified_chebyshev(moments, count):
    """Path two: modified Chebyshev algorithm with auxiliary ``a_k = k``, ``b_k = 0``.

    Needs ``moments[0 .. 2*count - 1]``; returns ``(alpha, beta)`` of length up
    to ``count`` and the first index whose norm vanishes (``None`` if none).
    """
    if len(moments) < 2 * count:
        raise ValueError(f"need {2 * count} moments, got {len(moments)}")
    m0 = moments[0]
    if not _usable(m0):
        return [], [], 0
    alpha = [moments[1] / m0]
    beta = [m0]
    prev2 = [Fraction(0)] * (2 * count)
    prev = list(moments[: 2 * count])
    for k in range(1, count):
        cur = [None] * (2 * count)
        for l in range(k, 2 * count - k):
            v = prev[l + 1] - (alpha[k - 1] - l) * prev[l]
            if k > 1:
                v = v - beta[k - 1] * prev2[l]
            cur[l] = v
        if not _usable(cur[k]):
            return alpha, beta, k
        alpha.append(k + cur[k + 1] / cur[k] - prev[k] / prev[k - 1])
        beta.append(cur[k] / prev[k - 1])
        prev2, prev = prev, cur
    return alpha, beta, None


def _same(a, b):
    if is_exact(a) and is_exact(b):
        return a == b
    return a.overlaps(b)


def _recurrence_polys(alpha, beta, count):
    polys = [Polynomial([1], FALLING)]
    prev = Polynomial((), FALLING)
    for n in range(count - 1):
        nxt = polys[-1].mul_x() - polys[-1] * alpha[n]
        if n:
            nxt = nxt - prev * beta[n]
        prev = polys[-1]
        polys.append(nxt)
    return polys


def build_mops(L, nmax):
    """Monic orthogonal polynomials ``P_0 .. P_nmax`` with both construction paths compared.

    Finite-support functionals are capped at ``nmax <= support size - 1``.  A
    vanishing norm ``h_k`` truncates the sequence at degree ``k - 1``; the
    truncation index is stored in ``truncated_at``.
    """
    if nmax < 0:
        raise InvalidParameter("nmax must be nonnegative")
    size = L.support_size()
    if size is not None and nmax > size - 1:
        raise InvalidParameter(f"{L.describe()} has {size} support points, so nmax <= {size - 1}")
    g_alpha, g_norms, g_rows, g_stop = gram_schmidt(L, nmax)
    moments = L.moments(2 * nmax + 3)
    c_alpha, c_beta, c_stop = modified_chebyshev(moments, nmax + 2)

    usable = len(g_norms) if g_stop is None else g_stop
    usable = min(usable, nmax + 1)
    c_usable = len(c_beta) if c_stop is None else c_stop
    if min(c_usable, nmax + 1) != usable:
        raise ConsistencyError(
            f"{L.describe()}: construction paths disagree on the first vanishing norm"
        )
    for n in range(usable):
        if not _same(g_norms[n], c_beta[0] if n == 0 else c_beta[n] * g_norms[n - 1]):
            raise ConsistencyError(f"{L.describe()}: norms disagree between paths at n={n}")
        if n < len(g_alpha) and n < len(c_alpha) and not _same(g_alpha[n], c_alpha[n]):
            raise ConsistencyError(f"{L.describe()}: alpha disagrees between paths at n={n}")

    norms = g_norms[:usable]
    beta = [norms[0]] + [norms[n] / norms[n - 1] for n in range(1, usable)]
    alpha = c_alpha[: usable + 1] if L.mode == "approx" else g_alpha[: usable + 1]
    polys = _recurrence_polys(alpha, beta, min(usable + 1, len(alpha) + 1))
    seq = MOPSequence(L, alpha, beta, norms, polys)
    if usable <= nmax:
        seq.truncated_at = usable
        seq.notes.append(f"norm h_{usable} vanishes; sequence stops at degree {usable - 1}")
    for n in range(min(len(polys), len(g_rows))):
        if not all(_same(a, b) for a, b in zip(polys[n].coeffs, g_rows[n])):
            raise ConsistencyError(f"{L.describe()}: P_{n} differs between paths")
    return seq


def orthogonality_residuals(seq):
    """``(n, k, L[phi_k P_n])`` for ``k < n`` plus ``(n, n, L[phi_n P_n] - h_n)``."""
    L = seq.functional
    out = []
    for n in range(seq.nmax + 1):
        P = seq.P(n)
        for k in range(n + 1):
            v = L.apply(P * ff_basis(k))
            out.append((n, k, v - seq.h(n) if k == n else v))
    return out


# structure relation ------------------------------------------------------


@dataclass
class StructureReport:
    n: int
    s: int
    eps: list
    below: list
    anchor: object
    anchor_formula: object
    status: str
    notes: list = field(default_factory=list)


def anchor_formula(seq, pair, n):
    """Closed form of ``eps_{n, n-s}`` in terms of norms and the leading coefficient of ``psi``."""
    s, d1, d2 = pair.class_s, pair.phi.degree, pair.psi.degree
    out = Fraction(0)
    if d2 == s + 1:
        out = out + seq.h(n + 1) * pair.psi.to("monomial").leading() / seq.h(n + 1 - d2)
    if d1 == s + 2:
        out = out - seq.h(n + 1) * (n + 2 - d1) / seq.h(n + 2 - d1)
    return out


def structure_table(L, pair, n, seq=None, tol=None):
    """Expand ``phi * Delta P_{n+1}`` over ``P_0 .. P_{n + deg phi}``.

    Coefficients below ``n - s`` must vanish and ``eps_{n, n-s}`` must not; the
    anchor is also compared with its closed form.  ``tol`` is required in
    approximate mode.
    """
    s = pair.class_s
    if n <= s:
        raise InvalidParameter(f"structure relation needs n > s = {s}, got n={n}")
    top = n + max(pair.phi.degree, 1)
    if seq is None or seq.nmax < top:
        seq = build_mops(L, top)
    target = pair.phi.to(FALLING) * delta(seq.P(n + 1))
    eps = expand_in_basis(target, seq.polys[: target.degree + 1])
    below = [zero_status(eps[k], tol) for k in range(n - s)]
    anchor = eps[n - s]
    formula = anchor_formula(seq, pair, n)
    st = [worst_status(below) if below else "pass", nonzero_status(anchor)]
    notes = []
    diff = zero_status(anchor - formula, tol)
    if diff != "pass":
        notes.append(f"anchor {anchor} differs from closed form {formula}")
    st.append(diff)
    if "fail" in below:
        notes.append("nonzero coefficient below n - s: structure violated")
    return StructureReport(n, s, eps, below, anchor, formula, worst_status(st), notes)


def prop2_values(L, pair, n, seq=None):
    """``L[phi Delta phi_k Delta P_n]`` for ``1 <= k <= n - s`` (the last one need not vanish)."""
    s = pair.class_s
    if seq is None or seq.nmax < n:
        seq = build_mops(L, n)
    dP = delta(seq.P(n))
    phi = pair.phi.to(FALLING)
    return [(k, L.apply(phi * (ff_basis(k - 1) * k) * dP)) for k in range(1, max(n - s, 0) + 1)]


def prop2_check(L, pair, n, seq=None, tol=None):
    """Status of ``L[phi Delta phi_k Delta P_n] = 0`` for ``1 <= k < n - s``; vacuous when ``n <= s + 1``."""
    vals = prop2_values(L, pair, n, seq)
    statuses = [zero_status(v, tol) for k, v in vals if k < n - pair.class_s]
    return worst_status(statuses), vals
