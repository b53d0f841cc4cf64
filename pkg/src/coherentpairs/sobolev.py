"""Discrete Sobolev inner product of a coherent pair and its monic orthogonal polynomials.

``<f, g> = L0[f g] + lam * L1[Delta f Delta g]``.  For a coherent pair of the
second kind the Sobolev polynomials are tied to both MOP families by

    S_{n+1} - gamma_n S_n = P^(0)_{n+1},
    Delta S_{n+1} - gamma_n Delta S_n = (n+1) [P^(1)_n - tau_n P^(1)_{n-1}].

Taking the inner product of the first line with ``S_n`` fixes
``gamma_n = -<P^(0)_{n+1}, S_n> / <S_n, S_n>``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .coherence import poly_status, tau
from .errors import DegenerateFunctional
from .poly import FALLING, Polynomial, _ff_product, delta
from .scalar import Ball, as_rational, nonzero_status, worst_status


def sobolev_inner(f, g, pair, lam):
    """``L0[f g] + lam * L1[Delta f * Delta g]``."""
    lam = as_rational(lam)
    out = pair.L0.apply(f * g)
    if lam:
        out = out + lam * pair.L1.apply(delta(f) * delta(g))
    return out


def sobolev_gram(pair, lam, size):
    """``G[i][j] = <phi_i, phi_j>`` for ``0 <= i, j < size`` from the stored moments."""
    lam = as_rational(lam)
    nu0 = pair.L0.moments(2 * size)
    nu1 = pair.L1.moments(2 * size)

    def apply(nu, coeffs):
        acc = Fraction(0) if pair.mode == "exact" else Ball(0, prec=pair.L0.prec)
        for k, c in enumerate(coeffs):
            if c:
                acc = acc + c * nu[k]
        return acc

    G = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            v = apply(nu0, _ff_product([0] * i + [1], [0] * j + [1]))
            if lam and i and j:
                # Delta phi_i Delta phi_j = i j phi_{i-1} phi_{j-1}
                v = v + lam * i * j * apply(nu1, _ff_product([0] * (i - 1) + [1], [0] * (j - 1) + [1]))
            G[i][j] = G[j][i] = v
    return G


@dataclass
class SobolevSystem:
    pair: object
    lam: Fraction
    gram: list
    S: list
    norms: list
    gamma: list
    nmax: int
    notes: list = field(default_factory=list)

    @property
    def tol(self):
        return self.pair.tol


def build_sobolev(pair, lam, nmax):
    """Monic Sobolev orthogonal polynomials ``S_0 .. S_{nmax+1}`` by Gram-Schmidt on ``phi_k``.

    ``gamma_n`` is computed for ``0 <= n <= nmax`` so that ``connection_check``
    can test ``n <= nmax``.  A vanishing (or undecidable) Sobolev norm stops the
    construction with :class:`DegenerateFunctional`.
    """
    lam = as_rational(lam)
    size = nmax + 2
    G = sobolev_gram(pair, lam, size)
    zero = Fraction(0) if pair.mode == "exact" else Ball(0, prec=pair.L0.prec)
    rows, norms = [], []
    for n in range(size):
        row = [Fraction(0)] * n + [Fraction(1)]
        for k in range(n):
            proj = sum((rows[k][j] * G[n][j] for j in range(k + 1)), zero)
            f = proj / norms[k]
            for j in range(k + 1):
                row[j] = row[j] - f * rows[k][j]
        h = sum((row[j] * G[n][j] for j in range(n + 1)), zero)
        if nonzero_status(h) != "pass":
            raise DegenerateFunctional(f"Sobolev Gram matrix is singular (or undecided) at order {n}")
        rows.append(row)
        norms.append(h)
    S = [Polynomial(r, FALLING) for r in rows]
    gamma = []
    for n in range(nmax + 1):
        gamma.append(-sobolev_inner(pair.mops0.P(n + 1), S[n], pair, lam) / norms[n])
    return SobolevSystem(pair, lam, G, S, norms, gamma, nmax)


def orthogonality_status(system):
    """Status of ``<S_k, S_n> = 0`` for ``k < n <= nmax + 1`` (and ``<S_n, S_n> != 0``)."""
    st = []
    for n, Sn in enumerate(system.S):
        for k in range(n):
            st.append(poly_status(Polynomial([sobolev_inner(system.S[k], Sn, system.pair, system.lam)]), system.tol))
        st.append(nonzero_status(system.norms[n]))
    return worst_status(st)


def connection_check(system, n):
    """Residual polynomials of both connection lines at index ``n >= 1``."""
    pair, S, g = system.pair, system.S, system.gamma[n]
    line1 = S[n + 1] - S[n] * g - pair.mops0.P(n + 1)
    rhs = (pair.mops1.P(n) - pair.mops1.P(n - 1) * tau(pair, n)) * (n + 1)
    line2 = delta(S[n + 1]) - delta(S[n]) * g - rhs
    return dict(
        n=n,
        gamma=g,
        line1=line1,
        line2=line2,
        line1_status=poly_status(line1, system.tol),
        line2_status=poly_status(line2, system.tol),
    )


def initial_condition_status(system):
    """``S_1 = P^(0)_1``."""
    return poly_status(system.S[1] - system.pair.mops0.P(1), system.tol)


def collapse_status(system):
    """At ``lam = 0``: ``S_n = P^(0)_n`` for every constructed ``n`` and ``gamma_n = 0``."""
    st = [poly_status(S - system.pair.mops0.P(n), system.tol) for n, S in enumerate(system.S)]
    st += [poly_status(Polynomial([gm]), system.tol) for gm in system.gamma]
    return worst_status(st)
