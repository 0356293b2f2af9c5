"""Finite expansions on the exponent lattice {m*gamma + j}.

Functions of interest near the origin behave like sums of powers
x**(m*gamma + j) with integer m >= 0, j.  An :class:`Expansion` stores a
finite set of such terms together with a truncation order N: terms with
exponent value >= N are dropped, so the object represents its function
modulo O(x**N).

Exponents are kept as integer pairs (m, j).  When gamma = p/q is rational
the pair is canonicalized to 0 <= m < q via (m, j) ~ (m - q, j + p), which
makes exponent collisions (e.g. gamma = 1/2: (2, 0) vs (0, 1)) merge
exactly instead of by floating-point comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (
    ExponentMinusOne,
    GammaMismatch,
    NonPositiveEnergy,
    TaylorOrderInsufficient,
)

PRUNE_REL = 1e-15


@lru_cache(maxsize=128)
def _lattice(gamma: float) -> tuple[int, int] | None:
    """(p, q) with gamma = p/q if gamma is rational with small denominator."""
    frac = Fraction(gamma).limit_denominator(1000)
    if abs(float(frac) - gamma) <= 1e-12 * max(1.0, abs(gamma)):
        return frac.numerator, frac.denominator
    return None


def canonical_pair(gamma: float, m: int, j: int) -> tuple[int, int]:
    """Reduce (m, j) modulo the lattice relation q*gamma = p."""
    lat = _lattice(gamma)
    if lat is None:
        return m, j
    p, q = lat
    k, m_red = divmod(m, q)
    return m_red, j + k * p


@dataclass(frozen=True)
class LatticeExponent:
    """Exponent m*gamma + j stored as the integer pair (m, j), m >= 0."""

    m: int
    j: int

    def value(self, gamma: float) -> float:
        return self.m * gamma + self.j


def _exact_value_num_den(gamma: float, m: int, j: int) -> tuple[int, int] | None:
    lat = _lattice(gamma)
    if lat is None:
        return None
    p, q = lat
    return m * p + j * q, q


def default_order(gamma: float) -> float:
    """Default truncation order used by the quasimode builder."""
    return 6.0 + 4.0 * gamma


@dataclass(frozen=True)
class Expansion:
    """Finite lattice expansion sum a_(m,j) x**(m*gamma+j), modulo x**order."""

    gamma: float
    order: float
    terms: tuple[tuple[int, int, complex], ...]

    def coefficient(self, m: int, j: int) -> complex:
        m, j = canonical_pair(self.gamma, m, j)
        for tm, tj, a in self.terms:
            if tm == m and tj == j:
                return a
        return 0.0j

    def exponents(self) -> tuple[LatticeExponent, ...]:
        return tuple(LatticeExponent(m, j) for m, j, _ in self.terms)

    def values(self) -> tuple[float, ...]:
        return tuple(m * self.gamma + j for m, j, _ in self.terms)


def from_terms(gamma: float, order: float,
               items: list[tuple[int, int, complex]]) -> Expansion:
    """Canonicalize, merge, truncate at order and prune tiny coefficients."""
    acc: dict[tuple[int, int], complex] = {}
    for m, j, a in items:
        m, j = canonical_pair(gamma, m, j)
        if m < 0:
            raise ValueError("lattice exponent needs m >= 0")
        if m * gamma + j >= order - 1e-14:
            continue
        acc[(m, j)] = acc.get((m, j), 0.0j) + complex(a)
    if acc:
        top = max(abs(a) for a in acc.values())
        acc = {k: a for k, a in acc.items() if abs(a) > PRUNE_REL * top}
    terms = sorted(((m, j, a) for (m, j), a in acc.items()),
                   key=lambda t: t[0] * gamma + t[1])
    return Expansion(gamma, float(order), tuple(terms))


def constant(gamma: float, order: float, c: complex) -> Expansion:
    return from_terms(gamma, order, [(0, 0, complex(c))])


def scale(u: Expansion, c: complex) -> Expansion:
    return from_terms(u.gamma, u.order, [(m, j, a * c) for m, j, a in u.terms])


def add(u: Expansion, v: Expansion, cu: complex = 1.0, cv: complex = 1.0) -> Expansion:
    """cu*u + cv*v on a shared lattice; order is the weaker of the two."""
    if u.gamma != v.gamma:
        raise GammaMismatch(f"{u.gamma} vs {v.gamma}")
    order = min(u.order, v.order)
    items = [(m, j, a * cu) for m, j, a in u.terms]
    items += [(m, j, a * cv) for m, j, a in v.terms]
    return from_terms(u.gamma, order, items)


def mul(u: Expansion, v: Expansion) -> Expansion:
    """Cauchy product; exponent pairs add, truncation at the weaker order."""
    if u.gamma != v.gamma:
        raise GammaMismatch(f"{u.gamma} vs {v.gamma}")
    order = min(u.order, v.order)
    items = []
    for m1, j1, a1 in u.terms:
        for m2, j2, a2 in v.terms:
            items.append((m1 + m2, j1 + j2, a1 * a2))
    return from_terms(u.gamma, order, items)


def differentiate(u: Expansion) -> Expansion:
    """Termwise derivative; the constant term (exponent 0) is dropped."""
    items = []
    for m, j, a in u.terms:
        if m == 0 and j == 0:
            continue
        items.append((m, j - 1, a * (m * u.gamma + j)))
    return from_terms(u.gamma, u.order - 1.0, items)


def _has_minus_one(u: Expansion) -> bool:
    for m, j, _ in u.terms:
        nd = _exact_value_num_den(u.gamma, m, j)
        if nd is not None:
            if nd[0] == -nd[1]:
                return True
        elif m == 0 and j == -1:
            return True
    return False


def antiderivative_from_b(u: Expansion, constant_term: complex) -> Expansion:
    """Termwise primitive oriented from the right endpoint.

    Represents F(x) = constant_term - sum a/(alpha+1) x**(alpha+1), so that
    F' = -u termwise.  The integration constant is always supplied by the
    caller (typically from quadrature); it is the exponent-0 coefficient.
    Requires -1 not in the exponent set.
    """
    if _has_minus_one(u):
        raise ExponentMinusOne("cannot antidifferentiate x**-1 termwise")
    items: list[tuple[int, int, complex]] = [(0, 0, complex(constant_term))]
    for m, j, a in u.terms:
        items.append((m, j + 1, -a / (m * u.gamma + j + 1.0)))
    return from_terms(u.gamma, u.order + 1.0, items)


def evaluate(u: Expansion, x: float) -> complex:
    """Value at x > 0 (x = 0 allowed when no negative exponents are present)."""
    if x == 0.0:
        if any(m * u.gamma + j < 0 for m, j, _ in u.terms):
            raise ZeroDivisionError("negative exponent at x = 0")
        return u.coefficient(0, 0)
    total = 0.0j
    for m, j, a in u.terms:
        total += a * x ** (m * u.gamma + j)
    return total


def _binomial(alpha: float, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= (alpha - i) / (i + 1)
    return out


def compose_power(p, E: float, alpha: float, order: float) -> Expansion:
    """Expansion of (E - x**gamma W(x))**alpha through x**order.

    Binomial series in t = x**gamma W(x)/E; exponent set {m*gamma + n,
    m >= 1, n >= 0} plus the constant E**alpha.
    """
    if E <= 0.0:
        raise NonPositiveEnergy(f"E = {E}")
    gamma = p.gamma
    n_needed = max(0, math.ceil(order - gamma))
    if len(p.w_taylor) < n_needed + 1:
        raise TaylorOrderInsufficient(
            f"need {n_needed + 1} Taylor coefficients of W, have {len(p.w_taylor)}")
    t = from_terms(gamma, order,
                   [(1, n, p.w_taylor[n] / E) for n in range(n_needed + 1)])
    result = constant(gamma, order, E ** alpha)
    tm = constant(gamma, order, 1.0)
    m = 1
    while m * gamma < order:
        tm = mul(tm, t)
        if not tm.terms:
            break
        coef = _binomial(alpha, m) * (-1.0) ** m * E ** alpha
        result = add(result, tm, 1.0, coef)
        m += 1
    return result


def dump(u: Expansion) -> str:
    """One term per line, 'm j coefficient', ascending exponent value."""
    lines = []
    for m, j, a in u.terms:
        if a.imag == 0.0:
            lines.append(f"{m} {j} {a.real:.17g}")
        else:
            lines.append(f"{m} {j} {a.real:.17g}{a.imag:+.17g}j")
    return "\n".join(lines)
