"""Doubling constants, exact Ruzsa-distance calculus, and quotient bounds.

The Ruzsa distance d(A,B) = log(mu(A B^-1) / sqrt(mu(A) mu(B))) is never
stored as a logarithm: everything works with the squared multiplicative form
mu(AB^-1)^2 / (mu(A) mu(B)), which is rational, and all bound checks reduce
to cross-multiplied integer comparisons (the uniform weights cancel).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .quotients import QuotientStructure
from .rationals import put
from .sets import GSubset, diff_set, inv_set, is_symmetric, mul_set

VARIANTS = ("symmetric", "cube", "two-constant")


@dataclass(frozen=True)
class DoublingStats:
    """K = mu(A^2)/mu(A); K2 = mu(A^-1 A)/mu(A); K1 aliases K."""

    K: Fraction
    K1: Fraction
    K2: Fraction
    symmetric: bool

    def to_json(self) -> dict:
        out: dict = {"symmetric": self.symmetric}
        put(out, "K", self.K)
        put(out, "K1", self.K1)
        put(out, "K2", self.K2)
        return out


def doubling_stats(a: GSubset) -> DoublingStats:
    if not a.elements:
        raise ValueError("doubling constants need a nonempty subset")
    size = len(a.elements)
    sq = len(mul_set(a, a).elements)
    inv_a = inv_set(a)
    k2 = len(mul_set(inv_a, a).elements)
    return DoublingStats(
        K=Fraction(sq, size),
        K1=Fraction(sq, size),
        K2=Fraction(k2, size),
        symmetric=a.elements == inv_a.elements,
    )


@dataclass(frozen=True)
class RuzsaSq:
    """mu(A B^-1)^2 / (mu(A) mu(B)): the square of exp(d(A, B))."""

    value: Fraction


def ruzsa_sq(a: GSubset, b: GSubset) -> RuzsaSq:
    if not a.elements or not b.elements:
        raise ValueError("Ruzsa distance needs nonempty subsets")
    d = len(diff_set(a, b).elements)
    return RuzsaSq(Fraction(d * d, len(a.elements) * len(b.elements)))


def ruzsa_triangle_check(a: GSubset, b: GSubset, c: GSubset) -> bool:
    """value(A,C) <= value(A,B) * value(B,C), the triangle inequality squared."""
    return ruzsa_sq(a, c).value <= ruzsa_sq(a, b).value * ruzsa_sq(b, c).value


@dataclass(frozen=True)
class QuotientDoublingCheck:
    """One quotient-doubling bound: mu_Q(piA^2) against bound * mu_Q(piA)."""

    variant: str
    lhs: Fraction            # mu_Q(pi A^2)
    rhs: Fraction            # bound * mu_Q(pi A)
    bound: Fraction          # K^2, K^3, or K1*K2
    quotient_doubling: Fraction
    passed: bool

    def to_json(self) -> dict:
        out: dict = {"variant": self.variant, "pass": self.passed}
        put(out, "lhs", self.lhs)
        put(out, "rhs", self.rhs)
        put(out, "bound", self.bound)
        put(out, "quotient_doubling", self.quotient_doubling)
        return out


def _variant_pass(variant: str, a: int, a2: int, ainva: int, p: int, p2: int) -> bool:
    # cross-multiplied integer forms; uniform weights cancel on both sides
    if variant == "symmetric":
        return p2 * a * a <= a2 * a2 * p
    if variant == "cube":
        return p2 * a * a * a <= a2 * a2 * a2 * p
    return p2 * a * a <= a2 * ainva * p


def quotient_doubling_check(
    a: GSubset, q: QuotientStructure, variant: str
) -> QuotientDoublingCheck:
    """Check one bound on the doubling of pi(A).

    variant "symmetric":    needs A = A^-1; bound K^2
    variant "cube":         any A;          bound K^3
    variant "two-constant": any A;          bound K1 * K2

    A False flag on valid inputs is a theorem-violation event: recorded by
    callers with a replay certificate, never raised here.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not a.elements:
        raise ValueError("quotient doubling needs a nonempty subset")
    if variant == "symmetric" and not is_symmetric(a):
        raise ValueError('variant "symmetric" needs a symmetric subset')
    size = len(a.elements)
    a2 = len(mul_set(a, a).elements)
    ainva = len(mul_set(inv_set(a), a).elements) if variant == "two-constant" else 0
    pi_a = q.image(a)
    p = len(pi_a.elements)
    p2 = len(mul_set(pi_a, pi_a).elements)

    k = Fraction(a2, size)
    if variant == "symmetric":
        bound = k * k
    elif variant == "cube":
        bound = k * k * k
    else:
        bound = k * Fraction(ainva, size)
    w_q = q.quotient_weight
    return QuotientDoublingCheck(
        variant=variant,
        lhs=p2 * w_q,
        rhs=bound * p * w_q,
        bound=bound,
        quotient_doubling=Fraction(p2, p),
        passed=_variant_pass(variant, size, a2, ainva, p, p2),
    )


def is_coset_of_subgroup(group, elems: frozenset) -> bool:
    """Is A a (left or right) coset of some subgroup?

    Equivalent test: a0^-1 A is a subgroup for any fixed a0 in A.
    """
    if not elems:
        return False
    a0 = min(elems, key=group.element_key)
    ia0 = group.inv(a0)
    h = frozenset(group.op(ia0, x) for x in elems)
    for x in h:
        for y in h:
            if group.op(x, y) not in h:
                return False
    return True


def coset_criterion_scan(group) -> tuple[int, list[tuple]]:
    """Exhaustively verify: d(A,A) = 0 iff A is a coset of a subgroup.

    Runs over every nonempty subset of a finite group.  The left side is the
    product-set count |A A^-1| == |A|; the right side is the independent
    closure test.  Returns (number of subsets checked, mismatch witnesses).
    """
    n = group.order
    if n is None:
        raise ValueError("exhaustive scan needs a finite group")
    elems = list(group.elements())
    index = {x: i for i, x in enumerate(elems)}
    op_t = [[index[group.op(x, y)] for y in elems] for x in elems]
    inv_t = [index[group.inv(x)] for x in elems]

    mismatches: list[tuple] = []
    checked = 0
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        checked += 1
        prod: set = set()
        for x in members:
            row = op_t[x]
            for y in members:
                prod.add(row[inv_t[y]])
        distance_zero = len(prod) == len(members)

        ia0 = inv_t[members[0]]
        row0 = op_t[ia0]
        h = [row0[x] for x in members]
        hset = set(h)
        coset = True
        for x in h:
            row = op_t[x]
            for y in h:
                if row[y] not in hset:
                    coset = False
                    break
            if not coset:
                break

        if distance_zero != coset:
            mismatches.append(tuple(elems[i] for i in members))
    return checked, mismatches
