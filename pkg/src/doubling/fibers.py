"""Fiber lengths, superlevel families, the layer-cake identity, and spillover.

The fiber length of A at a coset gH is f_A(gH) = w_H * |A intersect gH|,
which is representative-independent.  Since f_A takes finitely many values,
every "integral over t" below collapses to a telescoping sum over the
distinct realized fiber values; everything stays an exact rational.

In this finite setting the sigma-compact modification of a superlevel family
is the identity (every subset of a finite or discrete group is closed), so
superlevel sets are used directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import ConsistencyError
from .quotients import QuotientStructure
from .rationals import fmt
from .sets import GSubset, mul_set


@dataclass(frozen=True)
class FiberProfile:
    """The fiber length function of one subset over one quotient.

    `fibers` maps cosets with positive fiber to their exact value; its key
    set is exactly pi(A).
    """

    quotient: QuotientStructure
    source: GSubset
    fibers: Mapping

    @property
    def support(self) -> frozenset:
        return frozenset(self.fibers)

    def support_subset(self) -> GSubset:
        return self.quotient.coset_subset(self.fibers)

    def thresholds(self) -> list[Fraction]:
        """Distinct realized fiber values, increasing."""
        return sorted(set(self.fibers.values()))

    def superlevel(self, t: Fraction) -> frozenset:
        """Cosets with fiber length >= t (any t, not only realized values)."""
        if t <= 0:
            return self.support
        return frozenset(c for c, v in self.fibers.items() if v >= t)

    def to_json(self) -> dict:
        q = self.quotient.quotient
        cells = sorted(
            ((q.element_key(c), q.encode_element(c), v) for c, v in self.fibers.items()),
        )
        return {"cosets": [{"id": enc, "fiber": fmt(v)} for _, enc, v in cells]}


@dataclass(frozen=True)
class LevelFamily:
    """Superlevel sets at each realized threshold; nested downward."""

    thresholds: tuple[Fraction, ...]
    levels: tuple[GSubset, ...]

    def steps(self):
        """(delta_t, level) pairs for the telescoping layer-cake sums."""
        prev = Fraction(0)
        for t, level in zip(self.thresholds, self.levels):
            yield t - prev, level
            prev = t


def fiber_profile(a: GSubset, q: QuotientStructure) -> FiberProfile:
    if a.owner is not q.ambient and a.owner.signature != q.ambient.signature:
        raise ValueError("subset does not live in the ambient group of this quotient")
    counts: dict = {}
    project = q.project
    for x in a.elements:
        c = project(x)
        counts[c] = counts.get(c, 0) + 1
    w = q.subgroup_weight
    return FiberProfile(q, a, {c: n * w for c, n in counts.items()})


def level_family(profile: FiberProfile) -> LevelFamily:
    ts = profile.thresholds()
    levels = tuple(profile.quotient.coset_subset(profile.superlevel(t)) for t in ts)
    return LevelFamily(tuple(ts), levels)


def layer_cake(a: GSubset, q: QuotientStructure) -> tuple[Fraction, Fraction]:
    """mu_G(A) against the sum over thresholds of delta_t * mu_Q(superlevel).

    The two sides are computed independently and must agree exactly; a
    mismatch is an internal-consistency failure and raises.
    """
    lhs = a.measure
    family = level_family(fiber_profile(a, q))
    rhs = sum((dt * level.measure for dt, level in family.steps()), Fraction(0))
    if lhs != rhs:
        raise ConsistencyError(
            "layer-cake identity failed",
            {"lhs": fmt(lhs), "rhs": fmt(rhs), "subset": a.encode()},
        )
    return lhs, rhs


@dataclass(frozen=True)
class SpilloverResult:
    """Both spillover inequalities with all four sides.

    lhs_left  = mu_G(AB) >= rhs_left  = sum of delta_t * mu_Q(pi(A) * level_t(B))
    lhs_right = mu_G(BA) >= rhs_right = sum of delta_t * mu_Q(level_t(B) * pi(A))

    The right-hand form pairs with BA: in a nonabelian group mu(AB) can be
    strictly smaller than the layered sum for level * pi(A).
    """

    lhs_left: Fraction
    lhs_right: Fraction
    rhs_left: Fraction
    rhs_right: Fraction


def spillover_check(a: GSubset, b: GSubset, q: QuotientStructure) -> SpilloverResult:
    """Check both spillover inequalities; raise on any violation."""
    lhs_left = mul_set(a, b).measure
    lhs_right = mul_set(b, a).measure
    pi_a = q.image(a)
    family = level_family(fiber_profile(b, q))
    rhs_left = Fraction(0)
    rhs_right = Fraction(0)
    for dt, level in family.steps():
        rhs_left += dt * mul_set(pi_a, level).measure
        rhs_right += dt * mul_set(level, pi_a).measure
    if lhs_left < rhs_left or lhs_right < rhs_right:
        raise ConsistencyError(
            "spillover inequality failed",
            {
                "lhs_left": fmt(lhs_left),
                "lhs_right": fmt(lhs_right),
                "rhs_left": fmt(rhs_left),
                "rhs_right": fmt(rhs_right),
                "subset_a": a.encode(),
                "subset_b": b.encode(),
            },
        )
    return SpilloverResult(lhs_left, lhs_right, rhs_left, rhs_right)


def containment_check(a: GSubset, b: GSubset, q: QuotientStructure) -> bool:
    """Verify pi(A) * level_t(B) lands inside the t-superlevel of AB (both sides).

    True for every valid input; a False return is a bug detector, not an
    expected outcome.
    """
    pi_a = q.image(a)
    profile_b = fiber_profile(b, q)
    profile_ab = fiber_profile(mul_set(a, b), q)
    profile_ba = fiber_profile(mul_set(b, a), q)
    for t in profile_b.thresholds():
        level = q.coset_subset(profile_b.superlevel(t))
        left = mul_set(pi_a, level).elements
        if not left <= profile_ab.superlevel(t):
            return False
        right = mul_set(level, pi_a).elements
        if not right <= profile_ba.superlevel(t):
            return False
    return True
