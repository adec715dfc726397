"""Structure-set extraction: a saturated subset keeping most of the measure
while its projection has quotient doubling below alpha * K.

For alpha > 1 the admissible thresholds are the realized fiber values s with
mu_Q(piA_s * piA_s) < alpha * K * mu_Q(piA_s); the set is never empty, and
taking the smallest admissible s yields B = preimage(piA_s) intersect A with
mu(B) > (alpha-1)/alpha * mu(A) strictly.  Both certificate inequalities are
rechecked exactly before returning.  The classical case split on whether the
admissible thresholds accumulate at zero collapses here: there are finitely
many thresholds and they are all positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConsistencyError
from .fibers import fiber_profile, level_family
from .quotients import QuotientStructure
from .rationals import fmt, put
from .sets import GSubset, mul_set


@dataclass(frozen=True)
class ExtractionCertificate:
    alpha: Fraction
    K: Fraction
    chosen_s: Fraction
    B: GSubset
    measure_ratio: Fraction        # mu(B) / mu(A)
    quotient_doubling: Fraction    # mu_Q(piB^2) / mu_Q(piB)
    admissible: tuple[Fraction, ...]

    def to_json(self, include_elements: bool = True) -> dict:
        out: dict = {"B_size": len(self.B.elements)}
        put(out, "alpha", self.alpha)
        put(out, "K", self.K)
        put(out, "chosen_s", self.chosen_s)
        put(out, "measure_ratio", self.measure_ratio)
        put(out, "quotient_doubling", self.quotient_doubling)
        put(out, "measure_floor", (self.alpha - 1) / self.alpha)
        put(out, "doubling_ceiling", self.alpha * self.K)
        out["admissible"] = [fmt(s) for s in self.admissible]
        if include_elements:
            out["B"] = self.B.encode()
        return out


def _threshold_scan(a: GSubset, q: QuotientStructure, alpha: Fraction):
    if alpha <= 1:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if not a.elements:
        raise ValueError("extraction needs a nonempty subset")
    size = len(a.elements)
    a2 = len(mul_set(a, a).elements)
    family = level_family(fiber_profile(a, q))
    admissible = []
    for t, level in zip(family.thresholds, family.levels):
        sq = len(mul_set(level, level).elements)
        # mu_Q(L*L) < alpha * K * mu_Q(L), cross-multiplied over integers
        if sq * size * alpha.denominator < alpha.numerator * a2 * len(level.elements):
            admissible.append(t)
    return admissible, family, Fraction(a2, size)


def admissible_thresholds(a: GSubset, q: QuotientStructure, alpha: Fraction) -> list[Fraction]:
    """Realized fiber values whose superlevel set already has small doubling."""
    alpha = Fraction(alpha)
    admissible, _, _ = _threshold_scan(a, q, alpha)
    return admissible


def extract_subset(a: GSubset, q: QuotientStructure, alpha: Fraction) -> ExtractionCertificate:
    """Build the certified structure set for one alpha.

    Prefers the smallest admissible threshold (largest B); if that one missed
    the measure floor, scans upward.  Exhausting the admissible set without a
    valid certificate contradicts the underlying theorem and raises with a
    replay payload.
    """
    alpha = Fraction(alpha)
    admissible, family, k = _threshold_scan(a, q, alpha)
    if not admissible:
        raise ConsistencyError(
            "no admissible threshold: contradiction with the extraction theorem",
            {"alpha": fmt(alpha), "subset": a.encode()},
        )
    size = len(a.elements)
    levels = dict(zip(family.thresholds, family.levels))
    for s in admissible:
        cosets = levels[s].elements
        b = q.restrict_to_cosets(a, cosets)
        # mu(B) > (alpha-1)/alpha * mu(A), cross-multiplied
        if len(b.elements) * alpha.numerator > (alpha.numerator - alpha.denominator) * size:
            level = levels[s]
            sq = mul_set(level, level)
            return ExtractionCertificate(
                alpha=alpha,
                K=k,
                chosen_s=s,
                B=b,
                measure_ratio=Fraction(len(b.elements), size),
                quotient_doubling=Fraction(len(sq.elements), len(level.elements)),
                admissible=tuple(admissible),
            )
    raise ConsistencyError(
        "no admissible threshold satisfies the measure bound: implementation bug",
        {"alpha": fmt(alpha), "subset": a.encode(), "admissible": [fmt(s) for s in admissible]},
    )
