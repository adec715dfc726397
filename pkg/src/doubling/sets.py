"""Finite subsets of a weighted group and exact product/inverse set arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator

from .errors import SpecError
from .groups import WeightedGroup


@dataclass(frozen=True, eq=False)
class GSubset:
    """A finite set of group elements with exact rational measure."""

    owner: WeightedGroup
    elements: frozenset = field(default_factory=frozenset)

    @property
    def measure(self) -> Fraction:
        return len(self.elements) * self.owner.weight

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.elements

    def __iter__(self) -> Iterator:
        return iter(self.elements)

    def sorted_elements(self) -> list:
        return sorted(self.elements, key=self.owner.element_key)

    def encode(self) -> list:
        """Canonically ordered JSON form of the element list."""
        return [self.owner.encode_element(x) for x in self.sorted_elements()]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"<GSubset |A|={len(self.elements)} of {self.owner.name}>"


def subset(group: WeightedGroup, elems: Iterable) -> GSubset:
    """Validated construction: every element must belong to the group."""
    out = frozenset(elems)
    for x in out:
        if not group.contains(x):
            raise ValueError(f"{x!r} is not an element of {group.name}")
    return GSubset(group, out)


def decode_subset(group: WeightedGroup, doc: Any, path: str = "") -> GSubset:
    """Parse a subset-spec: {"elements": [...]} with handles encoded per kind."""
    if not isinstance(doc, dict) or set(doc) != {"elements"}:
        raise SpecError(path, 'subset spec must be an object with exactly the key "elements"')
    items = doc["elements"]
    if not isinstance(items, list):
        raise SpecError(f"{path}/elements", "expected a list")
    decoded = [
        group.decode_element(v, f"{path}/elements/{i}") for i, v in enumerate(items)
    ]
    return GSubset(group, frozenset(decoded))


def _require_same_owner(a: GSubset, b: GSubset) -> None:
    if a.owner is b.owner:
        return
    try:
        if a.owner.signature == b.owner.signature:
            return
    except NotImplementedError:
        pass
    raise ValueError(f"subsets live in different groups: {a.owner.name} vs {b.owner.name}")


def mul_set(a: GSubset, b: GSubset) -> GSubset:
    """Exact product set {xy : x in A, y in B}."""
    _require_same_owner(a, b)
    op = a.owner.op
    out = {op(x, y) for x in a.elements for y in b.elements}
    return GSubset(a.owner, frozenset(out))


def inv_set(a: GSubset) -> GSubset:
    """Elementwise inverse; measure is preserved."""
    inv = a.owner.inv
    return GSubset(a.owner, frozenset(inv(x) for x in a.elements))


def square(a: GSubset) -> GSubset:
    return mul_set(a, a)


def diff_set(a: GSubset, b: GSubset) -> GSubset:
    """A B^{-1}, the set feeding the Ruzsa distance."""
    return mul_set(a, inv_set(b))


def is_symmetric(a: GSubset) -> bool:
    return a.elements == inv_set(a).elements


def translate(a: GSubset, left=None, right=None) -> GSubset:
    """gAh for optional left/right translators."""
    out = a.elements
    op = a.owner.op
    if left is not None:
        out = frozenset(op(left, x) for x in out)
    if right is not None:
        out = frozenset(op(x, right) for x in out)
    return GSubset(a.owner, out)
