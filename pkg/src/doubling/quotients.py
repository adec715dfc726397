"""Normal subgroups, quotient groups, and the Fubini weight convention.

Weights are arranged so that w_Q * w_H = w_G exactly: summing the subgroup
measure of each fiber against the quotient weight recovers the ambient
measure of any subset.  A quotient of a finite group materializes its coset
table; a projection quotient of a product group drops coordinates and works
for lazy ambient groups as long as the dropped factors are finite.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import CapError, SpecError
from .groups import ProductGroup, TableGroup, WeightedGroup
from .sets import GSubset, subset

SUBGROUP_ENUM_CAP = 64


def closure(group: WeightedGroup, seed: Iterable) -> frozenset:
    """Subgroup generated by `seed` (finite groups: products reach inverses)."""
    out: set = set()
    queue = [group.identity, *seed]
    while queue:
        x = queue.pop()
        if x in out:
            continue
        out.add(x)
        for y in list(out):
            for z in (group.op(x, y), group.op(y, x)):
                if z not in out:
                    queue.append(z)
    return frozenset(out)


def is_subgroup(group: WeightedGroup, elems: frozenset) -> bool:
    if group.identity not in elems:
        return False
    for x in elems:
        for y in elems:
            if group.op(x, y) not in elems:
                return False
    return True


def is_normal(group: WeightedGroup, elems: frozenset) -> bool:
    if group.order is None:
        raise ValueError("normality check needs a finite ambient group")
    for g in group.elements():
        ginv = group.inv(g)
        for h in elems:
            if group.op(group.op(g, h), ginv) not in elems:
                return False
    return True


def _structural_key(group: WeightedGroup) -> str | None:
    """Weight-independent cache key: two weight variants share their lattice."""
    try:
        spec = group.spec()
    except NotImplementedError:
        return None

    def strip(node):
        if isinstance(node, dict):
            return {k: strip(v) for k, v in node.items() if k != "weight"}
        if isinstance(node, list):
            return [strip(v) for v in node]
        return node

    return json.dumps(strip(spec), sort_keys=True, separators=(",", ":"))


# (structural key, order) -> (all subgroup handle-sets, normal handle-sets)
_SUBGROUP_CACHE: dict = {}


def _subgroup_lattice(group: WeightedGroup, cap: int) -> tuple[list[frozenset], list[frozenset]]:
    if group.order is None:
        raise ValueError("subgroup enumeration needs a finite group")
    if group.order > cap:
        raise CapError(f"subgroup enumeration capped at order {cap}, got {group.order}")
    key = (_structural_key(group), group.order)
    if key[0] is not None and key in _SUBGROUP_CACHE:
        return _SUBGROUP_CACHE[key]

    elems = list(group.elements())
    n = len(elems)
    index = {x: i for i, x in enumerate(elems)}
    op_t = [[index[group.op(a, b)] for b in elems] for a in elems]
    e = index[group.identity]

    def close(seed: frozenset) -> frozenset:
        out: set = set()
        queue = [e, *seed]
        while queue:
            x = queue.pop()
            if x in out:
                continue
            out.add(x)
            row = op_t[x]
            for y in list(out):
                z = row[y]
                if z not in out:
                    queue.append(z)
                z = op_t[y][x]
                if z not in out:
                    queue.append(z)
        return frozenset(out)

    trivial = frozenset({e})
    found = {trivial}
    queue = [trivial]
    while queue:
        current = queue.pop()
        for g in range(n):
            if g in current:
                continue
            bigger = close(current | {g})
            if bigger not in found:
                found.add(bigger)
                queue.append(bigger)

    inv_t = [next(i for i in range(n) if op_t[g][i] == e) for g in range(n)]

    def normal(sub: frozenset) -> bool:
        for g in range(n):
            row = op_t[g]
            ginv = inv_t[g]
            for h in sub:
                if op_t[row[h]][ginv] not in sub:
                    return False
        return True

    key_fn = group.element_key
    all_handles = sorted(
        (frozenset(elems[i] for i in s) for s in found),
        key=lambda s: (len(s), sorted(key_fn(x) for x in s)),
    )
    normal_index = {frozenset(elems[i] for i in s) for s in found if normal(s)}
    normal_handles = [s for s in all_handles if s in normal_index]
    result = (all_handles, normal_handles)
    if key[0] is not None:
        if len(_SUBGROUP_CACHE) > 512:
            _SUBGROUP_CACHE.clear()
        _SUBGROUP_CACHE[key] = result
    return result


def all_subgroups(group: WeightedGroup, cap: int = SUBGROUP_ENUM_CAP) -> list[frozenset]:
    """Every subgroup, found by closing generated subgroups one generator at a time."""
    return list(_subgroup_lattice(group, cap)[0])


def normal_subgroups(group: WeightedGroup, cap: int = SUBGROUP_ENUM_CAP) -> list[GSubset]:
    """All normal subgroups of a finite group, {e} and G included, canonical order."""
    return [GSubset(group, h) for h in _subgroup_lattice(group, cap)[1]]


class QuotientStructure:
    """A normal subgroup, its quotient group, the projection, and both weights."""

    def __init__(
        self,
        ambient: WeightedGroup,
        subgroup: GSubset,
        quotient_group: WeightedGroup,
        project: Callable,
        subgroup_weight: Fraction,
        description: dict,
    ) -> None:
        self.ambient = ambient
        self.subgroup = subgroup
        self.quotient = quotient_group
        self.project = project
        self.subgroup_weight = subgroup_weight
        self.quotient_weight = quotient_group.weight
        self._description = description
        assert self.quotient_weight * subgroup_weight == ambient.weight

    @property
    def subgroup_total(self) -> Fraction:
        """mu_H(H): total measure of the subgroup under its own weight."""
        return len(self.subgroup.elements) * self.subgroup_weight

    def image(self, a: GSubset) -> GSubset:
        """pi(A) as a subset of the quotient group."""
        if a.owner is not self.ambient and a.owner.signature != self.ambient.signature:
            raise ValueError("subset does not live in the ambient group of this quotient")
        proj = self.project
        return GSubset(self.quotient, frozenset(proj(x) for x in a.elements))

    def restrict_to_cosets(self, a: GSubset, cosets: frozenset) -> GSubset:
        """A intersected with the preimage of a set of cosets."""
        proj = self.project
        return GSubset(a.owner, frozenset(x for x in a.elements if proj(x) in cosets))

    def coset_subset(self, cosets: Iterable) -> GSubset:
        return GSubset(self.quotient, frozenset(cosets))

    def describe(self) -> dict:
        return dict(self._description)


def quotient(
    group: WeightedGroup,
    sub: GSubset | Iterable,
    subgroup_weight: str = "counting",
) -> QuotientStructure:
    """Quotient of a finite group by a normal subgroup; cosets become elements.

    `subgroup_weight` picks w_H (counting: 1, normalized: 1/|H|); the quotient
    weight is then forced to w_G / w_H.
    """
    if group.order is None:
        raise ValueError("general quotients need a finite ambient group; use projection_quotient")
    h_elems = sub.elements if isinstance(sub, GSubset) else frozenset(sub)
    if isinstance(sub, GSubset) and sub.owner is not group:
        raise ValueError("subgroup subset belongs to a different group")
    for x in h_elems:
        if not group.contains(x):
            raise ValueError(f"{x!r} is not an element of {group.name}")
    if not is_subgroup(group, h_elems):
        raise ValueError("not a subgroup: missing identity or not closed under the operation")
    if not is_normal(group, h_elems):
        raise ValueError("subgroup is not normal in the ambient group")
    if subgroup_weight == "counting":
        w_h = Fraction(1)
    elif subgroup_weight == "normalized":
        w_h = Fraction(1, len(h_elems))
    else:
        raise ValueError(f"unknown subgroup weight mode {subgroup_weight!r}")

    # Cosets indexed in order of first appearance along the canonical enumeration.
    proj: dict = {}
    reps: list = []
    for x in group.elements():
        if x in proj:
            continue
        cid = len(reps)
        reps.append(x)
        for h in h_elems:
            proj[group.op(x, h)] = cid
    q = len(reps)
    table = [[proj[group.op(reps[i], reps[j])] for j in range(q)] for i in range(q)]
    qgroup = TableGroup(table, weight=group.weight / w_h, name=f"{group.name}/H{len(h_elems)}")

    h_subset = sub if isinstance(sub, GSubset) else subset(group, h_elems)
    description = {
        "elements": [group.encode_element(x) for x in sorted(h_elems, key=group.element_key)],
        "weight": subgroup_weight,
    }
    return QuotientStructure(group, h_subset, qgroup, proj.__getitem__, w_h, description)


def projection_quotient(group: ProductGroup, keep: Sequence[int]) -> QuotientStructure:
    """Quotient of a product group by the product of its dropped factors.

    The kernel (all dropped factors) must be finite-enumerable; kept factors
    may be lazy.  Weights multiply per factor, so Fubini holds automatically.
    """
    if not isinstance(group, ProductGroup):
        raise ValueError("projection quotients are defined for product groups")
    keep_idx = sorted(set(keep))
    if not keep_idx:
        raise ValueError("keep set must be nonempty")
    if keep_idx[0] < 0 or keep_idx[-1] >= len(group.factors):
        raise ValueError(f"keep indices out of range 0..{len(group.factors) - 1}")
    drop_idx = [i for i in range(len(group.factors)) if i not in keep_idx]

    for i in drop_idx:
        if group.factors[i].order is None:
            raise ValueError(f"dropped factor {i} is infinite; kernel must be finite")

    w_h = Fraction(1)
    for i in drop_idx:
        w_h *= group.factors[i].weight

    identity = group.identity
    kernel: set = set()
    if drop_idx:
        from itertools import product as iter_product

        pools = [list(group.factors[i].elements()) for i in drop_idx]
        for combo in iter_product(*pools):
            element = list(identity)
            for slot, value in zip(drop_idx, combo):
                element[slot] = value
            kernel.add(tuple(element))
    else:
        kernel.add(identity)

    if len(keep_idx) == 1:
        qgroup: WeightedGroup = group.factors[keep_idx[0]]
        sole = keep_idx[0]

        def project(x, _i=sole):
            return x[_i]

    else:
        qgroup = ProductGroup([group.factors[i] for i in keep_idx])
        idx = tuple(keep_idx)

        def project(x, _idx=idx):
            return tuple(x[i] for i in _idx)

    description = {"keep": keep_idx}
    return QuotientStructure(
        group, GSubset(group, frozenset(kernel)), qgroup, project, w_h, description
    )


def quotient_from_description(group: WeightedGroup, desc: dict, path: str = "") -> QuotientStructure:
    """Rebuild a quotient from its describe() output (replay path)."""
    if not isinstance(desc, dict):
        raise SpecError(path, "subgroup description must be an object")
    if "keep" in desc:
        if set(desc) != {"keep"}:
            raise SpecError(path, 'projection description allows only the key "keep"')
        keep = desc["keep"]
        if not isinstance(keep, list) or not all(isinstance(i, int) for i in keep):
            raise SpecError(f"{path}/keep", "expected a list of factor indices")
        if not isinstance(group, ProductGroup):
            raise SpecError(f"{path}/keep", "projection quotient needs a product group")
        return projection_quotient(group, keep)
    if set(desc) - {"elements", "weight"}:
        raise SpecError(path, 'expected keys "elements" (+ optional "weight") or "keep"')
    items = desc.get("elements")
    if not isinstance(items, list):
        raise SpecError(f"{path}/elements", "expected a list")
    elems = frozenset(
        group.decode_element(v, f"{path}/elements/{i}") for i, v in enumerate(items)
    )
    mode = desc.get("weight", "counting")
    if mode not in ("counting", "normalized"):
        raise SpecError(f"{path}/weight", f"expected counting|normalized, got {mode!r}")
    return quotient(group, elems, mode)
