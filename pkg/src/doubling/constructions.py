"""Sharpness construction: exact counts and the discretized witness instance.

The ambient group is H_h x GL2Z x Z_m with weights (1/h, counting, 1/m):
a finite cyclic factor standing in for a compact group, the integer matrix
group, and a normalized cyclic factor standing in for the torus.  The
witness subset is

    A = (H x {I} x Z_m)  disjoint-union  ({1_H} x M x C)

where M holds the 2N matrices (0 1; 1 2^k) and their inverses, and C is a
"Cantor analog": a symmetric subset of Z_m with C + C = Z_m and vanishing
density.  For K = 2N + 1 the projection to GL2Z x Z_m has

    mu_Q(pi A^2) = 4N^2 + 1 = K^2 - 2K + 2    exactly, for every (h, m),

while mu_Q(pi A) -> 1 and the measured doubling -> K as h, m grow, so the
quotient doubling ratio climbs to K^2 - 2K + 2.

Large instances are never materialized: A and A^2 live in a touched-coset
representation (per matrix, a few rectangles H-part x Z_m-part), and all
measures come from exact counts on that representation.  Small instances can
be materialized into plain element sets for brute-force cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import ConsistencyError, SpecError
from .groups import CyclicGroup, MatrixGroup, ProductGroup, WeightedGroup
from .metrics import DoublingStats
from .quotients import QuotientStructure, projection_quotient
from .rationals import put
from .sets import GSubset

MATERIALIZE_CAP = 200_000

_GL2Z = MatrixGroup()


@dataclass(frozen=True)
class MatrixFamily:
    """The 2N generator matrices (0 1; 1 2^k) with their exact inverses."""

    N: int
    members: tuple

    @property
    def identity(self) -> tuple:
        return (1, 0, 0, 1)


def matrix_family(n: int) -> MatrixFamily:
    if n < 1:
        raise ValueError("family parameter must be at least 1")
    mats = [(0, 1, 1, 2 ** k) for k in range(1, n + 1)]
    mats += [_GL2Z.inv(m) for m in mats]
    return MatrixFamily(n, tuple(mats))


def powers_diff_count(n: int) -> int:
    """|S - S| for S = {2^k : 1 <= k <= n}, by brute force over all pairs."""
    if n < 1:
        raise ValueError("n must be at least 1")
    s = [2 ** k for k in range(1, n + 1)]
    diffs = {a - b for a in s for b in s}
    expected = n * (n - 1) + 1
    if len(diffs) != expected:
        raise ConsistencyError(
            f"power difference count: got {len(diffs)}, expected {expected}", {"n": n}
        )
    return len(diffs)


def matrix_family_square_count(n: int) -> int:
    """|(I u M)^2| by brute force with arbitrary-precision matrix products."""
    fam = matrix_family(n)
    gens = (fam.identity,) + fam.members
    products = {_GL2Z.op(x, y) for x in gens for y in gens}
    expected = 4 * n * n + 1
    if len(products) != expected:
        raise ConsistencyError(
            f"matrix family square count: got {len(products)}, expected {expected}", {"n": n}
        )
    return len(products)


# -- Cantor analog in Z_m ----------------------------------------------------


def _cantor_radix(m: int) -> int:
    """Radix r for C = {-r..r} u rZ_m: sqrt(m) for squares, else the divisor
    of m minimizing |C| = 2r + m/r - 2 (ties to the smaller r)."""
    if not isinstance(m, int) or m < 4:
        raise ValueError(f"modulus must be an integer >= 4, got {m!r}")
    root = isqrt(m)
    if root * root == m:
        return root
    best: tuple[int, int] | None = None
    for r in range(2, m // 2 + 1):
        if m % r:
            continue
        size = 2 * r + m // r - 2
        if best is None or size < best[0]:
            best = (size, r)
    if best is None:
        raise ValueError(f"modulus {m} is prime; need a divisor r with 2 <= r <= m/2")
    return best[1]


def _cantor_elements(m: int, r: int) -> frozenset:
    interval = {x % m for x in range(-r, r + 1)}
    multiples = {x for x in range(0, m, r)}
    return frozenset(interval | multiples)


def _sumset_mod(x: frozenset, y: frozenset, m: int, cache: dict) -> frozenset | None:
    """x + y in Z_m; returns None when the sumset covers everything."""
    key = frozenset((x, y))
    hit = cache.get(key, 0)
    if hit != 0:
        return hit
    out = {(a + b) % m for a in x for b in y}
    result = None if len(out) == m else frozenset(out)
    cache[key] = result
    return result


def cantor_analog(m: int, group: CyclicGroup | None = None) -> GSubset:
    """Symmetric C in Z_m with C + C = Z_m and density O(1/sqrt(m)).

    C = {-r..r} u rZ_m with r = _cantor_radix(m).  Symmetry and full coverage
    are verified by brute force, not assumed.
    """
    r = _cantor_radix(m)
    c = _cantor_elements(m, r)
    if c != frozenset((-x) % m for x in c):
        raise ConsistencyError("cantor analog is not symmetric", {"m": m, "r": r})
    if _sumset_mod(c, c, m, {}) is not None:
        raise ConsistencyError("cantor analog does not cover Z_m", {"m": m, "r": r})
    if group is None:
        group = CyclicGroup(m, "normalized")
    elif group.n != m:
        raise ValueError(f"group modulus {group.n} does not match m={m}")
    return GSubset(group, c)


# -- touched-coset block representation --------------------------------------
#
# A block set maps a matrix W to a list of rectangles (h_full, z) meaning
# (H if h_full else {1_H}) x {W} x (Z_m if z is None else z).


def _rect_contains(r1: tuple, r2: tuple) -> bool:
    h1, z1 = r1
    h2, z2 = r2
    if h2 and not h1:
        return False
    if z1 is None:
        return True
    return z2 is not None and z1 >= z2


def _insert_rect(rects: list, rect: tuple) -> None:
    for existing in rects:
        if _rect_contains(existing, rect):
            return
    rects[:] = [r for r in rects if not _rect_contains(rect, r)]
    rects.append(rect)


def _block_product(b1: dict, b2: dict, m: int, cache: dict) -> dict:
    out: dict = {}
    for w1, rects1 in b1.items():
        for w2, rects2 in b2.items():
            w = _GL2Z.op(w1, w2)
            bucket = out.setdefault(w, [])
            for h1, z1 in rects1:
                for h2, z2 in rects2:
                    if z1 is None or z2 is None:
                        z = None
                    else:
                        z = _sumset_mod(z1, z2, m, cache)
                    _insert_rect(bucket, (h1 or h2, z))
    return out


def _block_inverse(blocks: dict, m: int) -> dict:
    out: dict = {}
    for w, rects in blocks.items():
        bucket = out.setdefault(_GL2Z.inv(w), [])
        for h_full, z in rects:
            neg = None if z is None else frozenset((-x) % m for x in z)
            _insert_rect(bucket, (h_full, neg))
    return out


def _blocks_equal(b1: dict, b2: dict) -> bool:
    if set(b1) != set(b2):
        return False
    return all(set(b1[w]) == set(b2[w]) for w in b1)


def _rects_count(rects: list, h: int, m: int) -> int:
    """Exact union size by inclusion-exclusion (rect lists stay tiny)."""
    n = len(rects)
    total = 0
    for mask in range(1, 1 << n):
        chosen = [rects[i] for i in range(n) if mask >> i & 1]
        h_count = h if all(r[0] for r in chosen) else 1
        zs = [r[1] for r in chosen if r[1] is not None]
        if not zs:
            z_count = m
        else:
            inter = zs[0]
            for z in zs[1:]:
                inter = inter & z
            z_count = len(inter)
        total += (1 if bin(mask).count("1") % 2 else -1) * h_count * z_count
    return total


def _block_count(blocks: dict, h: int, m: int) -> int:
    return sum(_rects_count(rects, h, m) for rects in blocks.values())


def _projected_count(blocks: dict, m: int) -> int:
    """Size of the projection to GL2Z x Z_m (H coordinate dropped)."""
    total = 0
    for rects in blocks.values():
        union: frozenset | None = frozenset()
        for _, z in rects:
            if z is None:
                union = None
                break
            union = union | z
        total += m if union is None else len(union)
    return total


# -- the assembled instance ---------------------------------------------------


@dataclass(frozen=True)
class SharpnessInstance:
    """One witness instance with all of its exactly-computed measures."""

    N: int
    h: int
    m: int
    r: int
    family: MatrixFamily
    cantor: frozenset
    blocks: dict
    mu_A: Fraction
    mu_A2: Fraction
    mu_piA: Fraction
    mu_piA2: Fraction
    stats: DoublingStats
    quotient_doubling: Fraction

    @property
    def K_target(self) -> int:
        return 2 * self.N + 1

    @property
    def quotient_target(self) -> int:
        k = self.K_target
        return k * k - 2 * k + 2

    def element_count(self) -> int:
        return _block_count(self.blocks, self.h, self.m)

    def group(self) -> ProductGroup:
        return ProductGroup(
            [CyclicGroup(self.h, "normalized"), MatrixGroup(), CyclicGroup(self.m, "normalized")]
        )

    def group_spec(self) -> dict:
        return {
            "type": "product",
            "factors": [
                {"type": "cyclic", "n": self.h, "weight": "normalized"},
                {"type": "gl2z"},
                {"type": "cyclic", "n": self.m, "weight": "normalized"},
            ],
        }

    def quotient_structure(self, group: ProductGroup | None = None) -> QuotientStructure:
        return projection_quotient(group if group is not None else self.group(), (1, 2))

    def subset(self, group: ProductGroup | None = None, cap: int = MATERIALIZE_CAP) -> GSubset:
        """Materialize A as an explicit element set (small parameters only)."""
        count = self.element_count()
        if count > cap:
            raise CapacityError(count, cap)
        g = group if group is not None else self.group()
        elems: set = set()
        for w, rects in self.blocks.items():
            for h_full, z in rects:
                h_range = range(self.h) if h_full else (0,)
                z_range = range(self.m) if z is None else sorted(z)
                for hh in h_range:
                    for zz in z_range:
                        elems.add((hh, w, zz))
        return GSubset(g, frozenset(elems))

    def to_json(self, materialize_cap: int = 20_000) -> dict:
        out: dict = {
            "kind": "sharpness-instance",
            "params": {"N": self.N, "h": self.h, "m": self.m, "r": self.r},
            "group": self.group_spec(),
            "keep": [1, 2],
            "targets": {"K": self.K_target, "quotient_doubling": self.quotient_target},
            "cantor": sorted(self.cantor),
            "doubling": self.stats.to_json(),
        }
        measures: dict = {}
        put(measures, "mu_A", self.mu_A)
        put(measures, "mu_A2", self.mu_A2)
        put(measures, "mu_piA", self.mu_piA)
        put(measures, "mu_piA2", self.mu_piA2)
        out["measures"] = measures
        put(out, "quotient_doubling", self.quotient_doubling)
        count = self.element_count()
        out["subset_size"] = count
        if count <= materialize_cap:
            group = self.group()
            out["subset"] = {"elements": self.subset(group, cap=materialize_cap).encode()}
        else:
            out["subset"] = None
        return out


class CapacityError(ValueError):
    def __init__(self, count: int, cap: int) -> None:
        super().__init__(
            f"instance has {count} elements, above the materialization cap {cap}; "
            "use smaller parameters or raise the cap"
        )


def build_sharpness_instance(n: int, h: int, m: int) -> SharpnessInstance:
    """Assemble the witness and compute every measure exactly.

    Requires n >= 1, h >= 2, and m admitting a Cantor analog.  Product sets
    never touch more than the (2N+1)^2 reachable matrices, so h and m only
    enter through exact counts.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"N must be a positive integer, got {n!r}")
    if not isinstance(h, int) or h < 2:
        raise ValueError(f"h must be an integer >= 2, got {h!r}")
    r = _cantor_radix(m)
    cantor = _cantor_elements(m, r)
    cache: dict = {}
    if cantor != frozenset((-x) % m for x in cantor):
        raise ConsistencyError("cantor analog is not symmetric", {"m": m, "r": r})
    if _sumset_mod(cantor, cantor, m, cache) is not None:
        raise ConsistencyError("cantor analog does not cover Z_m", {"m": m, "r": r})

    fam = matrix_family(n)
    blocks: dict = {fam.identity: [(True, None)]}
    for w in fam.members:
        blocks.setdefault(w, []).append((False, cantor))

    if not _blocks_equal(blocks, _block_inverse(blocks, m)):
        raise ConsistencyError("witness subset is not symmetric", {"N": n, "h": h, "m": m})

    blocks2 = _block_product(blocks, blocks, m, cache)
    if len(blocks2) != matrix_family_square_count(n):
        raise ConsistencyError(
            "touched matrix count mismatch in the squared witness", {"N": n}
        )
    inv_times = _block_product(_block_inverse(blocks, m), blocks, m, cache)

    w_g = Fraction(1, h * m)
    count_a = _block_count(blocks, h, m)
    mu_a = count_a * w_g
    mu_a2 = _block_count(blocks2, h, m) * w_g
    mu_inv_times = _block_count(inv_times, h, m) * w_g
    mu_pia = Fraction(_projected_count(blocks, m), m)
    mu_pia2 = Fraction(_projected_count(blocks2, m), m)

    stats = DoublingStats(
        K=mu_a2 / mu_a, K1=mu_a2 / mu_a, K2=mu_inv_times / mu_a, symmetric=True
    )
    return SharpnessInstance(
        N=n,
        h=h,
        m=m,
        r=r,
        family=fam,
        cantor=cantor,
        blocks=blocks,
        mu_A=mu_a,
        mu_A2=mu_a2,
        mu_piA=mu_pia,
        mu_piA2=mu_pia2,
        stats=stats,
        quotient_doubling=mu_pia2 / mu_pia,
    )


def load_instance(doc: dict, path: str = "") -> tuple[WeightedGroup, GSubset, QuotientStructure]:
    """Rebuild (G, A, Q) from an emitted instance artifact.

    Needs the materialized element list; artifacts emitted above the cap
    carry "subset": null and cannot be loaded for set-level work.
    """
    from .groups import build_group
    from .sets import decode_subset

    if not isinstance(doc, dict) or doc.get("kind") != "sharpness-instance":
        raise SpecError(path, 'expected an object with "kind": "sharpness-instance"')
    if doc.get("subset") is None:
        raise SpecError(
            f"{path}/subset",
            "instance was emitted without materialized elements; rebuild with smaller parameters",
        )
    group = build_group(doc.get("group"), f"{path}/group")
    if not isinstance(group, ProductGroup):
        raise SpecError(f"{path}/group", "instance group must be a product")
    a = decode_subset(group, doc["subset"], f"{path}/subset")
    keep = doc.get("keep")
    if not isinstance(keep, list) or not all(isinstance(i, int) for i in keep):
        raise SpecError(f"{path}/keep", "expected a list of factor indices")
    return group, a, projection_quotient(group, keep)


def build_from_reference(ref: dict, path: str = "") -> tuple[WeightedGroup, GSubset, QuotientStructure]:
    """Resolve a subset-spec construction reference into (G, A, Q)."""
    if ref.get("construction") != "sharpness":
        raise SpecError(f"{path}/construction", 'only "sharpness" is defined')
    extra = set(ref) - {"construction", "N", "h", "m"}
    if extra:
        raise SpecError(f"{path}/{sorted(extra)[0]}", "unknown key for construction reference")
    try:
        inst = build_sharpness_instance(ref.get("N"), ref.get("h"), ref.get("m"))
    except (ValueError, TypeError) as exc:
        raise SpecError(path, str(exc)) from exc
    group = inst.group()
    return group, inst.subset(group), inst.quotient_structure(group)
