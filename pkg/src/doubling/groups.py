"""Groups with uniform rational Haar weights.

Every group carries one positive rational weight per element: 1 for counting
measure, 1/n for the normalized measure on a finite group standing in for a
compact one.  Discrete counting measure is bi-invariant, so unimodularity is
automatic for everything built here; it is assumed, not checked.

Element handles are opaque hashables: ints 0..n-1 for the finite kinds,
tuples of factor handles for products, and 4-tuples (a, b, c, d) for exact
integer 2x2 matrices with determinant +/-1.  Enumeration order is canonical
per kind so that runs are reproducible bit for bit.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import permutations, product as iter_product
from typing import Any, Iterator, Sequence

from .errors import CapError, SpecError

# Exhaustive axiom validation is O(n^3); cap it.
VALIDATION_CAP = 64
SYMMETRIC_DEGREE_CAP = 5

_WEIGHT_MODES = ("counting", "normalized")


def _resolve_weight(mode: str | Fraction, order: int | None) -> tuple[Fraction, str | None]:
    if isinstance(mode, Fraction):
        if mode <= 0:
            raise ValueError("weight must be positive")
        return mode, None
    if mode == "counting":
        return Fraction(1), "counting"
    if mode == "normalized":
        if order is None:
            raise ValueError("normalized weight needs a finite group")
        return Fraction(1, order), "normalized"
    raise ValueError(f"unknown weight mode {mode!r}")


class WeightedGroup:
    """Base class; subclasses fill in the group law on their handle type."""

    kind: str = "abstract"

    def __init__(self, name: str, order: int | None, weight: str | Fraction = "counting") -> None:
        self.name = name
        self.order = order
        self.weight, self.weight_mode = _resolve_weight(weight, order)
        self._signature: str | None = None

    # -- group law -------------------------------------------------------

    def op(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    # -- enumeration and handles ------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    def elements(self) -> Iterator:
        """Canonical enumeration; raises for infinite groups."""
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def element_key(self, x):
        """Canonical sort key; total order on handles."""
        return x

    def encode_element(self, x) -> Any:
        return x

    def decode_element(self, obj, path: str = "") -> Any:
        raise NotImplementedError

    # -- identity of the group object itself ------------------------------

    def spec(self) -> dict:
        """Replayable JSON spec; only defined for user-buildable groups."""
        raise NotImplementedError(f"{self.kind} group has no standalone spec")

    @property
    def signature(self) -> str:
        if self._signature is None:
            self._signature = json.dumps(self.spec(), sort_keys=True, separators=(",", ":"))
        return self._signature

    def total_measure(self) -> Fraction:
        if self.order is None:
            raise ValueError("infinite group has no total measure")
        return self.order * self.weight

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        size = self.order if self.order is not None else "inf"
        return f"<{type(self).__name__} {self.name} |G|={size} w={self.weight}>"


class _IndexedGroup(WeightedGroup):
    """Common plumbing for groups whose handles are ints 0..n-1."""

    def elements(self) -> Iterator[int]:
        return iter(range(self.order))

    def contains(self, x) -> bool:
        return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < self.order

    def decode_element(self, obj, path: str = "") -> int:
        if not isinstance(obj, int) or isinstance(obj, bool) or not (0 <= obj < self.order):
            raise SpecError(path, f"expected element index 0..{self.order - 1}, got {obj!r}")
        return obj


class CyclicGroup(_IndexedGroup):
    """Z_n with additive notation."""

    kind = "cyclic"

    def __init__(self, n: int, weight: str | Fraction = "counting") -> None:
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f"cyclic order must be a positive integer, got {n!r}")
        self.n = n
        super().__init__(f"Z{n}", n, weight)

    def op(self, a: int, b: int) -> int:
        return (a + b) % self.n

    def inv(self, a: int) -> int:
        return (-a) % self.n

    @property
    def identity(self) -> int:
        return 0

    def spec(self) -> dict:
        return {"type": "cyclic", "n": self.n, "weight": self.weight_mode}


class DihedralGroup(_IndexedGroup):
    """Symmetries of the regular n-gon, order 2n.

    Handle k (k < n) is the rotation by k steps; handle n + k is that
    rotation followed by the reference reflection.
    """

    kind = "dihedral"

    def __init__(self, n: int, weight: str | Fraction = "counting") -> None:
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f"dihedral parameter must be a positive integer, got {n!r}")
        self.n = n
        super().__init__(f"D{n}", 2 * n, weight)

    def op(self, a: int, b: int) -> int:
        n = self.n
        k1, f1 = a % n, a >= n
        k2, f2 = b % n, b >= n
        k = (k1 - k2) % n if f1 else (k1 + k2) % n
        return k + n * (f1 ^ f2)

    def inv(self, a: int) -> int:
        n = self.n
        if a >= n:
            return a
        return (-a) % n

    @property
    def identity(self) -> int:
        return 0

    def spec(self) -> dict:
        return {"type": "dihedral", "n": self.n, "weight": self.weight_mode}


class SymmetricGroup(_IndexedGroup):
    """S_n on {0..n-1}; handles index permutations in lexicographic order."""

    kind = "symmetric"

    def __init__(self, n: int, weight: str | Fraction = "counting") -> None:
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f"symmetric degree must be a positive integer, got {n!r}")
        if n > SYMMETRIC_DEGREE_CAP:
            raise CapError(f"symmetric degree capped at {SYMMETRIC_DEGREE_CAP}, got {n}")
        self.n = n
        self.perms = list(permutations(range(n)))
        self._index = {p: i for i, p in enumerate(self.perms)}
        super().__init__(f"S{n}", len(self.perms), weight)

    def op(self, a: int, b: int) -> int:
        p, q = self.perms[a], self.perms[b]
        return self._index[tuple(p[q[i]] for i in range(self.n))]

    def inv(self, a: int) -> int:
        p = self.perms[a]
        out = [0] * self.n
        for i, v in enumerate(p):
            out[v] = i
        return self._index[tuple(out)]

    @property
    def identity(self) -> int:
        return 0

    def spec(self) -> dict:
        return {"type": "symmetric", "n": self.n, "weight": self.weight_mode}


class TableGroup(_IndexedGroup):
    """Finite group given by an explicit Cayley table; axioms checked on build."""

    kind = "table"

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        weight: str | Fraction = "counting",
        name: str = "table",
        validate: bool = True,
    ) -> None:
        n = len(table)
        if n == 0:
            raise ValueError("empty multiplication table")
        if n > VALIDATION_CAP:
            raise CapError(f"table group size capped at {VALIDATION_CAP}, got {n}")
        rows = []
        for i, row in enumerate(table):
            row = list(row)
            if len(row) != n or any(not isinstance(v, int) or v < 0 or v >= n for v in row):
                raise ValueError(f"table row {i} is not a permutation-ready row of 0..{n - 1}")
            rows.append(row)
        self.table = rows
        self._identity = self._find_identity()
        self._inv = self._build_inverses()
        if validate:
            self._check_associativity()
        super().__init__(name, n, weight)

    def _find_identity(self) -> int:
        n = len(self.table)
        for e in range(n):
            if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n)):
                return e
        raise ValueError("table has no identity element")

    def _build_inverses(self) -> list[int]:
        n = len(self.table)
        e = self._identity
        inv = [-1] * n
        for a in range(n):
            for b in range(n):
                if self.table[a][b] == e and self.table[b][a] == e:
                    inv[a] = b
                    break
            if inv[a] < 0:
                raise ValueError(f"element {a} has no inverse")
        return inv

    def _check_associativity(self) -> None:
        n = len(self.table)
        t = self.table
        for a in range(n):
            ta = t[a]
            for b in range(n):
                tab = t[ta[b]]
                tb = t[b]
                for c in range(n):
                    if tab[c] != ta[tb[c]]:
                        raise ValueError(f"non-associative table at ({a},{b},{c})")

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    @property
    def identity(self) -> int:
        return self._identity

    def spec(self) -> dict:
        out = {"type": "table", "table": [list(r) for r in self.table], "weight": self.weight_mode}
        if self.name != "table":
            out["name"] = self.name
        return out


class ProductGroup(WeightedGroup):
    """Direct product; handles are tuples, weights multiply per factor."""

    kind = "product"

    def __init__(self, factors: Sequence[WeightedGroup], name: str | None = None) -> None:
        if not factors:
            raise ValueError("product needs at least one factor")
        self.factors = list(factors)
        order: int | None = 1
        weight = Fraction(1)
        for f in self.factors:
            weight *= f.weight
            order = None if (order is None or f.order is None) else order * f.order
        super().__init__(name or "x".join(f.name for f in self.factors), order, weight)
        self.weight_mode = None  # composite; spec() carries per-factor modes

    def op(self, a: tuple, b: tuple) -> tuple:
        return tuple(f.op(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a: tuple) -> tuple:
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    @property
    def identity(self) -> tuple:
        return tuple(f.identity for f in self.factors)

    def elements(self) -> Iterator[tuple]:
        if self.order is None:
            raise ValueError(f"{self.name} is infinite; cannot enumerate")
        return iter_product(*[list(f.elements()) for f in self.factors])

    def contains(self, x) -> bool:
        return (
            isinstance(x, tuple)
            and len(x) == len(self.factors)
            and all(f.contains(v) for f, v in zip(self.factors, x))
        )

    def element_key(self, x: tuple):
        return tuple(f.element_key(v) for f, v in zip(self.factors, x))

    def encode_element(self, x: tuple) -> list:
        return [f.encode_element(v) for f, v in zip(self.factors, x)]

    def decode_element(self, obj, path: str = "") -> tuple:
        if not isinstance(obj, (list, tuple)) or len(obj) != len(self.factors):
            raise SpecError(path, f"expected {len(self.factors)}-tuple, got {obj!r}")
        return tuple(
            f.decode_element(v, f"{path}/{i}") for i, (f, v) in enumerate(zip(self.factors, obj))
        )

    def spec(self) -> dict:
        return {"type": "product", "factors": [f.spec() for f in self.factors]}


class MatrixGroup(WeightedGroup):
    """GL_2(Z): 2x2 integer matrices of determinant +/-1, counting weight.

    Lazy: only op, inverse, and finite-subset arithmetic are supported.
    Handles are row-major 4-tuples (a, b, c, d).
    """

    kind = "gl2z"

    def __init__(self) -> None:
        super().__init__("GL2Z", None, "counting")

    def op(self, x: tuple, y: tuple) -> tuple:
        a, b, c, d = x
        e, f, g, h = y
        return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inv(self, x: tuple) -> tuple:
        a, b, c, d = x
        det = a * d - b * c
        if det == 1:
            return (d, -b, -c, a)
        return (-d, b, c, -a)

    @property
    def identity(self) -> tuple:
        return (1, 0, 0, 1)

    def elements(self) -> Iterator:
        raise ValueError("GL2Z is infinite; cannot enumerate")

    def contains(self, x) -> bool:
        if not (isinstance(x, tuple) and len(x) == 4 and all(isinstance(v, int) for v in x)):
            return False
        a, b, c, d = x
        return a * d - b * c in (1, -1)

    def encode_element(self, x: tuple) -> list:
        a, b, c, d = x
        return [[a, b], [c, d]]

    def decode_element(self, obj, path: str = "") -> tuple:
        ok = (
            isinstance(obj, (list, tuple))
            and len(obj) == 2
            and all(isinstance(r, (list, tuple)) and len(r) == 2 for r in obj)
            and all(isinstance(v, int) and not isinstance(v, bool) for r in obj for v in r)
        )
        if not ok:
            raise SpecError(path, f"expected [[a,b],[c,d]] integer matrix, got {obj!r}")
        x = (obj[0][0], obj[0][1], obj[1][0], obj[1][1])
        det = x[0] * x[3] - x[1] * x[2]
        if det not in (1, -1):
            raise SpecError(path, f"matrix determinant must be +/-1, got {det}")
        return x

    def spec(self) -> dict:
        return {"type": "gl2z"}


def quaternion_table() -> list[list[int]]:
    """Cayley table of the quaternion group on [1, -1, i, -i, j, -j, k, -k]."""
    # unit products: (sign, unit) with units e=0, i=1, j=2, k=3
    unit_mul = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }

    def idx(sign: int, unit: int) -> int:
        return 2 * unit + (0 if sign > 0 else 1)

    table = [[0] * 8 for _ in range(8)]
    for u1 in range(4):
        for s1 in (1, -1):
            for u2 in range(4):
                for s2 in (1, -1):
                    s, u = unit_mul[(u1, u2)]
                    table[idx(s1, u1)][idx(s2, u2)] = idx(s * s1 * s2, u)
    return table


def quaternion_group(weight: str | Fraction = "counting") -> TableGroup:
    return TableGroup(quaternion_table(), weight=weight, name="Q8")


def validate_axioms(group: WeightedGroup, cap: int = VALIDATION_CAP) -> None:
    """Exhaustively recheck associativity, identity, and inverses.

    Intended for tests and table-spec vetting; the structured kinds satisfy
    the axioms by construction.
    """
    if group.order is None:
        raise ValueError("cannot exhaustively validate an infinite group")
    if group.order > cap:
        raise CapError(f"validation capped at order {cap}, got {group.order}")
    elems = list(group.elements())
    e = group.identity
    for a in elems:
        if group.op(e, a) != a or group.op(a, e) != a:
            raise ValueError(f"identity law fails at {a!r}")
        ia = group.inv(a)
        if group.op(a, ia) != e or group.op(ia, a) != e:
            raise ValueError(f"inverse law fails at {a!r}")
    for a in elems:
        for b in elems:
            ab = group.op(a, b)
            for c in elems:
                if group.op(ab, c) != group.op(a, group.op(b, c)):
                    raise ValueError(f"associativity fails at ({a!r},{b!r},{c!r})")


# -- JSON group specs ------------------------------------------------------

_SPEC_KEYS = {
    "cyclic": {"type", "n", "weight"},
    "dihedral": {"type", "n", "weight"},
    "symmetric": {"type", "n", "weight"},
    "table": {"type", "table", "weight", "name"},
    "product": {"type", "factors"},
    "gl2z": {"type"},
}


def _check_keys(spec: dict, kind: str, path: str) -> None:
    extra = set(spec) - _SPEC_KEYS[kind]
    if extra:
        key = sorted(extra)[0]
        raise SpecError(f"{path}/{key}", f"unknown key for {kind} spec")


def _weight_of(spec: dict, path: str) -> str:
    mode = spec.get("weight", "counting")
    if mode not in _WEIGHT_MODES:
        raise SpecError(f"{path}/weight", f"expected one of {_WEIGHT_MODES}, got {mode!r}")
    return mode


def _positive_int(spec: dict, key: str, path: str) -> int:
    v = spec.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
        raise SpecError(f"{path}/{key}", f"expected a positive integer, got {v!r}")
    return v


def build_group(spec: dict, path: str = "") -> WeightedGroup:
    """Build a validated WeightedGroup from a JSON spec dict.

    Spec forms:
      {"type":"cyclic","n":6,"weight":"counting"}
      {"type":"dihedral","n":4,...}        (n-gon; order 2n)
      {"type":"symmetric","n":4,...}       (n <= 5)
      {"type":"table","table":[[...]],"name":...}
      {"type":"product","factors":[...]}   (weights per factor)
      {"type":"gl2z"}                      (lazy, counting only)
    """
    if not isinstance(spec, dict):
        raise SpecError(path, f"group spec must be an object, got {type(spec).__name__}")
    kind = spec.get("type")
    if kind not in _SPEC_KEYS:
        raise SpecError(f"{path}/type", f"expected one of {sorted(_SPEC_KEYS)}, got {kind!r}")
    _check_keys(spec, kind, path)
    try:
        if kind == "cyclic":
            return CyclicGroup(_positive_int(spec, "n", path), _weight_of(spec, path))
        if kind == "dihedral":
            return DihedralGroup(_positive_int(spec, "n", path), _weight_of(spec, path))
        if kind == "symmetric":
            return SymmetricGroup(_positive_int(spec, "n", path), _weight_of(spec, path))
        if kind == "table":
            table = spec.get("table")
            if not isinstance(table, list):
                raise SpecError(f"{path}/table", "expected a list of rows")
            name = spec.get("name", "table")
            if not isinstance(name, str):
                raise SpecError(f"{path}/name", "expected a string")
            return TableGroup(table, _weight_of(spec, path), name=name)
        if kind == "product":
            factors = spec.get("factors")
            if not isinstance(factors, list) or not factors:
                raise SpecError(f"{path}/factors", "expected a nonempty list of group specs")
            return ProductGroup(
                [build_group(f, f"{path}/factors/{i}") for i, f in enumerate(factors)]
            )
        return MatrixGroup()
    except SpecError:
        raise
    except (ValueError, CapError) as exc:
        raise SpecError(path, str(exc)) from exc
