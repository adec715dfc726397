"""Exhaustive and seeded-random scans over a small-group catalog.

An instance is one replayable triple (group spec, normal subgroup, subset),
optionally with partner subsets and translators for the pair/triple suites.
Its id IS its spec: the canonical JSON string.  Evaluation is a pure function
of the id, so reports replay exactly, and a scan commits to its full instance
list before any evaluation starts; with parallelism > 1 the same list is
mapped over a process pool in order, which keeps every artifact byte-stable
across worker counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from random import Random
from typing import Any, Iterable

from .errors import CapError, ConsistencyError, SpecError
from .extract import extract_subset
from .fibers import containment_check, layer_cake, spillover_check
from .groups import WeightedGroup, build_group, quaternion_table
from .metrics import (
    doubling_stats,
    quotient_doubling_check,
    ruzsa_sq,
)
from .quotients import QuotientStructure, normal_subgroups, quotient_from_description
from .rationals import fmt, parse, put
from .sets import GSubset, inv_set, mul_set, translate

ALL_SUITES = (
    "layer-cake",
    "spillover",
    "containment",
    "ruzsa-axioms",
    "quotient-sym",
    "quotient-cube",
    "quotient-k1k2",
    "extract",
)
DEFAULT_ALPHAS = (Fraction(3, 2), Fraction(2), Fraction(3))
EXHAUSTIVE_ORDER_CAP = 16
TOP_WITNESSES = 10

_SUITE_VARIANT = {
    "quotient-sym": "symmetric",
    "quotient-cube": "cube",
    "quotient-k1k2": "two-constant",
}


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# -- catalog -----------------------------------------------------------------


def _base_entries() -> list[tuple[str, int, dict]]:
    entries: list[tuple[str, int, dict]] = []
    for n in range(2, 25):
        entries.append((f"cyclic:{n}", n, {"type": "cyclic", "n": n}))
    for n in range(3, 9):
        entries.append((f"dihedral:{n}", 2 * n, {"type": "dihedral", "n": n}))
    entries.append(("symmetric:3", 6, {"type": "symmetric", "n": 3}))
    entries.append(("symmetric:4", 24, {"type": "symmetric", "n": 4}))
    entries.append(("q8", 8, {"type": "table", "table": quaternion_table(), "name": "Q8"}))
    return entries


def catalog(
    weights: tuple[str, ...] = ("counting", "normalized"),
    max_product_order: int = 64,
    include_products: bool = True,
) -> list[dict]:
    """Built-in group specs: small cyclic/dihedral/symmetric/Q8 and their
    pairwise products up to `max_product_order`, in each weight variant."""
    base = _base_entries()
    out: list[dict] = []
    for mode in weights:
        for _, _, spec in base:
            out.append(_with_weight(spec, mode))
        if not include_products:
            continue
        for i, (_, o1, s1) in enumerate(base):
            for _, o2, s2 in base[i:]:
                if o1 * o2 <= max_product_order:
                    out.append(
                        {
                            "type": "product",
                            "factors": [_with_weight(s1, mode), _with_weight(s2, mode)],
                        }
                    )
    return out


def _with_weight(spec: dict, mode: str) -> dict:
    out = dict(spec)
    out["weight"] = mode
    return out


def parse_group_selector(sel: str | dict, path: str = "") -> dict:
    """Accept either a full spec dict or a shorthand like "cyclic:12"."""
    if isinstance(sel, dict):
        build_group(sel, path)  # validate eagerly
        return sel
    if not isinstance(sel, str):
        raise SpecError(path, f"expected a group spec or selector string, got {sel!r}")
    name, _, arg = sel.partition(":")
    if name == "q8":
        return {"type": "table", "table": quaternion_table(), "name": "Q8"}
    if name == "gl2z":
        return {"type": "gl2z"}
    if name in ("cyclic", "dihedral", "symmetric"):
        if not arg.isdigit():
            raise SpecError(path, f"selector {sel!r} needs a numeric parameter")
        return {"type": name, "n": int(arg)}
    raise SpecError(path, f"unknown group selector {sel!r}")


# -- configuration -----------------------------------------------------------


@dataclass
class ScanConfig:
    """What to scan; everything except `parallelism` defines the artifact."""

    groups: list
    subset_mode: dict
    suites: tuple[str, ...] = ALL_SUITES
    subgroups: str = "all"
    subgroup_weight: str = "counting"
    alphas: tuple[Fraction, ...] = DEFAULT_ALPHAS
    emit_instances: bool = False
    parallelism: int = 1

    def __post_init__(self) -> None:
        self.groups = [parse_group_selector(g, f"/groups/{i}") for i, g in enumerate(self.groups)]
        unknown = [s for s in self.suites if s not in ALL_SUITES]
        if unknown:
            raise SpecError("/suites", f"unknown suites {unknown}; known: {list(ALL_SUITES)}")
        self.suites = tuple(s for s in ALL_SUITES if s in self.suites)
        if self.subgroups not in ("all", "proper"):
            raise SpecError("/subgroups", f'expected "all" or "proper", got {self.subgroups!r}')
        if self.subgroup_weight not in ("counting", "normalized"):
            raise SpecError("/subgroup_weight", f"got {self.subgroup_weight!r}")
        self.alphas = tuple(parse(a) for a in self.alphas)
        if any(a <= 1 for a in self.alphas):
            raise SpecError("/alphas", "every alpha must exceed 1")
        mode = self.subset_mode
        kind = mode.get("kind")
        if kind == "exhaustive":
            allowed = {"kind", "max_size", "symmetric_only"}
        elif kind == "random":
            allowed = {"kind", "count", "seed", "density"}
            if not isinstance(mode.get("count"), int) or mode["count"] < 1:
                raise SpecError("/subset_mode/count", "expected a positive integer")
            if not isinstance(mode.get("seed"), int):
                raise SpecError("/subset_mode/seed", "random scans need an explicit integer seed")
            density = mode.get("density", "mixed")
            if density not in ("mixed", "1/4", "1/2") and not (
                isinstance(density, dict) and set(density) == {"size"}
            ):
                raise SpecError("/subset_mode/density", f"got {density!r}")
        else:
            raise SpecError("/subset_mode/kind", 'expected "exhaustive" or "random"')
        extra = set(mode) - allowed
        if extra:
            raise SpecError(f"/subset_mode/{sorted(extra)[0]}", "unknown key")
        if self.parallelism < 1:
            raise SpecError("/parallelism", "must be at least 1")

    @classmethod
    def from_json(cls, doc: dict) -> "ScanConfig":
        if not isinstance(doc, dict):
            raise SpecError("", "scan config must be an object")
        known = {
            "groups",
            "subset_mode",
            "suites",
            "subgroups",
            "subgroup_weight",
            "alphas",
            "emit_instances",
            "parallelism",
        }
        extra = set(doc) - known
        if extra:
            raise SpecError(f"/{sorted(extra)[0]}", "unknown key in scan config")
        if "groups" not in doc or "subset_mode" not in doc:
            raise SpecError("", 'scan config needs "groups" and "subset_mode"')
        kwargs: dict = {"groups": doc["groups"], "subset_mode": doc["subset_mode"]}
        if "suites" in doc:
            kwargs["suites"] = tuple(doc["suites"])
        for key in ("subgroups", "subgroup_weight", "emit_instances", "parallelism"):
            if key in doc:
                kwargs[key] = doc[key]
        if "alphas" in doc:
            kwargs["alphas"] = tuple(doc["alphas"])
        return cls(**kwargs)

    def resolved(self) -> dict:
        """Artifact-facing config; parallelism is a runtime knob, not content."""
        return {
            "groups": self.groups,
            "subset_mode": self.subset_mode,
            "suites": list(self.suites),
            "subgroups": self.subgroups,
            "subgroup_weight": self.subgroup_weight,
            "alphas": [fmt(a) for a in self.alphas],
            "emit_instances": self.emit_instances,
        }


# -- instance generation -------------------------------------------------------


def _sample_nonempty(rng: Random, pool: list, density) -> list:
    if isinstance(density, dict):
        k = max(1, min(density["size"], len(pool)))
        remaining = list(pool)
        out = []
        for _ in range(k):
            out.append(remaining.pop(rng.randrange(len(remaining))))
        return out
    p = Fraction(1, 4) if density == "1/4" else Fraction(1, 2)
    threshold = p.numerator / p.denominator
    while True:
        out = [x for x in pool if rng.random() < threshold]
        if out:
            return out


def _density_for(trial: int, density):
    if density != "mixed":
        return density
    step = trial % 3
    if step == 0:
        return "1/4"
    if step == 1:
        return "1/2"
    return {"size": 0}  # resolved against the pool size at sampling time


def _inverse_orbits(group: WeightedGroup, elems: list) -> list[tuple]:
    seen: set = set()
    orbits: list[tuple] = []
    for x in elems:
        if x in seen:
            continue
        y = group.inv(x)
        orbit = (x,) if y == x else (x, y)
        seen.update(orbit)
        orbits.append(orbit)
    return orbits


def _needs_partner(suites: Iterable[str]) -> bool:
    return any(s in ("spillover", "containment", "ruzsa-axioms") for s in suites)


def iter_instance_specs(config: ScanConfig) -> list[str]:
    """The full deterministic instance list (ids) for a scan."""
    mode = config.subset_mode
    rng = Random(mode["seed"]) if mode["kind"] == "random" else None
    ids: list[str] = []
    for gspec in config.groups:
        group = build_group(gspec)
        if group.order is None:
            raise SpecError("/groups", f"{group.name} is infinite; scans need finite groups")
        subs = normal_subgroups(group)
        if config.subgroups == "proper":
            subs = [s for s in subs if 1 < len(s.elements) < group.order]
        elems = list(group.elements())
        for sub in subs:
            base = {
                "group": gspec,
                "subgroup": {
                    "elements": [group.encode_element(x) for x in sub.sorted_elements()],
                    "weight": config.subgroup_weight,
                },
                "suites": list(config.suites),
            }
            if "extract" in config.suites:
                base["alphas"] = [fmt(a) for a in config.alphas]
            if mode["kind"] == "exhaustive":
                ids.extend(_exhaustive_ids(group, elems, base, config))
            else:
                ids.extend(_random_ids(group, elems, base, config, rng))
    return ids


def _encode_sorted(group: WeightedGroup, elems: Iterable) -> list:
    return [group.encode_element(x) for x in sorted(elems, key=group.element_key)]


def _finish_exhaustive(group: WeightedGroup, base: dict, members: list, config: ScanConfig) -> str:
    spec = dict(base)
    a = frozenset(members)
    spec["subset"] = _encode_sorted(group, a)
    if _needs_partner(config.suites):
        # deterministic partners derived from A itself
        subs = GSubset(group, a)
        spec["subset_b"] = _encode_sorted(group, inv_set(subs).elements)
        if "ruzsa-axioms" in config.suites:
            spec["subset_c"] = _encode_sorted(group, mul_set(subs, subs).elements)
            ordered = subs.sorted_elements()
            spec["translate"] = [
                group.encode_element(ordered[0]),
                group.encode_element(ordered[-1]),
            ]
    return canonical_json(spec)


def _exhaustive_ids(
    group: WeightedGroup, elems: list, base: dict, config: ScanConfig
) -> list[str]:
    mode = config.subset_mode
    max_size = mode.get("max_size")
    symmetric_only = bool(mode.get("symmetric_only", False))
    ids: list[str] = []
    if symmetric_only:
        orbits = _inverse_orbits(group, elems)
        for mask in range(1, 1 << len(orbits)):
            members = [x for i, o in enumerate(orbits) if mask >> i & 1 for x in o]
            if max_size is not None and len(members) > max_size:
                continue
            ids.append(_finish_exhaustive(group, base, members, config))
        return ids
    if max_size is not None:
        for size in range(1, min(max_size, len(elems)) + 1):
            for combo in combinations(elems, size):
                ids.append(_finish_exhaustive(group, base, list(combo), config))
        return ids
    if group.order > EXHAUSTIVE_ORDER_CAP:
        raise CapError(
            f"exhaustive mode needs |G| <= {EXHAUSTIVE_ORDER_CAP} or a max_size cap; "
            f"{group.name} has order {group.order}"
        )
    for mask in range(1, 1 << len(elems)):
        members = [x for i, x in enumerate(elems) if mask >> i & 1]
        ids.append(_finish_exhaustive(group, base, members, config))
    return ids


def _random_ids(
    group: WeightedGroup, elems: list, base: dict, config: ScanConfig, rng: Random
) -> list[str]:
    mode = config.subset_mode
    ids: list[str] = []
    for trial in range(mode["count"]):
        density = _density_for(trial, mode.get("density", "mixed"))
        if isinstance(density, dict) and density["size"] == 0:
            density = {"size": max(1, len(elems) // 2)}
        spec = dict(base)
        spec["subset"] = _encode_sorted(group, _sample_nonempty(rng, elems, density))
        if _needs_partner(config.suites):
            spec["subset_b"] = _encode_sorted(group, _sample_nonempty(rng, elems, density))
            if "ruzsa-axioms" in config.suites:
                spec["subset_c"] = _encode_sorted(group, _sample_nonempty(rng, elems, density))
                spec["translate"] = [
                    group.encode_element(elems[rng.randrange(len(elems))]),
                    group.encode_element(elems[rng.randrange(len(elems))]),
                ]
        ids.append(canonical_json(spec))
    return ids


# -- evaluation ----------------------------------------------------------------

_GROUP_CACHE: dict[str, WeightedGroup] = {}
_QUOTIENT_CACHE: dict[tuple, QuotientStructure] = {}


def _cached_group(gspec: dict) -> WeightedGroup:
    key = canonical_json(gspec)
    group = _GROUP_CACHE.get(key)
    if group is None:
        if len(_GROUP_CACHE) > 128:
            _GROUP_CACHE.clear()
        group = build_group(gspec)
        _GROUP_CACHE[key] = group
    return group


def _cached_quotient(group: WeightedGroup, desc: dict) -> QuotientStructure:
    key = (group.signature, canonical_json(desc))
    q = _QUOTIENT_CACHE.get(key)
    if q is None:
        if len(_QUOTIENT_CACHE) > 256:
            _QUOTIENT_CACHE.clear()
        q = quotient_from_description(group, desc, "/subgroup")
        _QUOTIENT_CACHE[key] = q
    return q


def _decode_elems(group: WeightedGroup, items: list, path: str) -> GSubset:
    return GSubset(
        group, frozenset(group.decode_element(v, f"{path}/{i}") for i, v in enumerate(items))
    )


def evaluate_instance(instance_id: str) -> dict:
    """Recompute the full report for one instance id (pure, replayable)."""
    try:
        spec = json.loads(instance_id)
    except json.JSONDecodeError as exc:
        raise SpecError("", f"malformed instance id: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecError("", "instance id must encode an object")
    for key in ("group", "subgroup", "subset"):
        if key not in spec:
            raise SpecError(f"/{key}", "missing from instance id")
    group = _cached_group(spec["group"])
    q = _cached_quotient(group, spec["subgroup"])
    a = _decode_elems(group, spec["subset"], "/subset")
    b = _decode_elems(group, spec["subset_b"], "/subset_b") if "subset_b" in spec else None
    c = _decode_elems(group, spec["subset_c"], "/subset_c") if "subset_c" in spec else None
    suites = spec.get("suites", [])

    report: dict = {
        "id": instance_id,
        "sizes": {
            "group": group.order,
            "subgroup": len(q.subgroup.elements),
            "subset": len(a.elements),
        },
        "suites": {},
        "violations": [],
    }

    stats = doubling_stats(a)
    report["doubling"] = stats.to_json()

    pi_a = q.image(a)
    pi_a2 = mul_set(pi_a, pi_a)
    p, p2 = len(pi_a.elements), len(pi_a2.elements)
    qd = Fraction(p2, p)
    put(report, "quotient_doubling", qd)
    # probe value: quotient doubling over K^2, tracked for both symmetries
    probe = {"symmetric": stats.symmetric}
    put(probe, "over_k2", qd / (stats.K * stats.K))
    report["probe"] = probe

    def violation(suite: str, detail: str) -> None:
        report["violations"].append({"suite": suite, "detail": detail})

    for suite in suites:
        if suite == "layer-cake":
            try:
                lhs, rhs = layer_cake(a, q)
                frag: dict = {"pass": True}
                put(frag, "lhs", lhs)
                put(frag, "rhs", rhs)
            except ConsistencyError as exc:
                frag = {"pass": False}
                frag.update(exc.payload)
                violation(suite, "layer-cake identity failed")
            report["suites"][suite] = frag
        elif suite == "spillover":
            partner = b if b is not None else a
            try:
                res = spillover_check(a, partner, q)
                frag = {"pass": True}
                put(frag, "lhs_left", res.lhs_left)
                put(frag, "lhs_right", res.lhs_right)
                put(frag, "rhs_left", res.rhs_left)
                put(frag, "rhs_right", res.rhs_right)
            except ConsistencyError as exc:
                frag = {"pass": False}
                frag.update({k: v for k, v in exc.payload.items() if isinstance(v, str)})
                violation(suite, "spillover inequality failed")
            report["suites"][suite] = frag
        elif suite == "containment":
            partner = b if b is not None else a
            ok = containment_check(a, partner, q)
            report["suites"][suite] = {"pass": ok}
            if not ok:
                violation(suite, "superlevel containment failed")
        elif suite == "ruzsa-axioms":
            report["suites"][suite] = _ruzsa_suite(group, a, b, c, spec, violation)
        elif suite in _SUITE_VARIANT:
            variant = _SUITE_VARIANT[suite]
            if variant == "symmetric" and not stats.symmetric:
                report["suites"][suite] = {"skipped": "subset is not symmetric"}
                continue
            check = quotient_doubling_check(a, q, variant)
            report["suites"][suite] = check.to_json()
            if not check.passed:
                violation(suite, f"quotient doubling exceeded the {variant} bound")
        elif suite == "extract":
            frag = {}
            for alpha_s in spec.get("alphas", [fmt(x) for x in DEFAULT_ALPHAS]):
                alpha = parse(alpha_s)
                try:
                    cert = extract_subset(a, q, alpha)
                    entry = cert.to_json(include_elements=False)
                    entry["pass"] = True
                except ConsistencyError:
                    entry = {"pass": False}
                    violation(suite, f"extraction failed at alpha={alpha_s}")
                frag[alpha_s] = entry
            report["suites"][suite] = frag
    return report


def _ruzsa_suite(group, a, b, c, spec, violation) -> dict:
    if b is None:
        b = inv_set(a)
    if c is None:
        c = mul_set(a, a)
    frag: dict = {}
    vaa = ruzsa_sq(a, a).value
    frag["self_at_least_one"] = vaa >= 1
    put(frag, "value_aa", vaa)
    vab, vba = ruzsa_sq(a, b).value, ruzsa_sq(b, a).value
    frag["symmetry"] = vab == vba
    vac, vbc = ruzsa_sq(a, c).value, ruzsa_sq(b, c).value
    frag["triangle"] = vac <= vab * vbc
    if "translate" in spec:
        g = group.decode_element(spec["translate"][0], "/translate/0")
        h = group.decode_element(spec["translate"][1], "/translate/1")
        # left translation of both arguments preserves the distance exactly
        moved = ruzsa_sq(translate(a, left=g), translate(b, left=h)).value
        frag["translation"] = moved == vab
    ok = all(v for k, v in frag.items() if isinstance(v, bool))
    frag["pass"] = ok
    if not ok:
        violation("ruzsa-axioms", "a distance axiom failed")
    return frag


# -- aggregation and the scan itself --------------------------------------------


def _fold_aggregate(reports: list[dict]) -> dict:
    suite_runs: dict = {}
    violations: list[dict] = []
    sym_entries: list[tuple[Fraction, str]] = []
    all_entries: list[tuple[Fraction, str]] = []
    for rep in reports:
        for v in rep["violations"]:
            violations.append({"id": rep["id"], **v})
        for name, frag in rep["suites"].items():
            cell = suite_runs.setdefault(name, {"runs": 0, "passes": 0, "skipped": 0})
            if "skipped" in frag:
                cell["skipped"] += 1
                continue
            cell["runs"] += 1
            if frag.get("pass", True):
                cell["passes"] += 1
        value = parse(rep["probe"]["over_k2"])
        all_entries.append((value, rep["id"]))
        if rep["probe"]["symmetric"]:
            sym_entries.append((value, rep["id"]))

    def probe(entries: list[tuple[Fraction, str]]) -> dict:
        if not entries:
            return {"max": None, "max_dec": None, "witnesses": []}
        ranked = sorted(entries, key=lambda e: (-e[0], e[1]))
        out: dict = {}
        put(out, "max", ranked[0][0])
        out["witnesses"] = [
            {"value": fmt(v), "value_dec": float(v), "id": i}
            for v, i in ranked[:TOP_WITNESSES]
        ]
        return out

    return {
        "instances": len(reports),
        "suite_runs": suite_runs,
        "violations": violations,
        "symmetric_probe": probe(sym_entries),
        "general_probe": probe(all_entries),
    }


def scan(config: ScanConfig) -> dict:
    """Run every suite on every instance; aggregate deterministically."""
    ids = iter_instance_specs(config)
    if config.parallelism > 1 and len(ids) > 1:
        from multiprocessing import get_context

        chunk = max(1, len(ids) // (config.parallelism * 8))
        with get_context("fork").Pool(config.parallelism) as pool:
            reports = pool.map(evaluate_instance, ids, chunksize=chunk)
    else:
        reports = [evaluate_instance(i) for i in ids]
    out = {"config": config.resolved(), "aggregate": _fold_aggregate(reports)}
    if config.emit_instances:
        out["instances"] = reports
    return out


def replay(instance_id: str, expected: dict | None = None) -> dict:
    """Recompute one instance report; must match a stored one exactly."""
    report = evaluate_instance(instance_id)
    if expected is not None and report != expected:
        raise ConsistencyError(
            "replay mismatch: reports differ for the same instance id",
            {"id": instance_id},
        )
    return report


def report_csv(report: dict) -> str:
    """Lossy tabular export: decimal shadows only, one row per instance."""
    if "instances" not in report:
        raise ValueError("CSV export needs a report produced with emit_instances")
    lines = ["# lossy decimal export; authoritative rationals live in the JSON report"]
    lines.append("instance,group_order,subgroup_size,subset_size,K,K2,quotient_doubling,bound,margin")
    for rep in report["instances"]:
        k = parse(rep["doubling"]["K"])
        k2 = parse(rep["doubling"]["K2"])
        qd = parse(rep["quotient_doubling"])
        bound = k * k if rep["doubling"]["symmetric"] else k * k2
        margin = bound - qd
        ident = rep["id"].replace('"', '""')
        lines.append(
            f'"{ident}",{rep["sizes"]["group"]},{rep["sizes"]["subgroup"]},'
            f"{rep['sizes']['subset']},{float(k)!r},{float(k2)!r},{float(qd)!r},"
            f"{float(bound)!r},{float(margin)!r}"
        )
    return "\n".join(lines) + "\n"
