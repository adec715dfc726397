"""Command line entry point: verify / construct / extract / scan / replay.

Exit codes: 0 all-pass, 1 usage or I/O error, 2 any violation of a proved
statement (or a replay mismatch).  Artifacts are deterministic given the
seed; rationals travel as exact "p/q" strings with decimal shadows beside
them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .constructions import (
    build_from_reference,
    build_sharpness_instance,
    load_instance,
)
from .errors import CapError, ConsistencyError, SpecError
from .extract import admissible_thresholds, extract_subset
from .groups import build_group
from .harness import (
    ALL_SUITES,
    ScanConfig,
    parse_group_selector,
    replay,
    report_csv,
    scan,
)
from .quotients import quotient_from_description
from .rationals import fmt, parse as parse_rat
from .sets import decode_subset

_EXHAUSTIVE_DEFAULT_LIMIT = 12


def _read_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _maybe_inline_json(text: str):
    """Accept @file.json or an inline JSON string."""
    if text.startswith("@"):
        return _read_json(text[1:])
    return json.loads(text)


def _emit(doc: dict, out: str | None) -> None:
    payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _default_jobs() -> int:
    env = os.environ.get("DOUBLING_JOBS")
    if env and env.isdigit() and int(env) >= 1:
        return int(env)
    return 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the JSON artifact here instead of stdout")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doubling",
        description="Exact doubling constants, quotient projections, and structure sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run property suites over one group")
    v.add_argument("--group", required=True, help='selector like "cyclic:12" or @spec.json')
    v.add_argument("--suite", default="all", help='comma list or "all"')
    v.add_argument("--subgroup-weight", default="counting", choices=["counting", "normalized"])
    v.add_argument("--max-subset-size", type=int, default=None)
    v.add_argument("--symmetric-only", action="store_true")
    v.add_argument("--trials", type=int, default=200, help="random trials when too big to exhaust")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--alphas", default="3/2,2,3")
    v.add_argument("-j", "--parallelism", type=int, default=None)
    _add_common(v)

    c = sub.add_parser("construct", help="build a sharpness witness instance")
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--h", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--emit", help="also write a loadable instance artifact here")
    c.add_argument("--materialize-cap", type=int, default=20_000)
    _add_common(c)

    e = sub.add_parser("extract", help="certified structure-set extraction")
    e.add_argument("--alpha", default="2", help='comma list of rationals > 1, e.g. "3/2,2"')
    e.add_argument("--instance", help="instance artifact from construct --emit")
    e.add_argument("--group", help="group selector or @spec.json (with --subgroup/--subset)")
    e.add_argument("--subgroup", help='inline JSON or @file: {"elements":[...]} or {"keep":[...]}')
    e.add_argument("--subset", help='inline JSON or @file: {"elements":[...]} or construction ref')
    e.add_argument("--subgroup-weight", default="counting", choices=["counting", "normalized"])
    e.add_argument("--trace", action="store_true", help="include a human-readable threshold trace")
    _add_common(e)

    s = sub.add_parser("scan", help="run a configured scan over many instances")
    s.add_argument("--config", required=True, help="scan config JSON file")
    s.add_argument("--csv", help="also write a lossy CSV table here")
    s.add_argument("-j", "--parallelism", type=int, default=None)
    _add_common(s)

    r = sub.add_parser("replay", help="recompute one instance report from its id")
    r.add_argument("--id", required=True, help="canonical instance id string, or @file")
    r.add_argument("--expect", help="stored instance report JSON to compare against")
    _add_common(r)
    return parser


def _cmd_verify(args) -> int:
    gspec = (
        parse_group_selector(_read_json(args.group[1:]))
        if args.group.startswith("@")
        else parse_group_selector(args.group)
    )
    suites = ALL_SUITES if args.suite == "all" else tuple(args.suite.split(","))
    group = build_group(gspec)
    if group.order is None:
        raise SpecError("/group", "verify needs a finite group")
    if args.max_subset_size is not None or group.order <= _EXHAUSTIVE_DEFAULT_LIMIT:
        subset_mode: dict = {"kind": "exhaustive"}
        if args.max_subset_size is not None:
            subset_mode["max_size"] = args.max_subset_size
        if args.symmetric_only:
            subset_mode["symmetric_only"] = True
    else:
        subset_mode = {"kind": "random", "count": args.trials, "seed": args.seed}
    config = ScanConfig(
        groups=[gspec],
        subset_mode=subset_mode,
        suites=suites,
        subgroup_weight=args.subgroup_weight,
        alphas=tuple(parse_rat(a) for a in args.alphas.split(",")),
        parallelism=args.parallelism or _default_jobs(),
    )
    report = scan(config)
    _emit(report, args.out)
    return 2 if report["aggregate"]["violations"] else 0


def _cmd_construct(args) -> int:
    inst = build_sharpness_instance(args.N, args.h, args.m)
    doc = inst.to_json(materialize_cap=args.materialize_cap)
    report = {
        "kind": "sharpness-report",
        "params": doc["params"],
        "targets": doc["targets"],
        "measures": doc["measures"],
        "quotient_doubling": doc["quotient_doubling"],
        "quotient_doubling_dec": doc["quotient_doubling_dec"],
        "doubling": doc["doubling"],
    }
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        report["emitted"] = args.emit
    _emit(report, args.out)
    return 0


def _load_extract_inputs(args):
    if args.instance:
        return load_instance(_read_json(args.instance), "/instance")
    if not args.group or not args.subgroup or not args.subset:
        raise SpecError("", "extract needs --instance or all of --group/--subgroup/--subset")
    subset_doc = _maybe_inline_json(args.subset)
    if isinstance(subset_doc, dict) and "construction" in subset_doc:
        return build_from_reference(subset_doc, "/subset")
    gspec = (
        parse_group_selector(_read_json(args.group[1:]))
        if args.group.startswith("@")
        else parse_group_selector(args.group)
    )
    group = build_group(gspec, "/group")
    sub_doc = _maybe_inline_json(args.subgroup)
    if isinstance(sub_doc, dict) and "elements" in sub_doc and "weight" not in sub_doc:
        sub_doc = {"elements": sub_doc["elements"], "weight": args.subgroup_weight}
    q = quotient_from_description(group, sub_doc, "/subgroup")
    a = decode_subset(group, subset_doc, "/subset")
    return group, a, q


def _cmd_extract(args) -> int:
    group, a, q = _load_extract_inputs(args)
    alphas = [parse_rat(x) for x in args.alpha.split(",")]
    out: dict = {"kind": "extraction-report", "group": group.name, "certificates": {}}
    status = 0
    for alpha in alphas:
        key = fmt(alpha)
        try:
            cert = extract_subset(a, q, alpha)
            entry = cert.to_json(include_elements=True)
            entry["pass"] = True
            if args.trace:
                entry["trace"] = _threshold_trace(a, q, alpha)
        except ConsistencyError as exc:
            entry = {"pass": False, "error": str(exc), "payload": exc.payload}
            status = 2
        out["certificates"][key] = entry
    _emit(out, args.out)
    return status


def _threshold_trace(a, q, alpha: Fraction) -> list[str]:
    from .fibers import fiber_profile, level_family
    from .sets import mul_set

    lines = []
    admissible = set(admissible_thresholds(a, q, alpha))
    family = level_family(fiber_profile(a, q))
    a2 = len(mul_set(a, a).elements)
    k = Fraction(a2, len(a.elements))
    for t, level in zip(family.thresholds, family.levels):
        sq = len(mul_set(level, level).elements)
        lhs = Fraction(sq, 1) * q.quotient_weight
        rhs = alpha * k * len(level.elements) * q.quotient_weight
        verdict = "admissible" if t in admissible else "rejected"
        lines.append(
            f"s={fmt(t)}: mu_Q(level^2)={fmt(lhs)} vs alpha*K*mu_Q(level)={fmt(rhs)} -> {verdict}"
        )
    return lines


def _cmd_scan(args) -> int:
    config = ScanConfig.from_json(_read_json(args.config))
    if args.parallelism:
        config.parallelism = args.parallelism
    elif _default_jobs() > 1:
        config.parallelism = _default_jobs()
    if args.csv:
        config.emit_instances = True
    report = scan(config)
    print(f"scan: {report['aggregate']['instances']} instances, "
          f"parallelism={config.parallelism}", file=sys.stderr)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report_csv(report))
    _emit(report, args.out)
    return 2 if report["aggregate"]["violations"] else 0


def _cmd_replay(args) -> int:
    instance_id = args.id
    if instance_id.startswith("@"):
        with open(instance_id[1:], "r", encoding="utf-8") as fh:
            instance_id = fh.read().strip()
    expected = _read_json(args.expect) if args.expect else None
    try:
        report = replay(instance_id, expected)
    except ConsistencyError as exc:
        print(f"replay mismatch: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.out)
    return 0


_HANDLERS = {
    "verify": _cmd_verify,
    "construct": _cmd_construct,
    "extract": _cmd_extract,
    "scan": _cmd_scan,
    "replay": _cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract reserves 2 for
        # theorem violations, so remap usage problems to 1
        return 0 if exc.code in (0, None) else 1
    try:
        return _HANDLERS[args.command](args)
    except (SpecError, CapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConsistencyError as exc:
        print(f"theorem violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
