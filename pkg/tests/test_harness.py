import json

import pytest

from doubling import (
    CapError,
    ScanConfig,
    SpecError,
    build_group,
    catalog,
    evaluate_instance,
    iter_instance_specs,
    parse_group_selector,
    replay,
    scan,
    validate_axioms,
)
from doubling.harness import canonical_json, report_csv


def small_config(**overrides):
    base = dict(
        groups=["cyclic:12", "dihedral:4"],
        subset_mode={"kind": "random", "count": 12, "seed": 7},
        suites=(
            "layer-cake",
            "spillover",
            "containment",
            "ruzsa-axioms",
            "quotient-sym",
            "quotient-cube",
            "quotient-k1k2",
            "extract",
        ),
    )
    base.update(overrides)
    return ScanConfig(**base)


def test_catalog_contents():
    specs = catalog()
    assert {"type": "cyclic", "n": 12, "weight": "counting"} in specs
    assert {"type": "symmetric", "n": 4, "weight": "counting"} in specs
    assert {"type": "symmetric", "n": 4, "weight": "normalized"} in specs
    names = {build_group(s).name for s in specs if s["type"] == "table"}
    assert "Q8" in names
    # dihedral entries stay within order 16
    orders = [2 * s["n"] for s in specs if s["type"] == "dihedral"]
    assert orders and max(orders) <= 16


def test_catalog_products_bounded():
    specs = catalog(weights=("counting",))
    for spec in specs:
        g = build_group(spec)
        assert g.order is not None and g.order <= 64


def test_catalog_sample_passes_validation():
    specs = catalog(weights=("counting",))
    for spec in specs[:12]:
        validate_axioms(build_group(spec))


def test_selector_parsing():
    assert parse_group_selector("cyclic:9") == {"type": "cyclic", "n": 9}
    assert parse_group_selector("q8")["name"] == "Q8"
    with pytest.raises(SpecError):
        parse_group_selector("wat")
    with pytest.raises(SpecError):
        parse_group_selector("cyclic:x")


def test_scan_is_deterministic_for_fixed_seed():
    r1 = scan(small_config())
    r2 = scan(small_config())
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


def test_scan_parallelism_does_not_change_bytes():
    r1 = scan(small_config(parallelism=1))
    r8 = scan(small_config(parallelism=8))
    assert json.dumps(r1, sort_keys=True) == json.dumps(r8, sort_keys=True)


def test_rerun_identical_on_product_group():
    spec = {
        "type": "product",
        "factors": [{"type": "dihedral", "n": 8}, {"type": "cyclic", "n": 3}],
    }
    config = lambda: ScanConfig(
        groups=[spec],
        subset_mode={"kind": "random", "count": 5, "seed": 99},
        suites=("quotient-cube", "quotient-k1k2"),
    )
    r1, r2 = scan(config()), scan(config())
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    assert r1["aggregate"]["violations"] == []


def test_different_seeds_differ():
    r1 = scan(small_config())
    r2 = scan(small_config(subset_mode={"kind": "random", "count": 12, "seed": 8}))
    assert json.dumps(r1, sort_keys=True) != json.dumps(r2, sort_keys=True)


def test_scan_zero_violations_and_summary():
    report = scan(small_config())
    agg = report["aggregate"]
    assert agg["violations"] == []
    assert agg["instances"] == len(iter_instance_specs(small_config()))
    runs = agg["suite_runs"]
    assert runs["layer-cake"]["passes"] == runs["layer-cake"]["runs"]
    assert runs["quotient-sym"]["runs"] + runs["quotient-sym"]["skipped"] == agg["instances"]
    assert agg["general_probe"]["max"] is not None
    assert len(agg["general_probe"]["witnesses"]) <= 10


def test_symmetric_probe_never_exceeds_one():
    # exhaustive symmetric subsets: the squared bound means ratio/K^2 <= 1
    from doubling.rationals import parse

    config = ScanConfig(
        groups=["cyclic:12", "dihedral:4", "q8"],
        subset_mode={"kind": "exhaustive", "symmetric_only": True},
        suites=("quotient-sym",),
    )
    report = scan(config)
    assert parse(report["aggregate"]["symmetric_probe"]["max"]) <= 1


def test_replay_matches_scan_reports():
    config = small_config(emit_instances=True)
    report = scan(config)
    for rep in report["instances"][:5]:
        again = replay(rep["id"])
        assert again == rep
        replay(rep["id"], expected=rep)  # no raise


def test_replay_flags_mismatch():
    from doubling import ConsistencyError

    config = small_config(emit_instances=True)
    rep = scan(config)["instances"][0]
    tampered = json.loads(json.dumps(rep))
    tampered["quotient_doubling"] = "999/1"
    with pytest.raises(ConsistencyError):
        replay(rep["id"], expected=tampered)


def test_exhaustive_generation_counts():
    config = ScanConfig(
        groups=["cyclic:6"],
        subset_mode={"kind": "exhaustive"},
        suites=("layer-cake",),
    )
    ids = iter_instance_specs(config)
    # 4 normal subgroups x 63 nonempty subsets
    assert len(ids) == 4 * 63


def test_exhaustive_symmetric_only_counts():
    config = ScanConfig(
        groups=["cyclic:12"],
        subset_mode={"kind": "exhaustive", "symmetric_only": True},
        suites=("quotient-sym",),
    )
    ids = iter_instance_specs(config)
    # 7 inverse orbits -> 127 symmetric subsets, 6 normal subgroups
    assert len(ids) == 6 * 127
    report = scan(config)
    assert report["aggregate"]["suite_runs"]["quotient-sym"]["runs"] == 6 * 127
    assert report["aggregate"]["violations"] == []


def test_exhaustive_max_size():
    config = ScanConfig(
        groups=["cyclic:20"],
        subset_mode={"kind": "exhaustive", "max_size": 2},
        suites=("layer-cake",),
    )
    ids = iter_instance_specs(config)
    # 20 singletons + C(20,2) pairs, times 6 normal subgroups
    assert len(ids) == 6 * (20 + 190)


def test_exhaustive_cap_without_max_size():
    config = ScanConfig(
        groups=["cyclic:20"],
        subset_mode={"kind": "exhaustive"},
        suites=("layer-cake",),
    )
    with pytest.raises(CapError):
        iter_instance_specs(config)


def test_proper_subgroup_selector():
    config = ScanConfig(
        groups=["cyclic:6"],
        subset_mode={"kind": "exhaustive"},
        suites=("layer-cake",),
        subgroups="proper",
    )
    ids = iter_instance_specs(config)
    # only the order-2 and order-3 subgroups remain
    assert len(ids) == 2 * 63
    sizes = {len(json.loads(i)["subgroup"]["elements"]) for i in ids}
    assert sizes == {2, 3}


def test_density_variants_are_deterministic():
    for density in ("1/4", "1/2", {"size": 3}):
        config = lambda: ScanConfig(
            groups=["cyclic:12"],
            subset_mode={"kind": "random", "count": 8, "seed": 5, "density": density},
            suites=("layer-cake",),
        )
        first = iter_instance_specs(config())
        assert first == iter_instance_specs(config())
        if isinstance(density, dict):
            for instance_id in first:
                assert len(json.loads(instance_id)["subset"]) == 3


def test_random_mode_requires_seed():
    with pytest.raises(SpecError, match="seed"):
        ScanConfig(
            groups=["cyclic:6"],
            subset_mode={"kind": "random", "count": 5},
            suites=("layer-cake",),
        )


def test_config_validation_errors():
    with pytest.raises(SpecError, match="suites"):
        ScanConfig(
            groups=["cyclic:6"],
            subset_mode={"kind": "exhaustive"},
            suites=("bogus",),
        )
    with pytest.raises(SpecError, match="alpha"):
        ScanConfig(
            groups=["cyclic:6"],
            subset_mode={"kind": "exhaustive"},
            suites=("extract",),
            alphas=("1/2",),
        )
    with pytest.raises(SpecError):
        ScanConfig.from_json({"groups": ["cyclic:6"]})
    with pytest.raises(SpecError):
        ScanConfig.from_json(
            {"groups": ["cyclic:6"], "subset_mode": {"kind": "exhaustive"}, "oops": 1}
        )


def test_resolved_config_excludes_parallelism():
    config = small_config(parallelism=8)
    assert "parallelism" not in config.resolved()


def test_instance_id_is_canonical_json():
    ids = iter_instance_specs(small_config())
    for instance_id in ids[:3]:
        assert instance_id == canonical_json(json.loads(instance_id))
        report = evaluate_instance(instance_id)
        assert report["id"] == instance_id


def test_csv_export():
    report = scan(small_config(emit_instances=True))
    text = report_csv(report)
    lines = text.strip().split("\n")
    assert lines[0].startswith("# lossy")
    assert lines[1].split(",")[0] == "instance"
    assert len(lines) == 2 + report["aggregate"]["instances"]
    with pytest.raises(ValueError):
        report_csv(scan(small_config()))


def test_probe_values_allow_reconstruction():
    report = scan(small_config(emit_instances=True))
    from doubling.rationals import parse

    for rep in report["instances"][:10]:
        k = parse(rep["doubling"]["K"])
        qd = parse(rep["quotient_doubling"])
        assert parse(rep["probe"]["over_k2"]) == qd / (k * k)
