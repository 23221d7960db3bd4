import json

import pytest

from confctx.mining import ContextType
from confctx.mutation import (
    CATALOG,
    Category,
    Layer,
    MutationKind,
    MutationRecord,
    NoCompatibleTarget,
    always_clean_script,
    apply_patch,
    attributes,
    build_case,
    default_cases,
    evaluate,
    fixture_names,
    fixture_text,
    inject,
    kind_catalog,
    llm_detector,
    omniscient_script,
    protocol_script,
    read_truth,
    write_truth,
)
from confctx.prompting import GENERAL, Verdict, run_detection
from confctx.providers import script_from_dict
from confctx.tree import ConfigParseError, PathSelector, parse_juniper, render_set_line

TEXT = fixture_text()


@pytest.fixture(scope="module")
def cases():
    return default_cases()


def test_catalog_shape():
    entries = kind_catalog()
    assert len(entries) == 16 == len(MutationKind)
    per = {c: sum(e.category is c for e in entries) for c in Category}
    assert per == {Category.SYNTAX: 4, Category.RANGE: 4, Category.DEPENDENCY_CONFLICT: 8}
    assert CATALOG[MutationKind.MISSING_BRACE].expected_contexts == ()
    assert CATALOG[MutationKind.INVALID_VLAN_ID].expected_contexts == (
        ContextType.NEIGHBORING, ContextType.REFERENCEABLE, ContextType.NEIGHBORS_OF_REFERENCEABLE,
    )
    assert CATALOG[MutationKind.NONEXISTENT_POLICY].expected_contexts == (ContextType.REFERENCEABLE,)


def test_fixtures_parse():
    names = fixture_names()
    assert len(names) == 3
    for name in names:
        assert len(parse_juniper(fixture_text(name)).paths) > 40


@pytest.mark.parametrize("kind", list(MutationKind))
def test_each_kind(kind):
    case = build_case(TEXT, kind, source_id="alba")
    rec = case.record
    assert case.mutated_text != TEXT
    assert apply_patch(TEXT, rec.patch) == case.mutated_text
    assert rec.kind is kind and rec.category is CATALOG[kind].category
    assert rec.parameter
    if kind is MutationKind.MISSING_BRACE:
        with pytest.raises(ConfigParseError):
            parse_juniper(case.mutated_text)
        assert case.mutated.path is None and case.mutated.excerpt is not None
        assert rec.mutated.startswith("---")
    else:
        mtree = parse_juniper(case.mutated_text)
        assert mtree != parse_juniper(TEXT)
        assert case.mutated.line != case.original.line or kind is MutationKind.POLICY_CONFLICT


def test_determinism():
    a = [build_case(TEXT, k, seed=3).record for k in MutationKind]
    b = [build_case(TEXT, k, seed=3).record for k in MutationKind]
    assert a == b


def test_seed_rotates_candidates():
    a = build_case(TEXT, MutationKind.INVALID_MTU, seed=0).record.target
    b = build_case(TEXT, MutationKind.INVALID_MTU, seed=1).record.target
    assert a != b


def test_value_edits_touch_one_line():
    for kind in (MutationKind.INVALID_MTU, MutationKind.INVALID_VLAN_ID, MutationKind.INVALID_IP_ADDRESS):
        rec = build_case(TEXT, kind).record
        assert len(rec.patch) == 1
        start, end, lines = rec.patch[0]
        assert end - start == 1 and len(lines) == 1


def test_specific_edits():
    ip = build_case(TEXT, MutationKind.INVALID_IP_ADDRESS).record
    assert ip.mutated.endswith("192.168.253.1.1")
    vlan = build_case(TEXT, MutationKind.INVALID_VLAN_ID).record
    assert vlan.mutated.endswith("vlan-id 5000")
    hier = build_case(TEXT, MutationKind.INCORRECT_HIERARCHY)
    assert hier.mutated.line == "set system host-name rtsw.alba-re1 true"
    vrf = build_case(TEXT, MutationKind.VRF_TARGET_CONFLICT).record
    assert vrf.mutated.endswith("target:11537:313001")
    sampling = build_case(TEXT, MutationKind.DISABLED_SAMPLING)
    assert "inactive: sampling" in sampling.mutated.line
    conflict = build_case(TEXT, MutationKind.POLICY_CONFLICT)
    assert "community delete I2CLOUD-EXTENDED-TARGET" in conflict.mutated.line
    mpls = build_case(TEXT, MutationKind.INCORRECT_FILTER_USAGE).record
    assert mpls.mutated.endswith("family mpls filter input-list v6filter")


def test_explicit_target_and_incompatible():
    tree = parse_juniper(TEXT)
    line = next(render_set_line(p) for p in tree.paths if p.parameter == "mtu")
    rec = build_case(TEXT, MutationKind.INVALID_MTU, PathSelector(set_line=line)).record
    assert rec.target == line
    with pytest.raises(NoCompatibleTarget):
        build_case(TEXT, MutationKind.INVALID_MTU, PathSelector(path_id=0))
    with pytest.raises(NoCompatibleTarget):
        build_case("system { host-name x; }", MutationKind.INVALID_VLAN_ID)


def test_inject_and_truth_round_trip(tmp_path):
    text, rec = inject(TEXT, MutationKind.NONEXISTENT_POLICY, source_id="alba")
    assert "OESS-400-300-LOOP" in text
    write_truth(tmp_path / "t.json", rec)
    assert read_truth(tmp_path / "t.json") == rec
    assert MutationRecord.from_dict(json.loads(json.dumps(rec.to_dict()))) == rec


def test_attribution():
    def v(*params):
        return Verdict(True, params, "", GENERAL, (), 1, 0)

    assert attributes(v("MTU"), "mtu")
    assert attributes(v("family inet6 sampling"), "family inet6")
    assert attributes(v("vrf-target"), "vrf-target")
    assert not attributes(v("address"), "mtu")
    assert not attributes(v(""), "mtu")


def test_omniscient_and_clean_scores(cases):
    good = evaluate(llm_detector(script_from_dict(omniscient_script(cases))), cases)
    assert [good.cell(c) for c in Category] == ["4/4 (100%)", "4/4 (100%)", "8/8 (100%)"]
    assert good.cell() == "16/16 (100%)" and good.total == (32, 32)
    clean = evaluate(llm_detector(script_from_dict(always_clean_script())), cases)
    assert sum(clean.detected.values()) == 0 and clean.cell() == "16/16 (100%)"
    assert "| **Total** | **32** | **16/32 (50%)** |" in clean.to_markdown()


def test_wrong_attribution_is_a_miss(cases):
    script = {"default": {"action": "verdict", "misconfigured": True, "errParameter": ["nothing-here"], "reason": "x"}}
    report = evaluate(llm_detector(script_from_dict(script)), cases)
    assert sum(report.detected.values()) == 0
    assert report.clean_passed == 0


def test_detector_errors_count_as_misses(cases):
    def broken(target, focus):
        raise RuntimeError("boom")

    report = evaluate(broken, cases[:2])
    assert sum(report.detected.values()) == 0 and all(r.error for r in report.rows)
    assert report.clean_passed == 0


@pytest.mark.parametrize("kind", list(MutationKind))
def test_protocol_trace(cases, kind):
    case = next(c for c in cases if c.record.kind is kind)
    provider = protocol_script(case)
    if case.mutated.path is None:
        v = run_detection(provider, [], case.mutated.excerpt, case.record.category.focus)
    else:
        v = run_detection(provider, [case.mutated.tree], case.mutated.path, case.record.category.focus)
    assert v.requested_contexts == CATALOG[kind].expected_contexts


def test_flag_without_attribution_scores_zero(cases):
    script = {"default": {"action": "verdict", "misconfigured": True, "errParameter": [], "reason": "x"}}
    report = evaluate(llm_detector(script_from_dict(script)), cases)
    assert sum(report.detected.values()) == 0 and report.clean_passed == 0
