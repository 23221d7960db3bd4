"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from confctx.classify import ValueClass, build_classification_table, vote
from confctx.mining import (
    ContextType,
    mine_intra_router,
    mine_neighbors,
    mine_neighbors_of_referenceable,
    mine_referenceable,
    mine_similar,
)
from confctx.mutation import (
    CATALOG,
    Category,
    MutationKind,
    always_clean_script,
    default_cases,
    evaluate,
    fixture_names,
    fixture_text,
    llm_detector,
    omniscient_script,
    protocol_script,
)
from confctx.prompting import (
    GENERAL,
    DetectionOptions,
    SessionState,
    TokenBudget,
    advance,
    context_source,
    default_offer,
    outgoing,
    run_detection,
    start_session,
)
from confctx.providers import ChatProvider, ScriptedProvider, script_from_dict
from confctx.tree import PathSelector, parse_json_tree, parse_juniper, render_set_line, resolve_selector, serialize

from oracles import Oracle, count_line_in_texts, random_tree

RESULTS: dict[str, str] = {}


def report(name: str):
    """Record PASS/FAIL for the wrapped check and print it."""

    def wrap(fn):
        def test():
            try:
                detail = fn()
            except BaseException as exc:
                RESULTS[name] = f"FAIL  {name}: {type(exc).__name__}: {exc}"[:300]
                print(RESULTS[name])
                raise
            RESULTS[name] = f"PASS  {name}" + (f" ({detail})" if detail else "")
            print(RESULTS[name])

        test.__name__ = fn.__name__
        test.__doc__ = fn.__doc__
        return test

    return wrap


# 1 -------------------------------------------------------------------------

@report("1 miner/oracle equivalence")
def test_miner_oracle_equivalence():
    rng = random.Random(20240601)
    started = time.perf_counter()
    trees = checked = biggest = 0
    while trees < 1000:
        tree = random_tree(rng, max_paths=500)
        oracle = Oracle(tree)
        table = build_classification_table(tree)
        for p in tree.paths:
            for m in range(1, p.depth):
                assert {q.path_id for q in mine_neighbors(tree, p, m)} == oracle.neighbors(p, m)
            assert {q.path_id for q in mine_similar(tree, p)} == oracle.similar(p)
            assert {q.path_id for q in mine_referenceable(tree, p, table)} == oracle.referenceable(p)
            assert {q.path_id for q in mine_neighbors_of_referenceable(tree, p, table)} == oracle.neighbors_of_referenceable(p)
            checked += 1
        trees += 1
        biggest = max(biggest, len(tree.paths))
    elapsed = time.perf_counter() - started
    assert elapsed < 120, f"took {elapsed:.1f}s"
    return f"{trees} trees, {checked} paths, largest {biggest} paths, {elapsed:.1f}s"


# 2 -------------------------------------------------------------------------

@report("2 worked examples")
def test_worked_examples():
    tree = parse_juniper(
        "interfaces { ge-0/0/0 { unit 0 { family inet { address 192.168.1.1/24; mtu 1500; } } } }"
    )
    p = resolve_selector(tree, PathSelector(set_line="set interfaces ge-0/0/0 unit 0 family inet address 192.168.1.1/24"))
    n = [render_set_line(q) for q in mine_neighbors(tree, p)]
    assert "set interfaces ge-0/0/0 unit 0 family inet mtu 1500" in n

    tree = parse_juniper("Interfaces { Ethernet0 { IP { MTU 1500; } } Ethernet1 { IP { MTU 9000; } } }")
    p = resolve_selector(tree, PathSelector(set_line="set Interfaces Ethernet0 IP MTU 1500"))
    assert "set Interfaces Ethernet1 IP MTU 9000" in [render_set_line(q) for q in mine_similar(tree, p)]

    tree = parse_juniper("RouterA { Policy { ImportPolicy PolicyX; PolicyX { Filter AllowAll; } } }")
    p = resolve_selector(tree, PathSelector(set_line="set RouterA Policy ImportPolicy PolicyX"))
    assert "set RouterA Policy PolicyX Filter AllowAll" in [render_set_line(q) for q in mine_referenceable(tree, p)]
    return "N, S and R memberships hold"


# 3 -------------------------------------------------------------------------

@report("3 classification")
def test_classification():
    tree = parse_juniper("svc { a { Timeout 1000; } b { Timeout 2000; } c { Timeout 3000; } }")
    row = build_classification_table(tree)["Timeout"]
    assert row.value_class is ValueClass.PRE_DEFINED and (row.n, row.user_votes) == (3, 0)

    tree = parse_juniper(
        "bgp { g1 { ImportPolicy PolicyA; } g2 { ImportPolicy PolicyB; } g3 { ImportPolicy 1000; } } "
        "policy { PolicyA { then accept; } PolicyB { then reject; } }"
    )
    row = build_classification_table(tree)["ImportPolicy"]
    assert row.value_class is ValueClass.USER_DEFINED and (row.n, row.user_votes) == (3, 2)

    tree = parse_juniper("x { ref P1; } y { ref P2; } defs { P1 { k v; } }")
    row = build_classification_table(tree)["ref"]
    assert (row.n, row.user_votes, row.pre_votes) == (2, 1, 1)
    assert row.value_class is ValueClass.PRE_DEFINED
    assert vote("t", {"a": True, "b": False}).value_class is ValueClass.PRE_DEFINED
    return "Timeout PreDefined, ImportPolicy UserDefined, tie PreDefined"


# 4 -------------------------------------------------------------------------

def _final_session(provider, case):
    opts = DetectionOptions()
    target = case.mutated
    if target.path is None:
        session = start_session(target.excerpt, case.record.category.focus, ())
        source = lambda types: None  # noqa: E731 - nothing is ever offered
    else:
        session = start_session(target.path, case.record.category.focus, default_offer(1))
        source = context_source(target.tree, target.path, [target.tree], opts)
    while session.state is SessionState.AWAITING_MODEL:
        session = advance(session, provider.complete(outgoing(session, opts)), source, opts)
    return session


@report("4 protocol conformance")
def test_protocol_conformance():
    cases = default_cases()
    assert len(cases) == 16
    for case in cases:
        session = _final_session(protocol_script(case), case)
        expected = CATALOG[case.record.kind].expected_contexts
        assert session.state is SessionState.DONE, case.record.kind
        assert session.delivered == expected, (case.record.kind, session.delivered)
    vlan = next(c for c in cases if c.record.kind is MutationKind.INVALID_VLAN_ID)
    assert [t.wire for t in _final_session(protocol_script(vlan), vlan).delivered] == ["N", "R", "NR"]
    return "16/16 traces equal"


# 5 -------------------------------------------------------------------------

@report("5 harness arithmetic")
def test_harness_arithmetic():
    cases = default_cases()
    good = evaluate(llm_detector(script_from_dict(omniscient_script(cases))), cases)
    assert good.cell(Category.SYNTAX) == "4/4 (100%)"
    assert good.cell(Category.RANGE) == "4/4 (100%)"
    assert good.cell(Category.DEPENDENCY_CONFLICT) == "8/8 (100%)"
    assert good.cell() == "16/16 (100%)"
    assert "| **Total** | **32** | **32/32 (100%)** |" in good.to_markdown()

    clean = evaluate(llm_detector(script_from_dict(always_clean_script())), cases)
    assert sum(clean.detected.values()) == 0 and sum(clean.introduced.values()) == 16
    assert clean.cell() == "16/16 (100%)"
    return "omniscient 32/32, always-clean 0/16 + 16/16"


# 6 -------------------------------------------------------------------------

class Recording(ChatProvider):
    concurrent = False

    def __init__(self, inner):
        self.inner = inner
        self.estimates: list[int] = []
        self.wire: list[str] = []

    def _complete(self, messages):
        self.estimates.append(TokenBudget.estimate(messages))
        self.wire.append(json.dumps([m.to_wire() for m in messages]))
        return self.inner.complete(messages)


def _budget_run(tree):
    replies = [
        json.dumps({"action": "request_context", "context_types": ["N"]}),
        json.dumps({"action": "verdict", "misconfigured": False, "errParameter": [], "reason": "ok"}),
    ]
    rec = Recording(ScriptedProvider(replies))
    opts = DetectionOptions(budget=TokenBudget(1000), caps={t: None for t in ContextType})
    run_detection(rec, [tree], tree.paths[0], GENERAL, opts)
    return rec


@report("6 budget enforcement")
def test_budget_enforcement():
    body = "\n".join(f"        knob-{i} {i};" for i in range(10_000))
    tree = parse_juniper(f"system {{\n    block {{\n        target 1;\n{body}\n    }}\n}}\n", "adversarial.conf")
    assert len(mine_neighbors(tree, tree.paths[0])) == 10_000
    first, second = _budget_run(tree), _budget_run(tree)
    assert first.estimates and max(first.estimates) <= 1000, first.estimates
    delivery = json.loads(first.wire[1])[-1]["content"]
    assert "(truncated: showing " in delivery and " of 10000 entries)" in delivery
    assert first.wire == second.wire
    return f"max estimate {max(first.estimates)} tokens over {len(first.estimates)} requests"


# 7 -------------------------------------------------------------------------

@report("7 round-trip parsing")
def test_round_trip():
    for name in fixture_names():
        tree = parse_juniper(fixture_text(name))
        assert parse_juniper(serialize(tree, "braces")) == tree
        assert parse_json_tree(serialize(tree, "json")) == tree
    rng = random.Random(77)
    for _ in range(1000):
        tree = random_tree(rng, max_paths=500)
        again = parse_juniper(serialize(tree, "braces"))
        assert again == tree
        assert [render_set_line(p) for p in again.paths] == [render_set_line(p) for p in tree.paths]
        assert parse_json_tree(serialize(tree, "json")) == tree
    return f"{len(fixture_names())} fixtures + 1000 random trees, braces and json"


# 8 -------------------------------------------------------------------------

@report("8 intra-router statistic")
def test_intra_router_statistic():
    common = "vlans {\n    v100 {\n        vlan-id 100;\n    }\n}\n"
    odd = "vlans {\n    v100 {\n        vlan-id 101;\n    }\n}\n"
    texts = [common] * 190 + [odd] * 2
    trees = [parse_juniper(t, f"router-{i:03d}") for i, t in enumerate(texts)]
    p = trees[0].paths[0]
    assert count_line_in_texts(texts[1:], "vlan-id 100;") == 189
    assert mine_intra_router(trees, p, "router-000") == (189, 191)
    return "(189, 191)"


CRITERIA = [
    test_miner_oracle_equivalence,
    test_worked_examples,
    test_classification,
    test_protocol_conformance,
    test_harness_arithmetic,
    test_budget_enforcement,
    test_round_trip,
    test_intra_router_statistic,
]


if __name__ == "__main__":
    failed = 0
    for check in CRITERIA:
        try:
            check()
        except BaseException:
            failed += 1
    sys.exit(1 if failed else 0)
