import json
import random

import pytest

from confctx.classify import (
    ValueClass,
    build_classification_table,
    build_pooled_table,
    classify,
    value_exists_as_intermediate,
    vote,
)
from confctx.tree import parse_juniper

from oracles import Oracle, random_tree

TIMEOUTS = """
services {
    a { timeout 1000; }
    b { timeout 2000; }
    c { timeout 3000; }
}
"""

POLICIES = """
protocols {
    bgp {
        group A { import-policy PolicyA; }
        group B { import-policy PolicyB; }
        group C { import-policy 1000; }
    }
}
policy-options {
    policy-statement PolicyA { then accept; }
    policy-statement PolicyB { then reject; }
}
"""


def test_timeout_values_are_predefined():
    table = build_classification_table(parse_juniper(TIMEOUTS))
    row = table["timeout"]
    assert (row.n, row.user_votes, row.pre_votes) == (3, 0, 3)
    assert row.value_class is ValueClass.PRE_DEFINED


def test_policy_names_are_userdefined():
    table = build_classification_table(parse_juniper(POLICIES))
    row = table["import-policy"]
    assert (row.n, row.user_votes) == (3, 2)
    assert row.value_class is ValueClass.USER_DEFINED
    # every value of the parameter shares the class, including the numeric one
    assert classify(table, "import-policy", "1000").value_class is ValueClass.USER_DEFINED


def test_tie_goes_to_predefined():
    row = vote("p", {"x": True, "y": False})
    assert row.value_class is ValueClass.PRE_DEFINED
    assert vote("p", {"x": True}).value_class is ValueClass.USER_DEFINED
    assert vote("p", {"x": False}).value_class is ValueClass.PRE_DEFINED
    with pytest.raises(ValueError):
        vote("p", {})


def test_passive_true_has_no_definition():
    tree = parse_juniper("protocols { ospf { area 0 { interface ge-0/0/0 { passive; } } } }")
    assert classify(build_classification_table(tree), "passive").is_predefined


def test_unknown_parameter():
    c = classify(build_classification_table(parse_juniper(TIMEOUTS)), "nope", "x")
    assert c.value_class is ValueClass.PRE_DEFINED and c.unknown


def test_carrying_paths_are_not_their_own_evidence():
    # the only section named 'x' holds the very statement whose value is 'x'
    tree = parse_juniper("x { name x; }")
    assert value_exists_as_intermediate(tree, "x")
    assert not value_exists_as_intermediate(tree, "x", exclude=[0])
    assert build_classification_table(tree)["name"].value_class is ValueClass.PRE_DEFINED


def test_token_match_for_multi_token_labels():
    tree = parse_juniper("a { filter-ref F1; } firewall { filter F1 { term t { then accept; } } }")
    assert build_classification_table(tree)["filter-ref"].value_class is ValueClass.USER_DEFINED


def test_vote_arithmetic_is_exclusive():
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randint(1, 9)
        ev = {str(i): rng.random() < 0.5 for i in range(n)}
        row = vote("p", ev)
        user = 2 * row.user_votes > n
        pre = 2 * row.pre_votes >= n
        assert user != pre
        assert (row.value_class is ValueClass.USER_DEFINED) == user


def test_matches_brute_force_on_random_trees():
    rng = random.Random(2)
    for _ in range(150):
        tree = random_tree(rng, max_paths=150)
        oracle = Oracle(tree)
        table = build_classification_table(tree)
        assert set(table.rows) == set(oracle.classes)
        for param, user in oracle.classes.items():
            assert (table[param].value_class is ValueClass.USER_DEFINED) == user


def test_pooled_table_unions_values():
    a = parse_juniper("x { ref P1; }", "a")
    b = parse_juniper("x { ref P2; } defs { P2 { k v; } }", "b")
    assert build_classification_table(a)["ref"].value_class is ValueClass.PRE_DEFINED
    pooled = build_pooled_table([a, b])
    assert (pooled["ref"].n, pooled["ref"].user_votes) == (2, 1)
    assert pooled["ref"].value_class is ValueClass.PRE_DEFINED


def test_table_json_is_sorted_and_deterministic():
    tree = parse_juniper(POLICIES)
    one = build_classification_table(tree).to_json(with_evidence=True)
    two = build_classification_table(parse_juniper(POLICIES)).to_json(with_evidence=True)
    assert one == two
    params = [r["parameter"] for r in json.loads(one)]
    assert params == sorted(params)
