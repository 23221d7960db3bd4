"""
Which values are names, and which are constants?
================================================

A value that also appears as a block name elsewhere (a filter, a policy)
is evidence that the parameter takes user-defined names.  Votes are pooled
per parameter.
"""

from confctx import build_classification_table, parse_juniper
from confctx.mutation import fixture_text

tree = parse_juniper(fixture_text(), "rtsw-alba.conf")
table = build_classification_table(tree)

print(f"{'parameter':<22} {'class':<12} votes (user/n)")
for row in table.rows.values():
    print(f"{row.parameter:<22} {row.value_class.value:<12} {row.user_votes}/{row.n}")

# A small hand-made case: two of three policy names are defined, so the
# numeric value 1000 is treated as a name too.
tree = parse_juniper(
    "bgp { a { import PolicyA; } b { import PolicyB; } c { import 1000; } }\n"
    "policy-options { PolicyA { then accept; } PolicyB { then reject; } }"
)
row = build_classification_table(tree)["import"]
print(f"\nimport: {row.value_class.value} with evidence {row.evidence}")
