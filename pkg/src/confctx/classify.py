"""Pre-defined vs. user-defined parameter values.

A value is *evidenced* as user-defined when it shows up as an intermediate
node of some other path (a policy name that is also a ``policy-statement``
block, say).  Evidence is then pooled per parameter label by majority vote
so that every value of one parameter gets the same class.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .tree import ConfigTree


class ValueClass(enum.Enum):
    USER_DEFINED = "UserDefined"
    PRE_DEFINED = "PreDefined"


@dataclass(frozen=True)
class ClassificationRow:
    parameter: str
    value_class: ValueClass
    n: int
    user_votes: int
    pre_votes: int
    evidence: dict[str, bool] = field(compare=True)

    def to_dict(self, with_evidence: bool = False) -> dict:
        out = {
            "parameter": self.parameter,
            "class": self.value_class.value,
            "n": self.n,
            "user_votes": self.user_votes,
            "pre_votes": self.pre_votes,
        }
        if with_evidence:
            out["evidence"] = dict(self.evidence)
        return out


class Classification(NamedTuple):
    value_class: ValueClass
    unknown: bool

    @property
    def is_predefined(self) -> bool:
        return self.value_class is ValueClass.PRE_DEFINED


class ClassificationTable:
    """Rows keyed by parameter label, sorted by label."""

    def __init__(self, rows: Iterable[ClassificationRow]):
        self.rows: dict[str, ClassificationRow] = {r.parameter: r for r in sorted(rows, key=lambda r: r.parameter)}

    def __contains__(self, parameter: str) -> bool:
        return parameter in self.rows

    def __getitem__(self, parameter: str) -> ClassificationRow:
        return self.rows[parameter]

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClassificationTable):
            return NotImplemented
        return list(self.rows.values()) == list(other.rows.values())

    def to_json(self, with_evidence: bool = False) -> str:
        return json.dumps([r.to_dict(with_evidence) for r in self.rows.values()], indent=2)


def vote(parameter: str, evidence: dict[str, bool]) -> ClassificationRow:
    n = len(evidence)
    if n < 1:
        raise ValueError(f"parameter {parameter!r} has no values")
    user = sum(evidence.values())
    pre = n - user
    # ties go to pre-defined: pre >= n/2, compared in integers
    cls = ValueClass.USER_DEFINED if 2 * user > n else ValueClass.PRE_DEFINED
    return ClassificationRow(parameter, cls, n, user, pre, dict(sorted(evidence.items())))


def value_exists_as_intermediate(
    tree: ConfigTree, v: str, exclude: Optional[Iterable[int]] = None
) -> bool:
    """True when some non-root section node's label matches ``v``.

    ``exclude`` lists path ids that do not count as witnesses; the table
    builder passes the paths carrying the value itself.
    """
    if not v:
        return False
    skip = set(exclude or ())
    for pos in tree.sections_matching(v):
        if not skip:
            return True
        if any(pid not in skip for pid in tree.paths_under_section(pos)):
            return True
    return False


def _collect(trees: Sequence[ConfigTree]) -> dict[str, dict[str, bool]]:
    evidence: dict[str, dict[str, bool]] = {}
    for tree in trees:
        carriers: dict[tuple[str, str], list[int]] = {}
        for p in tree.paths:
            carriers.setdefault((p.parameter, p.value), []).append(p.path_id)
        for (param, value), pids in carriers.items():
            seen = value_exists_as_intermediate(tree, value, exclude=pids)
            row = evidence.setdefault(param, {})
            row[value] = row.get(value, False) or seen
    return evidence


def build_classification_table(tree: ConfigTree) -> ClassificationTable:
    return ClassificationTable(vote(param, ev) for param, ev in _collect([tree]).items())


def build_pooled_table(trees: Sequence[ConfigTree]) -> ClassificationTable:
    """Vote over the union of values across several files.

    A value counts as evidenced if it is evidenced in any one of them.
    """
    return ClassificationTable(vote(param, ev) for param, ev in _collect(list(trees)).items())


def classify(table: ClassificationTable, parameter: str, value: str = "") -> Classification:
    # value is accepted for symmetry with the (parameter, value) pair; the row decides
    row = table.rows.get(parameter)
    if row is None:
        return Classification(ValueClass.PRE_DEFINED, True)
    return Classification(row.value_class, False)
