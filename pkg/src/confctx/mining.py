"""Context mining for a configuration line.

Given the path under review, collect the other paths that help judge it:
neighbours in the same block, similar parameters in the same category,
definitions of the value it references, and the neighbours of those
definitions.  Across a multi-file snapshot, also count how many other
files carry the exact same statement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .classify import ClassificationTable, build_classification_table, classify
from .tree import ConfigPath, ConfigTree, render_set_line

DEFAULT_CAP = 50


class ContextType(enum.Enum):
    NEIGHBORING = "N"
    SIMILAR = "S"
    REFERENCEABLE = "R"
    NEIGHBORS_OF_REFERENCEABLE = "NR"
    INTRA_ROUTER = "IRC"

    @property
    def wire(self) -> str:
        return self.value

    @classmethod
    def from_wire(cls, name: str) -> "ContextType":
        key = name.strip().upper().replace("(P)", "").replace(" ", "")
        aliases = {
            "N(R)": "NR",
            "N(R(P))": "NR",
            "N(R())": "NR",
            "NEIGHBORING": "N",
            "NEIGHBOR": "N",
            "SIMILAR": "S",
            "REFERENCEABLE": "R",
            "INTRA_ROUTER": "IRC",
            "INTRA-ROUTER": "IRC",
        }
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown context type {name!r}")


CONTEXT_ORDER = tuple(ContextType)

CONTEXT_DESCRIPTIONS = {
    ContextType.NEIGHBORING: "other lines in the same block as the line under review",
    ContextType.SIMILAR: "lines setting the same parameter elsewhere in the same top-level category",
    ContextType.REFERENCEABLE: "lines under blocks named by the value of the line under review (its definitions)",
    ContextType.NEIGHBORS_OF_REFERENCEABLE: "lines neighbouring those referenced definitions",
    ContextType.INTRA_ROUTER: "how many other configuration files in the snapshot contain the exact same line",
}


class InvalidDepth(ValueError):
    pass


class OriginNotInSnapshot(LookupError):
    pass


class NrOrder(enum.Enum):
    """Composition order for the fourth context type."""

    NEIGHBORS_OF_REFERENCES = "N(R)"
    REFERENCES_OF_NEIGHBORS = "R(N)"


def _check_member(tree: ConfigTree, p: ConfigPath) -> None:
    if not (0 <= p.path_id < len(tree.paths)) or tree.paths[p.path_id] != p:
        raise ValueError(f"path {p.path_id} does not belong to {tree.source_id}")


def mine_neighbors(tree: ConfigTree, p: ConfigPath, m: Optional[int] = None) -> list[ConfigPath]:
    """Paths sharing the first ``m`` labels with ``p`` but ending at another parameter.

    ``m`` counts nodes from the root; the default ``k - 1`` means the same
    enclosing block.
    """
    _check_member(tree, p)
    k = p.depth
    if m is None:
        m = k - 1
    if not 1 <= m <= k - 1:
        raise InvalidDepth(f"m={m} outside 1..{k - 1}")
    return [
        tree.paths[pid]
        for pid in tree.paths_with_prefix(p.labels[:m])
        if pid != p.path_id and tree.paths[pid].parameter != p.parameter
    ]


def mine_similar(tree: ConfigTree, p: ConfigPath) -> list[ConfigPath]:
    _check_member(tree, p)
    return [
        tree.paths[pid]
        for pid in tree.paths_with_category_parameter(p.category, p.parameter)
        if pid != p.path_id
    ]


def _table(tree: ConfigTree, table: Optional[ClassificationTable]) -> ClassificationTable:
    return table if table is not None else build_classification_table(tree)


def is_gated(p: ConfigPath, table: ClassificationTable) -> bool:
    """Referenceable mining is skipped for pre-defined values."""
    return classify(table, p.parameter, p.value).is_predefined


def mine_referenceable(
    tree: ConfigTree, p: ConfigPath, table: Optional[ClassificationTable] = None
) -> list[ConfigPath]:
    _check_member(tree, p)
    if is_gated(p, _table(tree, table)):
        return []
    pids: set[int] = set()
    for pos in tree.sections_matching(p.value):
        pids.update(tree.paths_under_section(pos))
    pids.discard(p.path_id)
    return [tree.paths[pid] for pid in sorted(pids)]


def mine_neighbors_of_referenceable(
    tree: ConfigTree,
    p: ConfigPath,
    table: Optional[ClassificationTable] = None,
    order: NrOrder = NrOrder.NEIGHBORS_OF_REFERENCES,
) -> list[ConfigPath]:
    table = _table(tree, table)
    refs = mine_referenceable(tree, p, table)
    out: set[int] = set()
    if order is NrOrder.NEIGHBORS_OF_REFERENCES:
        for q in refs:
            out.update(x.path_id for x in mine_neighbors(tree, q))
    else:
        for q in mine_neighbors(tree, p):
            out.update(x.path_id for x in mine_referenceable(tree, q, table))
    out.discard(p.path_id)
    out.difference_update(q.path_id for q in refs)
    return [tree.paths[pid] for pid in sorted(out)]


def mine_intra_router(
    snapshot: Sequence[ConfigTree], p: ConfigPath, origin: str
) -> tuple[int, int]:
    """``(files carrying the same statement, other files)`` across the snapshot."""
    if not any(t.source_id == origin for t in snapshot):
        raise OriginNotInSnapshot(origin)
    others = [t for t in snapshot if t.source_id != origin]
    labels, value = p.statement
    return sum(t.has_statement(labels, value) for t in others), len(others)


@dataclass
class ContextBundle:
    target: ConfigPath
    source_id: str
    entries: dict[ContextType, list[tuple[ConfigPath, str]]] = field(default_factory=dict)
    prevalence: Optional[tuple[int, int]] = None
    caps_applied: dict[ContextType, bool] = field(default_factory=dict)
    totals: dict[ContextType, int] = field(default_factory=dict)
    gated: bool = False

    def lines(self, ctype: ContextType) -> list[str]:
        return [render_set_line(path) for path, _ in self.entries.get(ctype, [])]

    def to_dict(self) -> dict:
        out = {
            "target": render_set_line(self.target),
            "source": self.source_id,
            "path_id": self.target.path_id,
            "contexts": {t.wire: self.lines(t) for t in CONTEXT_ORDER if t in self.entries},
            "prevalence": None
            if self.prevalence is None
            else {"matching": self.prevalence[0], "total": self.prevalence[1]},
            "caps_applied": {t.wire: v for t, v in self.caps_applied.items()},
        }
        if self.gated:
            out["notes"] = [
                f"value {self.target.value!r} of {self.target.parameter!r} is pre-defined; "
                "referenceable mining skipped"
            ]
        return out


def assemble_bundle(
    tree: ConfigTree,
    p: ConfigPath,
    requested: Iterable[ContextType],
    caps: Optional[Mapping[ContextType, Optional[int]]] = None,
    table: Optional[ClassificationTable] = None,
    snapshot: Optional[Sequence[ConfigTree]] = None,
    m: Optional[int] = None,
    nr_order: NrOrder = NrOrder.NEIGHBORS_OF_REFERENCES,
) -> ContextBundle:
    """Mine every requested context type for ``p``.

    ``caps`` maps a type to its maximum entry count (``None`` for no cap);
    missing types fall back to :data:`DEFAULT_CAP`.
    """
    requested = [t for t in CONTEXT_ORDER if t in set(requested)]
    if not requested:
        raise ValueError("no context types requested")
    table = _table(tree, table)
    caps = dict(caps or {})
    bundle = ContextBundle(p, tree.source_id, gated=is_gated(p, table))

    for ctype in requested:
        if ctype is ContextType.INTRA_ROUTER:
            bundle.prevalence = mine_intra_router(snapshot or [tree], p, tree.source_id)
            continue
        if ctype is ContextType.NEIGHBORING:
            found = mine_neighbors(tree, p, m)
        elif ctype is ContextType.SIMILAR:
            found = mine_similar(tree, p)
        elif ctype is ContextType.REFERENCEABLE:
            found = mine_referenceable(tree, p, table)
        else:
            found = mine_neighbors_of_referenceable(tree, p, table, nr_order)
        cap = caps.get(ctype, DEFAULT_CAP)
        bundle.totals[ctype] = len(found)
        bundle.caps_applied[ctype] = cap is not None and len(found) > cap
        if bundle.caps_applied[ctype]:
            found = found[:cap]
        bundle.entries[ctype] = [(q, tree.source_id) for q in found]
    return bundle
