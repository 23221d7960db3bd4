"""Synthetic misconfiguration injection and detection scoring.

Sixteen mutation kinds in three categories (syntax, range,
dependency/conflict) are applied to clean configuration text.  Each kind is
a *recipe*: which line it targets and which edit it makes.  Edits are made
on the source text at the spans recorded by the parser, so the rest of
the file keeps its layout and the recorded patch stays small.
"""

from __future__ import annotations

import difflib
import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

from .prompting import (
    CATEGORY_FOCUSES,
    DEPENDENCY_CONFLICT,
    RANGE,
    SYNTAX,
    DetectionFocus,
    DetectionOptions,
    TextExcerpt,
    Verdict,
    run_detection,
)
from .mining import ContextType
from .providers import ChatProvider, ScriptedProvider
from .tree import (
    ConfigParseError,
    ConfigPath,
    ConfigTree,
    PathSelector,
    parse_juniper,
    quote_token,
    render_set_line,
    resolve_selector,
    serialize,
)

N, S, R, NR = (
    ContextType.NEIGHBORING,
    ContextType.SIMILAR,
    ContextType.REFERENCEABLE,
    ContextType.NEIGHBORS_OF_REFERENCEABLE,
)


class Category(enum.Enum):
    SYNTAX = "Syntax"
    RANGE = "Range"
    DEPENDENCY_CONFLICT = "DependencyConflict"

    @property
    def focus(self) -> DetectionFocus:
        return {Category.SYNTAX: SYNTAX, Category.RANGE: RANGE, Category.DEPENDENCY_CONFLICT: DEPENDENCY_CONFLICT}[self]

    @property
    def row_label(self) -> str:
        return {Category.SYNTAX: "Syntax Error", Category.RANGE: "Range Error", Category.DEPENDENCY_CONFLICT: "D/C Error"}[self]


class Layer(enum.Enum):
    TREE = "Tree"
    TEXT = "Text"


class MutationKind(enum.Enum):
    MISSING_BRACE = "MissingBrace"
    INVALID_KEYWORD = "InvalidKeyword"
    INCORRECT_HIERARCHY = "IncorrectHierarchy"
    INVALID_IP_ADDRESS = "InvalidIpAddress"
    INVALID_MTU = "InvalidMtu"
    INVALID_VLAN_ID = "InvalidVlanId"
    INVALID_AS_NUMBER = "InvalidAsNumber"
    INVALID_PREFIX_LIMIT = "InvalidPrefixLimit"
    NONEXISTENT_GROUP = "NonexistentGroup"
    POLICY_CONFLICT = "PolicyConflict"
    NONEXISTENT_FILTER = "NonexistentFilter"
    NONEXISTENT_POLICY = "NonexistentPolicy"
    INCORRECT_FILTER_USAGE = "IncorrectFilterUsage"
    DISABLED_SAMPLING = "DisabledSampling"
    VRF_TARGET_CONFLICT = "VrfTargetConflict"
    ABNORMAL_SMALL_MTU = "AbnormalSmallMtu"

    @property
    def category(self) -> Category:
        return CATALOG[self].category

    @property
    def layer(self) -> Layer:
        return CATALOG[self].layer


class NoCompatibleTarget(LookupError):
    pass


@dataclass(frozen=True)
class Recipe:
    """How one kind picks its line and edits it.

    ``parameter``/``within`` select candidate paths; ``op`` names the edit
    and ``arg`` parameterises it (new value, suffix, inserted label ...).
    """

    op: str
    parameter: Optional[str] = None
    within: Optional[str] = None
    category: Optional[str] = None
    arg: Optional[str] = None


@dataclass(frozen=True)
class CatalogEntry:
    kind: MutationKind
    category: Category
    layer: Layer
    description: str
    example: str
    expected_contexts: tuple[ContextType, ...]
    recipe: Recipe


def _entry(kind, category, layer, description, example, contexts, recipe):
    return kind, CatalogEntry(kind, category, layer, description, example, tuple(contexts), recipe)


K = MutationKind
C = Category
CATALOG: dict[MutationKind, CatalogEntry] = dict(
    [
        _entry(K.MISSING_BRACE, C.SYNTAX, Layer.TEXT, "Missing brace",
               "closing brace of an interface block deleted", (),
               Recipe("drop_close_brace", category="interfaces")),
        _entry(K.INVALID_KEYWORD, C.SYNTAX, Layer.TREE, "Invalid keyword",
               'mtu "True"', (N, R), Recipe("set_value", parameter="mtu", arg="True")),
        _entry(K.INCORRECT_HIERARCHY, C.SYNTAX, Layer.TEXT, "Incorrect hierarchy",
               'host-name "{rtsw.alba-re1}"', (N,), Recipe("nest_value", parameter="host-name")),
        _entry(K.INVALID_IP_ADDRESS, C.SYNTAX, Layer.TREE, "Invalid IP address",
               "neighbor 192.168.253.1.1", (N, R), Recipe("append_value", parameter="neighbor", arg=".1")),
        _entry(K.INVALID_MTU, C.RANGE, Layer.TREE, "Invalid MTU",
               'mtu "10000"', (N, R), Recipe("set_value", parameter="mtu", arg="10000")),
        _entry(K.INVALID_VLAN_ID, C.RANGE, Layer.TREE, "Invalid VLAN ID",
               'vlan-id "5000"', (N, R, NR), Recipe("set_value", parameter="vlan-id", arg="5000")),
        _entry(K.INVALID_AS_NUMBER, C.RANGE, Layer.TREE, "Invalid AS",
               "autonomous-system 70000", (N, R), Recipe("set_value", parameter="autonomous-system", arg="70000")),
        _entry(K.INVALID_PREFIX_LIMIT, C.RANGE, Layer.TREE, "Invalid prefix limit",
               'maximum "200000"', (N, R), Recipe("set_value", parameter="maximum", arg="200000")),
        _entry(K.NONEXISTENT_GROUP, C.DEPENDENCY_CONFLICT, Layer.TREE, "Non-existent group",
               'apply-groups "L2-LSP-ATTRIBUTES"', (N, R, NR),
               Recipe("set_value", parameter="apply-groups", arg="L2-LSP-ATTRIBUTES")),
        _entry(K.POLICY_CONFLICT, C.DEPENDENCY_CONFLICT, Layer.TREE, "Policy conflict",
               "community delete X added next to community add X", (N, R, NR),
               Recipe("insert_sibling", parameter="community add", arg="community delete")),
        _entry(K.NONEXISTENT_FILTER, C.DEPENDENCY_CONFLICT, Layer.TREE, "Non-existent filter",
               'input-list "uplink"', (N, R), Recipe("set_value", parameter="input-list", arg="uplink")),
        _entry(K.NONEXISTENT_POLICY, C.DEPENDENCY_CONFLICT, Layer.TREE, "Non-existent policy",
               'export "OESS-400-300-LOOP"', (R,), Recipe("set_value", parameter="export", arg="OESS-400-300-LOOP")),
        _entry(K.INCORRECT_FILTER_USAGE, C.DEPENDENCY_CONFLICT, Layer.TREE, "Incorrect filter usage",
               "family mpls input-list takes the inet6 filter", (R, S),
               Recipe("borrow_value", parameter="input-list", within="family mpls", arg="family inet6")),
        _entry(K.DISABLED_SAMPLING, C.DEPENDENCY_CONFLICT, Layer.TREE, "Disabled sampling",
               "family inet6 sampling block deactivated", (R, N),
               Recipe("deactivate_section", within="family inet6", arg="sampling")),
        _entry(K.VRF_TARGET_CONFLICT, C.DEPENDENCY_CONFLICT, Layer.TREE, "VRF target conflict",
               'vrf-target target:11537:"313001"', (S,),
               Recipe("replace_last_field", parameter="vrf-target", arg="313001")),
        _entry(K.ABNORMAL_SMALL_MTU, C.DEPENDENCY_CONFLICT, Layer.TREE, "Abnormal small MTU",
               'family iso mtu "1497"', (R, S), Recipe("set_value", parameter="mtu", within="family iso", arg="1497")),
    ]
)
del K, C


def kind_catalog() -> list[CatalogEntry]:
    return list(CATALOG.values())


# ---------------------------------------------------------------------------
# records and patches


@dataclass(frozen=True)
class MutationRecord:
    kind: MutationKind
    category: Category
    source_id: str
    target: str
    mutated: str
    layer: Layer
    seed: int
    parameter: str
    target_path_id: int
    review: str
    patch: tuple[tuple[int, int, tuple[str, ...]], ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "category": self.category.value,
            "source_id": self.source_id,
            "target": self.target,
            "mutated": self.mutated,
            "layer": self.layer.value,
            "seed": self.seed,
            "parameter": self.parameter,
            "target_path_id": self.target_path_id,
            "review": self.review,
            "patch": [{"start": a, "end": b, "lines": list(lines)} for a, b, lines in self.patch],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MutationRecord":
        return cls(
            kind=MutationKind(d["kind"]),
            category=Category(d["category"]),
            source_id=d["source_id"],
            target=d["target"],
            mutated=d["mutated"],
            layer=Layer(d["layer"]),
            seed=d["seed"],
            parameter=d["parameter"],
            target_path_id=d["target_path_id"],
            review=d["review"],
            patch=tuple((p["start"], p["end"], tuple(p["lines"])) for p in d["patch"]),
        )


def make_patch(original: str, mutated: str) -> tuple[tuple[int, int, tuple[str, ...]], ...]:
    """Line hunks ``(start, end, replacement)`` against the original text."""
    a = original.splitlines(keepends=True)
    b = mutated.splitlines(keepends=True)
    hunks = []
    for tag, i1, i2, j1, j2 in difflib.SequenceMatcher(None, a, b, autojunk=False).get_opcodes():
        if tag != "equal":
            hunks.append((i1, i2, tuple(b[j1:j2])))
    return tuple(hunks)


def apply_patch(original: str, patch) -> str:
    lines = original.splitlines(keepends=True)
    out: list[str] = []
    pos = 0
    for start, end, replacement in patch:
        out.extend(lines[pos:start])
        out.extend(replacement)
        pos = end
    out.extend(lines[pos:])
    return "".join(out)


# ---------------------------------------------------------------------------
# injection


@dataclass(frozen=True)
class ReviewTarget:
    """What a detector is shown: a tree path, or a raw excerpt if the text no longer parses."""

    source_id: str
    tree: Optional[ConfigTree] = None
    path: Optional[ConfigPath] = None
    excerpt: Optional[TextExcerpt] = None

    @property
    def line(self) -> str:
        return self.excerpt.text if self.excerpt is not None else render_set_line(self.path)


@dataclass(frozen=True)
class Case:
    record: MutationRecord
    original_text: str
    mutated_text: str
    mutated: ReviewTarget
    original: ReviewTarget


def _candidates(tree: ConfigTree, recipe: Recipe) -> list[ConfigPath]:
    out = []
    for p in tree.paths:
        if recipe.parameter is not None and p.parameter != recipe.parameter:
            continue
        if recipe.category is not None and p.category != recipe.category:
            continue
        if recipe.within is not None and recipe.within not in p.labels[1:-1]:
            continue
        if recipe.op == "drop_close_brace" and p.depth < 4:
            continue
        if recipe.op == "deactivate_section":
            i = p.labels.index(recipe.within)
            if p.labels[i + 1 : i + 2] != (recipe.arg,) or p.depth < i + 3:
                continue
        if recipe.op == "borrow_value" and _borrow_source(tree, recipe, p) is None:
            continue
        out.append(p)
    return out


def _enclosing(chain, label):
    return next(node for node in chain if node.label == label)


def _borrow_source(tree: ConfigTree, recipe: Recipe, p: ConfigPath) -> Optional[str]:
    for q in tree.paths:
        if q.parameter == recipe.parameter and recipe.arg in q.labels[1:-1] and q.value != p.value:
            return q.value
    return None


def _line_bounds(text: str, start: int, end: int) -> tuple[int, int]:
    """Widen ``[start, end)`` to whole lines when only whitespace surrounds it."""
    ls = text.rfind("\n", 0, start) + 1
    le = text.find("\n", end)
    le = len(text) if le < 0 else le + 1
    if text[ls:start].strip() == "" and text[end:le].strip() == "":
        return ls, le
    return start, end


def _indent_of(text: str, pos: int) -> str:
    ls = text.rfind("\n", 0, pos) + 1
    line = text[ls:pos]
    return line[: len(line) - len(line.lstrip())]


def _excerpt(text: str, line_no: int, source_id: str, radius: int = 3) -> TextExcerpt:
    lines = text.splitlines()
    lo = max(1, line_no - radius)
    hi = min(len(lines), line_no + radius)
    return TextExcerpt(source_id, "\n".join(lines[lo - 1 : hi]), lo, hi)


def _as_text(artifact: Union[str, ConfigTree]) -> tuple[str, str]:
    if isinstance(artifact, ConfigTree):
        return serialize(artifact, "braces"), artifact.source_id
    return artifact, "<memory>"


def build_case(
    artifact: Union[str, ConfigTree],
    kind: MutationKind,
    target: Optional[PathSelector] = None,
    seed: int = 0,
    source_id: Optional[str] = None,
) -> Case:
    """Inject one mutation and return the full case: texts, record and review targets."""
    text, default_id = _as_text(artifact)
    source_id = source_id or default_id
    tree = parse_juniper(text, source_id)
    entry = CATALOG[kind]
    recipe = entry.recipe

    candidates = _candidates(tree, recipe)
    if target is not None:
        chosen = resolve_selector(tree, target)
        if chosen not in candidates:
            raise NoCompatibleTarget(f"{render_set_line(chosen)!r} cannot host {kind.value}")
    elif not candidates:
        raise NoCompatibleTarget(f"no line in {source_id} can host {kind.value}")
    else:
        # first compatible path by id; the seed rotates through the candidates
        chosen = candidates[seed % len(candidates)]

    chain = tree.node_chain(chosen.path_id)
    leaf = chain[-1]
    op, arg = recipe.op, recipe.arg
    review_id = chosen.path_id
    original_review = chosen
    parameter = chosen.parameter
    error_line: Optional[int] = None

    if op in ("set_value", "append_value", "replace_last_field", "borrow_value"):
        if op == "set_value":
            new = arg
        elif op == "append_value":
            new = chosen.value + arg
        elif op == "replace_last_field":
            head = chosen.value.rsplit(":", 1)[0] if ":" in chosen.value else chosen.value
            new = f"{head}:{arg}"
        else:
            new = _borrow_source(tree, recipe, chosen)
        if new == chosen.value:
            new = new + "0"
        a, b = leaf.value_span
        mutated = text[:a] + quote_token(new) + text[b:]
    elif op == "insert_sibling":
        end = leaf.char_span[1]
        pad = _indent_of(text, leaf.char_span[0])
        mutated = text[:end] + f"\n{pad}{arg} {quote_token(chosen.value)};" + text[end:]
        review_id = chosen.path_id + 1
        parameter = arg
    elif op == "deactivate_section":
        block = chain[chain.index(_enclosing(chain, recipe.within)) + 1]
        a = block.char_span[0]
        mutated = text[:a] + "inactive: " + text[a:]
        parameter = recipe.within
    elif op == "nest_value":
        a, b = leaf.char_span
        mutated = text[:a] + f"{quote_token(chosen.parameter)} {{ {quote_token(chosen.value)}; }}" + text[b:]
    elif op == "drop_close_brace":
        block = chain[2]
        close = block.char_span[1] - 1
        a, b = _line_bounds(text, close, close + 1)
        mutated = text[:a] + text[b:]
        error_line = text.count("\n", 0, close) + 1
        parameter = block.label
    else:  # pragma: no cover - catalog and ops move together
        raise ValueError(f"unknown recipe op {op!r}")

    patch = make_patch(text, mutated)
    if error_line is None:
        mtree = parse_juniper(mutated, source_id)
        mpath = mtree.paths[review_id]
        review = ReviewTarget(source_id, mtree, mpath)
        after = render_set_line(mpath)
    else:
        try:
            mtree = parse_juniper(mutated, source_id)
        except ConfigParseError:
            mtree = None
        review = ReviewTarget(source_id, mtree, None, _excerpt(mutated, min(error_line, mutated.count("\n") + 1), source_id))
        after = "".join(
            difflib.unified_diff(
                text.splitlines(keepends=True), mutated.splitlines(keepends=True), source_id, source_id + " (mutated)"
            )
        )

    record = MutationRecord(
        kind=kind,
        category=entry.category,
        source_id=source_id,
        target=render_set_line(chosen),
        mutated=after,
        layer=entry.layer,
        seed=seed,
        parameter=parameter,
        target_path_id=chosen.path_id,
        review=review.line,
        patch=patch,
    )
    return Case(record, text, mutated, review, ReviewTarget(source_id, tree, original_review))


def inject(
    artifact: Union[str, ConfigTree],
    kind: MutationKind,
    target: Optional[PathSelector] = None,
    seed: int = 0,
    source_id: Optional[str] = None,
) -> tuple[str, MutationRecord]:
    """Apply ``kind`` to ``artifact``; returns the mutated text and its ground-truth record."""
    case = build_case(artifact, kind, target, seed, source_id)
    return case.mutated_text, case.record


# ---------------------------------------------------------------------------
# bundled fixtures


def fixture_names() -> list[str]:
    return sorted(p.name for p in resources.files("confctx.fixtures").iterdir() if p.name.endswith(".conf"))


def fixture_text(name: str = "rtsw-alba.conf") -> str:
    return resources.files("confctx.fixtures").joinpath(name).read_text(encoding="utf-8")


def default_cases(name: str = "rtsw-alba.conf", seed: int = 0) -> list[Case]:
    """One case per catalog kind, all injected into the same clean fixture."""
    text = fixture_text(name)
    return [build_case(text, kind, seed=seed, source_id=name) for kind in MutationKind]


# ---------------------------------------------------------------------------
# evaluation

Detector = Callable[[ReviewTarget, DetectionFocus], Verdict]


def attributes(verdict: Verdict, parameter: str) -> bool:
    """Does the verdict name the mutated parameter?  Case-insensitive, substring either way."""
    want = parameter.lower()
    for name in verdict.err_parameters:
        got = name.strip().lower()
        if got and (got == want or got in want or want in got):
            return True
    return False


@dataclass
class CaseRow:
    record: MutationRecord
    verdict: Optional[Verdict]
    correct: bool
    error: Optional[str] = None


@dataclass
class OriginalRow:
    target: str
    verdicts: dict[str, Optional[bool]]
    passed: bool
    error: Optional[str] = None


@dataclass
class EvalReport:
    introduced: dict[Category, int] = field(default_factory=dict)
    detected: dict[Category, int] = field(default_factory=dict)
    clean_total: int = 0
    clean_passed: int = 0
    rows: list[CaseRow] = field(default_factory=list)
    original_rows: list[OriginalRow] = field(default_factory=list)

    def rate(self, category: Category) -> float:
        n = self.introduced.get(category, 0)
        return self.detected.get(category, 0) / n if n else 0.0

    @property
    def total(self) -> tuple[int, int]:
        return (
            sum(self.detected.values()) + self.clean_passed,
            sum(self.introduced.values()) + self.clean_total,
        )

    def cell(self, category: Optional[Category] = None) -> str:
        if category is None:
            return _cell(self.clean_passed, self.clean_total)
        return _cell(self.detected.get(category, 0), self.introduced.get(category, 0))

    def to_dict(self) -> dict:
        hit, n = self.total
        return {
            "categories": {
                c.value: {"introduced": self.introduced.get(c, 0), "detected": self.detected.get(c, 0), "rate": self.rate(c)}
                for c in Category
            },
            "originals": {"clean_total": self.clean_total, "clean_passed": self.clean_passed},
            "total": {"correct": hit, "cases": n},
            "cases": [
                {
                    **row.record.to_dict(),
                    "verdict": None
                    if row.verdict is None
                    else {
                        "misconfigured": row.verdict.misconfigured,
                        "errParameter": list(row.verdict.err_parameters),
                        "reason": row.verdict.reason,
                        "requested_contexts": [t.wire for t in row.verdict.requested_contexts],
                        "iterations": row.verdict.iterations,
                    },
                    "correct": row.correct,
                    "error": row.error,
                }
                for row in self.rows
            ],
            "originals_detail": [
                {"target": o.target, "verdicts": o.verdicts, "passed": o.passed, "error": o.error}
                for o in self.original_rows
            ],
        }

    def to_markdown(self) -> str:
        lines = ["| Type | Cases | Correctly detected |", "|---|---|---|"]
        for c in Category:
            lines.append(f"| {c.row_label} | {self.introduced.get(c, 0)} | {self.cell(c)} |")
        lines.append(f"| Original Configs (No Error) | {self.clean_total} | {self.cell()} |")
        hit, n = self.total
        lines.append(f"| **Total** | **{n}** | **{_cell(hit, n)}** |")
        return "\n".join(lines) + "\n"


def _cell(hit: int, n: int) -> str:
    pct = 100.0 * hit / n if n else 0.0
    text = f"{pct:.1f}".rstrip("0").rstrip(".")
    return f"{hit}/{n} ({text}%)"


def evaluate(
    detector: Detector,
    cases: Sequence[Case],
    originals: Optional[Sequence[ReviewTarget]] = None,
) -> EvalReport:
    """Score a detector on mutated cases (true category only) and clean originals (all categories)."""
    report = EvalReport({c: 0 for c in Category}, {c: 0 for c in Category})
    for case in cases:
        rec = case.record
        report.introduced[rec.category] += 1
        verdict, error = None, None
        try:
            verdict = detector(case.mutated, rec.category.focus)
        except Exception as exc:  # any detector failure counts as a miss
            error = f"{type(exc).__name__}: {exc}"
        correct = verdict is not None and verdict.misconfigured and attributes(verdict, rec.parameter)
        report.detected[rec.category] += correct
        report.rows.append(CaseRow(rec, verdict, correct, error))

    if originals is None:
        originals = [case.original for case in cases]
    for target in originals:
        report.clean_total += 1
        flags: dict[str, Optional[bool]] = {}
        error = None
        for focus in CATEGORY_FOCUSES:
            try:
                flags[focus.name] = detector(target, focus).misconfigured
            except Exception as exc:
                flags[focus.name] = None
                error = f"{type(exc).__name__}: {exc}"
        passed = all(v is False for v in flags.values())
        report.clean_passed += passed
        report.original_rows.append(OriginalRow(target.line, flags, passed, error))
    return report


def llm_detector(
    provider: ChatProvider,
    options: DetectionOptions = DetectionOptions(),
    snapshot: Sequence[ConfigTree] = (),
) -> Detector:
    """A detector that runs the iterative prompting protocol against ``provider``."""

    def detect(target: ReviewTarget, focus: DetectionFocus) -> Verdict:
        if target.path is None:
            return run_detection(provider, [], target.excerpt, focus, options)
        trees = [target.tree] + [t for t in snapshot if t.source_id != target.source_id]
        return run_detection(provider, trees, target.path, focus, options, origin=target.source_id)

    return detect


def _verdict_reply(misconfigured: bool, params: Iterable[str] = (), reason: str = "") -> str:
    return json.dumps(
        {"action": "verdict", "misconfigured": misconfigured, "errParameter": list(params), "reason": reason}
    )


CLEAN_REPLY = _verdict_reply(False, (), "no misconfiguration found")


def omniscient_script(cases: Sequence[Case]) -> dict:
    """A scripted-provider script that flags exactly the mutated lines, naming the right parameter."""
    rules = [
        {
            "contains": case.mutated.line + "\n",
            "respond": _verdict_reply(True, [case.record.parameter], f"injected {case.record.kind.value}"),
        }
        for case in cases
    ]
    return {"rules": rules, "default": CLEAN_REPLY}


def always_clean_script() -> dict:
    return {"default": CLEAN_REPLY}


def protocol_script(case: Case) -> ScriptedProvider:
    """Replies that request the catalog's expected contexts one at a time, then flag the line."""
    expected = CATALOG[case.record.kind].expected_contexts
    responses = [json.dumps({"action": "request_context", "context_types": [t.wire]}) for t in expected]
    responses.append(_verdict_reply(True, [case.record.parameter], "scripted"))
    return ScriptedProvider(responses)


def write_truth(path, record: MutationRecord) -> None:
    Path(path).write_text(json.dumps(record.to_dict(), indent=2) + "\n", encoding="utf-8")


def read_truth(path) -> MutationRecord:
    return MutationRecord.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "CATALOG",
    "Case",
    "CatalogEntry",
    "Category",
    "EvalReport",
    "Layer",
    "MutationKind",
    "MutationRecord",
    "NoCompatibleTarget",
    "always_clean_script",
    "ReviewTarget",
    "apply_patch",
    "build_case",
    "default_cases",
    "evaluate",
    "fixture_names",
    "fixture_text",
    "inject",
    "kind_catalog",
    "llm_detector",
    "omniscient_script",
    "protocol_script",
    "read_truth",
    "write_truth",
]
