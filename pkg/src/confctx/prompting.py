"""Iterative, request-driven prompting.

The model first sees only the line under review and a menu of context
types.  Each turn it either asks for more context (which is mined and
delivered) or returns a verdict.  The state machine lives in
:func:`advance`, a pure function of the session and the model's reply, so
a recorded conversation can be replayed step for step.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence, Union

from .classify import ClassificationTable, build_classification_table
from .mining import (
    CONTEXT_DESCRIPTIONS,
    CONTEXT_ORDER,
    DEFAULT_CAP,
    ContextBundle,
    ContextType,
    NrOrder,
    assemble_bundle,
)
from .providers import ChatMessage, ChatProvider, ProviderError, Role
from .tree import ConfigPath, ConfigTree, render_set_line

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# vocabulary


@dataclass(frozen=True)
class DetectionFocus:
    name: str
    custom: bool = False

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("focus must be non-empty")

    @property
    def prompt_name(self) -> str:
        if self.custom:
            return " ".join(self.name.split()).upper()
        return _FOCUS_PROMPT[self.name]

    @classmethod
    def parse(cls, text: str) -> "DetectionFocus":
        key = re.sub(r"[^a-z]", "", text.lower())
        for name in _FOCUS_PROMPT:
            if key == re.sub(r"[^a-z]", "", name.lower()) or key == re.sub(r"[^a-z]", "", _FOCUS_PROMPT[name].lower()):
                return cls(name)
        if key in ("dc", "dependency", "conflict"):
            return cls("DependencyConflict")
        return cls(text.strip(), custom=True)

    def __str__(self) -> str:
        return self.name if not self.custom else self.prompt_name


_FOCUS_PROMPT = {
    "Syntax": "SYNTAX",
    "Range": "RANGE",
    "DependencyConflict": "DEPENDENCY/CONFLICT",
    "General": "GENERAL",
}

SYNTAX = DetectionFocus("Syntax")
RANGE = DetectionFocus("Range")
DEPENDENCY_CONFLICT = DetectionFocus("DependencyConflict")
GENERAL = DetectionFocus("General")
CATEGORY_FOCUSES = (SYNTAX, RANGE, DEPENDENCY_CONFLICT)


@dataclass(frozen=True)
class RequestContext:
    types: tuple[ContextType, ...]


@dataclass(frozen=True)
class FinalVerdict:
    misconfigured: bool
    err_parameters: tuple[str, ...]
    reason: str


ModelAction = Union[RequestContext, FinalVerdict]


@dataclass(frozen=True)
class Verdict:
    misconfigured: bool
    err_parameters: tuple[str, ...]
    reason: str
    focus: DetectionFocus
    requested_contexts: tuple[ContextType, ...]
    iterations: int
    token_estimate: int


@dataclass(frozen=True)
class TextExcerpt:
    """Raw text under review when no tree path exists (the file does not parse)."""

    source_id: str
    text: str
    first_line: int
    last_line: int

    @property
    def label(self) -> str:
        return f"lines {self.first_line}-{self.last_line} of {self.source_id}"


class SessionState(enum.Enum):
    AWAITING_MODEL = "AwaitingModel"
    DELIVERING = "Delivering"
    DONE = "Done"
    FAILED = "Failed"


class ProtocolError(RuntimeError):
    kind = "ProtocolError"

    def __init__(self, message: str, session: Optional["DetectionSession"] = None):
        super().__init__(message)
        self.session = session


class ActionError(ProtocolError):
    """The model's reply could not be turned into an action."""


class Unparseable(ActionError):
    kind = "Unparseable"


class InvalidAction(ActionError):
    kind = "InvalidAction"


class EmptyRequest(ActionError):
    kind = "EmptyRequest"


class Undecided(ProtocolError):
    kind = "Undecided"


class BudgetExhausted(ProtocolError):
    kind = "BudgetExhausted"


class ProviderFailure(ProtocolError):
    kind = "ProviderError"


@dataclass(frozen=True)
class TokenBudget:
    max_prompt_tokens: int = 120_000

    @staticmethod
    def estimate_text(text: str) -> int:
        return math.ceil(len(text) / 4)

    @staticmethod
    def estimate(messages: Sequence[ChatMessage]) -> int:
        return math.ceil(sum(len(m.content) for m in messages) / 4)


@dataclass(frozen=True)
class DetectionOptions:
    max_iterations: int = 5
    retry_limit: int = 2
    budget: TokenBudget = TokenBudget()
    caps: Mapping[ContextType, Optional[int]] = field(default_factory=dict)
    m: Optional[int] = None
    nr_order: NrOrder = NrOrder.NEIGHBORS_OF_REFERENCES
    offered: Optional[tuple[ContextType, ...]] = None


@dataclass(frozen=True)
class DetectionSession:
    target_line: str
    focus: DetectionFocus
    offered: tuple[ContextType, ...]
    delivered: tuple[ContextType, ...] = ()
    transcript: tuple[ChatMessage, ...] = ()
    iteration: int = 0
    failures: int = 0
    forced: bool = False
    state: SessionState = SessionState.AWAITING_MODEL
    verdict: Optional[Verdict] = None
    error: Optional[str] = None
    peak_tokens: int = 0


# ---------------------------------------------------------------------------
# prompt text

SYSTEM_PROMPT = (
    "You are a network engineer auditing router configurations for misconfigurations. "
    "Answer every turn with exactly one JSON object in the format the user specifies, "
    "with no other text."
)

REQUEST_FORMAT = '{"action": "request_context", "context_types": [<one or more of: %s>]}'
VERDICT_FORMAT = (
    '{"action": "verdict", "misconfigured": true or false, '
    '"errParameter": [<names of the faulty parameters>], "reason": "<short explanation>"}'
)

REMINDER = (
    "Your last reply did not follow the required format. Reply with exactly one JSON object: "
    + VERDICT_FORMAT
    + " or, if context types remain available, a request_context object."
)

FORCING = "You must now return a verdict. No further context is available. Reply with exactly one JSON object: " + VERDICT_FORMAT


def render_initial_prompt(
    target: Union[str, ConfigPath, TextExcerpt],
    focus: DetectionFocus,
    offered: Sequence[ContextType],
) -> list[ChatMessage]:
    offered = [t for t in CONTEXT_ORDER if t in set(offered)]
    parts = []
    if isinstance(target, TextExcerpt):
        parts.append(f"Configuration excerpt under review ({target.label}); it could not be parsed:")
        parts.append(target.text.rstrip("\n"))
    else:
        line = render_set_line(target) if isinstance(target, ConfigPath) else target
        parts.append("Configuration line under review:")
        parts.append(line)
    parts.append("")
    parts.append(f"Identify any {focus.prompt_name} misconfigurations in the configuration under review.")
    if offered:
        parts.append("")
        parts.append("Before deciding you may request context, in as many rounds as you need. Available context types:")
        for t in offered:
            parts.append(f"- {t.wire}: {CONTEXT_DESCRIPTIONS[t]}")
        parts.append("")
        parts.append("Reply with exactly one JSON object, either")
        parts.append(REQUEST_FORMAT % ", ".join(f'"{t.wire}"' for t in offered))
        parts.append("or")
        parts.append(VERDICT_FORMAT)
    else:
        parts.append("")
        parts.append("No additional context is available. Reply with exactly one JSON object:")
        parts.append(VERDICT_FORMAT)
    return [ChatMessage(Role.SYSTEM, SYSTEM_PROMPT), ChatMessage(Role.USER, "\n".join(parts))]


# ---------------------------------------------------------------------------
# reply parsing

_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL | re.IGNORECASE)


def _first_json_object(text: str) -> Optional[dict]:
    decoder = json.JSONDecoder()
    for chunk in [m.group(1) for m in _FENCE.finditer(text)] + [text]:
        for i, c in enumerate(chunk):
            if c != "{":
                continue
            try:
                obj, _ = decoder.raw_decode(chunk, i)
            except json.JSONDecodeError:
                continue
            if isinstance(obj, dict):
                return obj
    return None


def parse_model_action(text: str, session: DetectionSession) -> ModelAction:
    obj = _first_json_object(text or "")
    if obj is None:
        raise Unparseable(f"no JSON object in reply: {text[:80]!r}")
    action = str(obj.get("action", "")).strip().lower()

    if action in ("request_context", "request", "context"):
        names = obj.get("context_types")
        if isinstance(names, str):
            names = [names]
        if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
            raise InvalidAction("context_types must be a non-empty list of names")
        try:
            wanted = [ContextType.from_wire(n) for n in names]
        except ValueError as exc:
            raise InvalidAction(str(exc)) from None
        keep: list[ContextType] = []
        for t in wanted:
            if t in session.offered and t not in session.delivered and t not in keep:
                keep.append(t)
        if not keep:
            raise EmptyRequest(f"all requested types {names} were already delivered or are not offered")
        return RequestContext(tuple(keep))

    if action == "verdict":
        flag = obj.get("misconfigured")
        if not isinstance(flag, bool):
            raise InvalidAction("'misconfigured' must be true or false")
        params = obj.get("errParameter", obj.get("err_parameters", []))
        if params is None:
            params = []
        if isinstance(params, str):
            params = [params]
        if not isinstance(params, list):
            raise InvalidAction("'errParameter' must be a list of strings")
        reason = obj.get("reason", "")
        return FinalVerdict(flag, tuple(str(p) for p in params), reason if isinstance(reason, str) else json.dumps(reason))

    raise InvalidAction(f"unknown action {obj.get('action')!r}")


# ---------------------------------------------------------------------------
# context delivery

_HEADINGS = {
    ContextType.NEIGHBORING: "Neighboring configurations",
    ContextType.SIMILAR: "Similar configurations",
    ContextType.REFERENCEABLE: "Referenceable configurations",
    ContextType.NEIGHBORS_OF_REFERENCEABLE: "Neighbors of referenceable configurations",
    ContextType.INTRA_ROUTER: "Intra-router consistency",
}


def prevalence_sentence(matching: int, total: int) -> str:
    return (
        f"The exact same line is found in {matching} out of {total} other configuration files "
        "in the snapshot. A low share may indicate an uncommon or erroneous setting."
    )


def _render_delivery(types: Sequence[ContextType], bundle: ContextBundle, cap: Optional[int]) -> str:
    out = ["Requested context for the configuration line under review:"]
    for t in types:
        out.append("")
        out.append(f"### {t.wire}: {_HEADINGS[t]}")
        if t is ContextType.INTRA_ROUTER:
            if bundle.prevalence is None or bundle.prevalence[1] == 0:
                out.append("No other configuration files are loaded.")
            else:
                out.append(prevalence_sentence(*bundle.prevalence))
            continue
        lines = bundle.lines(t)
        total = bundle.totals.get(t, len(lines))
        if not lines:
            if bundle.gated and t in (ContextType.REFERENCEABLE, ContextType.NEIGHBORS_OF_REFERENCEABLE):
                out.append(
                    f"No entries: {bundle.target.value!r} is a pre-defined value for "
                    f"{bundle.target.parameter!r}, so nothing references it."
                )
            else:
                out.append("No entries.")
            continue
        shown = lines if cap is None else lines[:cap]
        out.extend(shown)
        if len(shown) < total:
            out.append(f"(truncated: showing {len(shown)} of {total} entries)")
    return "\n".join(out)


def deliver_context(
    session: DetectionSession,
    types: Sequence[ContextType],
    bundle: ContextBundle,
    budget: TokenBudget = TokenBudget(),
    reserve: int = 0,
    suffix: str = "",
) -> DetectionSession:
    """Append one user message carrying the requested context.

    Entry lists are cut tail-first to one shared per-type length so the
    whole transcript, plus ``reserve`` tokens of headroom, stays within
    ``budget``.
    """
    bad = [t for t in types if t not in session.offered or t in session.delivered]
    if bad:
        raise ValueError(f"cannot deliver {[t.wire for t in bad]}")
    used = TokenBudget.estimate(session.transcript) + reserve
    room = budget.max_prompt_tokens - used

    def fits(cap):
        text = _render_delivery(types, bundle, cap) + suffix
        return TokenBudget.estimate_text(text) <= room

    longest = max((len(bundle.entries.get(t, [])) for t in types), default=0)
    if fits(None):
        cap = None
    elif longest == 0 or not fits(1):
        raise BudgetExhausted(
            f"context for {[t.wire for t in types]} does not fit in {budget.max_prompt_tokens} tokens", session
        )
    else:
        lo, hi = 1, longest
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if fits(mid):
                lo = mid
            else:
                hi = mid - 1
        cap = lo
    message = ChatMessage(Role.USER, _render_delivery(types, bundle, cap) + suffix)
    return replace(
        session,
        transcript=session.transcript + (message,),
        delivered=session.delivered + tuple(types),
    )


# ---------------------------------------------------------------------------
# the state machine

ContextSource = Callable[[Sequence[ContextType]], ContextBundle]


def start_session(
    target: Union[ConfigPath, TextExcerpt],
    focus: DetectionFocus,
    offered: Sequence[ContextType],
) -> DetectionSession:
    offered = tuple(t for t in CONTEXT_ORDER if t in set(offered))
    line = target.text if isinstance(target, TextExcerpt) else render_set_line(target)
    return DetectionSession(
        target_line=line,
        focus=focus,
        offered=offered,
        transcript=tuple(render_initial_prompt(target, focus, offered)),
    )


def _reserve(options: DetectionOptions) -> int:
    # headroom for one forcing message and the remaining format reminders, plus short replies
    extra = len(FORCING) + options.retry_limit * len(REMINDER) + 2 * 512
    return TokenBudget.estimate_text("x" * extra)


def outgoing(session: DetectionSession, options: DetectionOptions) -> tuple[ChatMessage, ...]:
    """The messages for the next model call; enforces the token budget."""
    if session.state is not SessionState.AWAITING_MODEL:
        raise RuntimeError(f"session is {session.state.value}")
    estimate = TokenBudget.estimate(session.transcript)
    if estimate > options.budget.max_prompt_tokens:
        raise BudgetExhausted(
            f"request of ~{estimate} tokens exceeds budget {options.budget.max_prompt_tokens}", session
        )
    return session.transcript


def _fail(session: DetectionSession, kind: str) -> DetectionSession:
    return replace(session, state=SessionState.FAILED, error=kind)


def advance(
    session: DetectionSession,
    reply: str,
    context: ContextSource,
    options: DetectionOptions = DetectionOptions(),
) -> DetectionSession:
    """Consume one model reply and return the next session state."""
    if session.state is not SessionState.AWAITING_MODEL:
        raise RuntimeError(f"session is {session.state.value}")
    s = replace(
        session,
        transcript=session.transcript + (ChatMessage(Role.ASSISTANT, reply or "(empty reply)"),),
        iteration=session.iteration + 1,
        peak_tokens=max(session.peak_tokens, TokenBudget.estimate(session.transcript)),
    )
    # after max_iterations replies without a verdict, one forcing call remains
    last_call = s.iteration >= options.max_iterations

    try:
        action = parse_model_action(reply, s)
    except ActionError as exc:
        if s.forced:
            return _fail(s, Undecided.kind)
        if s.failures >= options.retry_limit:
            return _fail(s, exc.kind)
        nudge = FORCING if last_call else REMINDER
        return replace(
            s,
            failures=s.failures + 1,
            forced=last_call,
            transcript=s.transcript + (ChatMessage(Role.USER, nudge),),
        )

    if isinstance(action, FinalVerdict):
        verdict = Verdict(
            misconfigured=action.misconfigured,
            err_parameters=action.err_parameters,
            reason=action.reason,
            focus=s.focus,
            requested_contexts=s.delivered,
            iterations=s.iteration,
            token_estimate=s.peak_tokens,
        )
        return replace(s, state=SessionState.DONE, verdict=verdict, failures=0)

    if s.forced:
        return _fail(s, Undecided.kind)
    s = replace(s, state=SessionState.DELIVERING, failures=0)
    try:
        s = deliver_context(
            s,
            action.types,
            context(action.types),
            options.budget,
            reserve=_reserve(options),
            suffix="\n\n" + FORCING if last_call else "",
        )
    except BudgetExhausted:
        return _fail(s, BudgetExhausted.kind)
    return replace(s, state=SessionState.AWAITING_MODEL, forced=last_call)


_ERRORS = {cls.kind: cls for cls in (Unparseable, InvalidAction, EmptyRequest, Undecided, BudgetExhausted)}


def drive(
    provider: ChatProvider,
    session: DetectionSession,
    context: ContextSource,
    options: DetectionOptions = DetectionOptions(),
) -> Verdict:
    """Run the model/session loop until a verdict, raising on failure."""
    while session.state is SessionState.AWAITING_MODEL:
        messages = outgoing(session, options)
        try:
            reply = provider.complete(messages)
        except ProviderError as exc:
            raise ProviderFailure(f"{type(exc).__name__}: {exc}", _fail(session, ProviderFailure.kind)) from exc
        session = advance(session, reply, context, options)
    if session.state is SessionState.DONE:
        return session.verdict
    cls = _ERRORS.get(session.error, ProtocolError)
    raise cls(f"detection failed: {session.error} after {session.iteration} model calls", session)


def default_offer(snapshot_size: int) -> tuple[ContextType, ...]:
    base = (
        ContextType.NEIGHBORING,
        ContextType.SIMILAR,
        ContextType.REFERENCEABLE,
        ContextType.NEIGHBORS_OF_REFERENCEABLE,
    )
    return base + ((ContextType.INTRA_ROUTER,) if snapshot_size > 1 else ())


def _as_list(trees) -> list[ConfigTree]:
    return [trees] if isinstance(trees, ConfigTree) else list(trees)


def context_source(
    tree: ConfigTree,
    path: ConfigPath,
    snapshot: Sequence[ConfigTree],
    options: DetectionOptions,
    table: Optional[ClassificationTable] = None,
) -> ContextSource:
    table = table if table is not None else build_classification_table(tree)

    def mine(types):
        return assemble_bundle(
            tree,
            path,
            types,
            caps={t: options.caps.get(t, DEFAULT_CAP) for t in types},
            table=table,
            snapshot=snapshot,
            m=options.m,
            nr_order=options.nr_order,
        )

    return mine


def run_detection(
    provider: ChatProvider,
    trees: Union[ConfigTree, Sequence[ConfigTree]],
    target: Union[ConfigPath, TextExcerpt],
    focus: DetectionFocus = GENERAL,
    options: DetectionOptions = DetectionOptions(),
    origin: Optional[str] = None,
    table: Optional[ClassificationTable] = None,
) -> Verdict:
    """Review one line (or unparseable excerpt) with the model.

    ``trees`` is the snapshot; the line belongs to the tree whose
    ``source_id`` is ``origin`` (default: the first tree).
    """
    if isinstance(target, TextExcerpt):
        session = start_session(target, focus, ())
        return drive(provider, session, lambda types: None, options)

    snapshot = _as_list(trees)
    if not snapshot:
        raise ValueError("no configuration trees given")
    origin = origin or snapshot[0].source_id
    tree = next((t for t in snapshot if t.source_id == origin), None)
    if tree is None:
        raise ValueError(f"origin {origin!r} is not in the snapshot")
    offered = options.offered if options.offered is not None else default_offer(len(snapshot))
    session = start_session(target, focus, offered)
    return drive(provider, session, context_source(tree, target, snapshot, options, table), options)


# ---------------------------------------------------------------------------
# whole-file scans


@dataclass(frozen=True)
class ScanResult:
    source_id: str
    path_id: int
    set_line: str
    focus: DetectionFocus
    verdict: Optional[Verdict] = None
    error: Optional[str] = None

    @property
    def misconfigured(self) -> bool:
        return self.verdict is not None and self.verdict.misconfigured

    def to_dict(self) -> dict:
        v = self.verdict
        out = {
            "source": self.source_id,
            "path_id": self.path_id,
            "set_line": self.set_line,
            "focus": self.focus.prompt_name,
            "misconfigured": v.misconfigured if v else None,
            "errParameter": list(v.err_parameters) if v else [],
            "reason": v.reason if v else "",
            "requested_contexts": [t.wire for t in v.requested_contexts] if v else [],
            "iterations": v.iterations if v else None,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def scan(
    provider: ChatProvider,
    trees: Union[ConfigTree, Sequence[ConfigTree]],
    focus: DetectionFocus = GENERAL,
    selector_filter: Optional[Callable[[ConfigTree, ConfigPath], bool]] = None,
    options: DetectionOptions = DetectionOptions(),
    max_in_flight: int = 4,
) -> list[ScanResult]:
    """Review every path (or the filtered subset) of every tree.

    Failures are recorded per path.  Results come back ordered by
    ``(source_id, path_id)`` whatever order sessions finish in.
    """
    snapshot = _as_list(trees)
    tables = {t.source_id: build_classification_table(t) for t in snapshot}
    jobs = [
        (tree, path)
        for tree in snapshot
        for path in tree.paths
        if selector_filter is None or selector_filter(tree, path)
    ]

    def one(job) -> ScanResult:
        tree, path = job
        base = dict(source_id=tree.source_id, path_id=path.path_id, set_line=render_set_line(path), focus=focus)
        try:
            verdict = run_detection(provider, snapshot, path, focus, options, tree.source_id, tables[tree.source_id])
        except ProtocolError as exc:
            logger.info("%s #%d: %s", tree.source_id, path.path_id, exc)
            return ScanResult(error=f"{exc.kind}: {exc}", **base)
        return ScanResult(verdict=verdict, **base)

    workers = max_in_flight if provider.concurrent else 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]
    return sorted(results, key=lambda r: (r.source_id, r.path_id))


def summary_table(results: Sequence[ScanResult]) -> str:
    rows = [("source", "id", "verdict", "errParameter", "line")]
    for r in results:
        if r.error:
            status = "error"
        else:
            status = "MISCONFIG" if r.misconfigured else "ok"
        params = ",".join(r.verdict.err_parameters) if r.verdict else r.error.split(":")[0]
        rows.append((r.source_id, str(r.path_id), status, params, r.set_line))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row[:4], widths)) + "  " + row[4] for row in rows]
    flagged = sum(r.misconfigured for r in results)
    failed = sum(r.error is not None for r in results)
    lines.append(f"{len(results)} lines reviewed, {flagged} flagged, {failed} failed")
    return "\n".join(lines)
