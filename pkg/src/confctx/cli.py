"""Command-line front end.

Machine-readable output goes to stdout, diagnostics to stderr.  Exit codes:
0 success / clean, 1 misconfiguration found, 2 parse or usage error,
3 detection protocol failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .classify import build_classification_table, build_pooled_table
from .mining import DEFAULT_CAP, ContextType, InvalidDepth, NrOrder, assemble_bundle
from .mutation import (
    MutationKind,
    always_clean_script,
    build_case,
    default_cases,
    evaluate,
    fixture_text,
    llm_detector,
    omniscient_script,
    write_truth,
)
from .prompting import (
    DetectionFocus,
    DetectionOptions,
    ProtocolError,
    TokenBudget,
    run_detection,
    scan,
    summary_table,
)
from .providers import (
    DEFAULT_API_KEY_ENV,
    ChatProvider,
    HttpProvider,
    MalformedScript,
    ProviderConfig,
    ProviderKind,
    load_script,
    script_from_dict,
)
from .tree import (
    ROOT_LABEL,
    AmbiguousPath,
    ConfigNode,
    ConfigParseError,
    ConfigTree,
    EmptyInput,
    PathNotFound,
    PathSelector,
    parse_file,
    resolve_selector,
    serialize,
)

EXIT_OK, EXIT_FOUND, EXIT_PARSE, EXIT_PROTOCOL = 0, 1, 2, 3
DEFAULT_MODEL = "gpt-4o-2024-05-13"

log = logging.getLogger("confctx")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_PARSE):
        super().__init__(message)
        self.code = code


def _load(path: str, fmt: str, allow_empty: bool = False) -> ConfigTree:
    try:
        return parse_file(path, fmt)
    except EmptyInput:
        if allow_empty:
            return ConfigTree(ConfigNode.section(ROOT_LABEL), path)
        raise CliError(f"{path}: EmptyInput: no configuration statements")
    except ConfigParseError as exc:
        where = f"{path}:{exc.line}" if exc.line is not None else path
        raise CliError(f"{where}: {exc.kind}: {exc.message}") from None
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None


def _select(tree: ConfigTree, args) -> "ConfigPath":
    if args.line is None and args.path_id is None:
        raise CliError("give --line or --path-id")
    sel = PathSelector(set_line=args.line) if args.line is not None else PathSelector(path_id=args.path_id)
    try:
        return resolve_selector(tree, sel)
    except (PathNotFound, AmbiguousPath) as exc:
        raise CliError(str(exc)) from None


def _context_types(text: str) -> list[ContextType]:
    try:
        return [ContextType.from_wire(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _options(args) -> DetectionOptions:
    caps = {t: args.context_cap for t in ContextType}
    return DetectionOptions(
        max_iterations=args.max_iterations,
        retry_limit=args.retry_limit,
        budget=TokenBudget(args.token_budget),
        caps=caps,
        nr_order=NrOrder(args.nr_order),
    )


def _provider(args) -> ChatProvider:
    if args.script:
        try:
            return load_script(args.script)
        except MalformedScript as exc:
            raise CliError(str(exc)) from None
    if args.endpoint:
        config = ProviderConfig(
            ProviderKind.HTTP,
            endpoint_url=args.endpoint,
            model_name=args.model,
            temperature=args.temperature,
            timeout=args.timeout,
            api_key_env=args.api_key_env,
            max_in_flight=args.max_in_flight,
        )
        return HttpProvider(config)
    raise CliError("a provider is required: --script FILE or --endpoint URL")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> int:
    chunks = []
    for path in args.files:
        tree = _load(path, args.format)
        emit = {"json": "json", "set-lines": "set-lines", "braces": "braces"}[args.emit]
        chunks.append(serialize(tree, emit))
    _emit("".join(chunks), args.out)
    return EXIT_OK


def cmd_mine(args) -> int:
    tree = _load(args.file, args.format)
    snapshot = [tree] + [_load(p, args.format) for p in args.snapshot]
    path = _select(tree, args)
    types = _context_types(args.context)
    table = build_pooled_table(snapshot) if args.pool else build_classification_table(tree)
    caps = {t: (None if args.cap == 0 else args.cap) for t in ContextType}
    try:
        bundle = assemble_bundle(
            tree, path, types, caps=caps, table=table, snapshot=snapshot, m=args.m, nr_order=NrOrder(args.nr_order)
        )
    except (InvalidDepth, ValueError) as exc:
        raise CliError(str(exc)) from None
    _emit(json.dumps(bundle.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    trees = [_load(p, args.format, allow_empty=True) for p in args.files]
    if args.pool or len(trees) == 1:
        table = build_pooled_table(trees)
        _emit(table.to_json(args.evidence) + "\n", args.out)
    else:
        out = {t.source_id: json.loads(build_classification_table(t).to_json(args.evidence)) for t in trees}
        _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    tree = _load(args.file, args.format)
    snapshot = [tree] + [_load(p, args.format) for p in args.snapshot]
    path = _select(tree, args)
    provider = _provider(args)
    focus = DetectionFocus.parse(args.focus)
    try:
        verdict = run_detection(provider, snapshot, path, focus, _options(args), origin=tree.source_id)
    except ProtocolError as exc:
        print(f"{args.file}: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    out = {
        "source": tree.source_id,
        "path_id": path.path_id,
        "set_line": path.set_line(),
        "focus": focus.prompt_name,
        "misconfigured": verdict.misconfigured,
        "errParameter": list(verdict.err_parameters),
        "reason": verdict.reason,
        "requested_contexts": [t.wire for t in verdict.requested_contexts],
        "iterations": verdict.iterations,
    }
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_FOUND if verdict.misconfigured else EXIT_OK


def cmd_scan(args) -> int:
    trees = [_load(p, args.format) for p in args.files]
    provider = _provider(args)
    focus = DetectionFocus.parse(args.focus)
    results = scan(provider, trees, focus, options=_options(args), max_in_flight=args.max_in_flight)
    if args.pretty:
        _emit(summary_table(results) + "\n", args.out)
    else:
        _emit("".join(json.dumps(r.to_dict()) + "\n" for r in results), args.out)
    failed = sum(r.error is not None for r in results)
    if failed:
        print(f"{failed} of {len(results)} lines failed; see the error field", file=sys.stderr)
    return EXIT_FOUND if any(r.misconfigured for r in results) else EXIT_OK


def cmd_inject(args) -> int:
    src = Path(args.file)
    text = src.read_text(encoding="utf-8")
    kind = MutationKind(args.kind)
    sel = None
    if args.line is not None:
        sel = PathSelector(set_line=args.line)
    elif args.path_id is not None:
        sel = PathSelector(path_id=args.path_id)
    try:
        case = build_case(text, kind, sel, args.seed, source_id=src.name)
    except ConfigParseError as exc:
        raise CliError(f"{src}:{exc.line}: {exc.kind}: {exc.message}") from None
    except (LookupError, ValueError) as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out) if args.out else Path(f"{src.stem}.{kind.value}{src.suffix or '.conf'}")
    out.write_text(case.mutated_text, encoding="utf-8")
    truth = out.with_name(out.stem + ".truth.json")
    write_truth(truth, case.record)
    print(json.dumps({"mutated": str(out), "truth": str(truth)}))
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.files:
        cases = []
        for path in args.files:
            text = Path(path).read_text(encoding="utf-8")
            for kind in MutationKind:
                try:
                    cases.append(build_case(text, kind, seed=args.seed, source_id=Path(path).name))
                except LookupError as exc:
                    print(f"{path}: skipping {kind.value}: {exc}", file=sys.stderr)
    else:
        cases = default_cases(seed=args.seed)

    if args.oracle == "omniscient":
        provider = script_from_dict(omniscient_script(cases))
    elif args.oracle == "always-clean":
        provider = script_from_dict(always_clean_script())
    else:
        provider = _provider(args)
    report = evaluate(llm_detector(provider, _options(args)), cases)

    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    (out_dir / "report.md").write_text(report.to_markdown(), encoding="utf-8")
    sys.stdout.write(report.to_markdown())
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_format(p):
    p.add_argument("--format", choices=["auto", "juniper", "json"], default="auto",
                   help="input format; auto picks json for .json files")


def _add_selector(p):
    p.add_argument("--line", help="the line as rendered by `parse --emit set-lines`")
    p.add_argument("--path-id", type=int, help="path id (document order, from 0)")


def _add_provider(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--script", help="scripted provider JSON file (offline)")
    g.add_argument("--endpoint", help="OpenAI-compatible base URL, e.g. http://localhost:8000/v1")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--api-key-env", default=DEFAULT_API_KEY_ENV,
                   help="name of the environment variable holding the API key")


def _add_protocol(p, focus_default="GENERAL"):
    p.add_argument("--focus", default=focus_default,
                   help="SYNTAX, RANGE, DEPENDENCY/CONFLICT, GENERAL or any custom phrase")
    p.add_argument("--max-iterations", type=int, default=5)
    p.add_argument("--retry-limit", type=int, default=2)
    p.add_argument("--token-budget", type=int, default=120_000)
    p.add_argument("--context-cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--max-in-flight", type=int, default=4)
    p.add_argument("--nr-order", choices=[o.value for o in NrOrder], default=NrOrder.NEIGHBORS_OF_REFERENCES.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confctx", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse configs and print them as JSON, set-lines or braces")
    p.add_argument("files", nargs="+")
    _add_format(p)
    p.add_argument("--emit", choices=["json", "set-lines", "braces"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("mine", help="mine context for one line")
    p.add_argument("file")
    _add_format(p)
    _add_selector(p)
    p.add_argument("--context", default="N,S,R,NR", help="comma-separated: N,S,R,NR,IRC")
    p.add_argument("--m", type=int, help="shared-prefix length for neighbours (default: parent block)")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max entries per type, 0 for no cap")
    p.add_argument("--snapshot", nargs="*", default=[], help="other files of the same network")
    p.add_argument("--pool", action="store_true", help="classify values over the whole snapshot")
    p.add_argument("--nr-order", choices=[o.value for o in NrOrder], default=NrOrder.NEIGHBORS_OF_REFERENCES.value)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("classify", help="pre-defined / user-defined table per parameter")
    p.add_argument("files", nargs="+")
    _add_format(p)
    p.add_argument("--pool", action="store_true", help="vote over all files together")
    p.add_argument("--evidence", action="store_true", help="include per-value existence flags")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("check", help="review one line with the model")
    p.add_argument("file")
    _add_format(p)
    _add_selector(p)
    _add_provider(p)
    _add_protocol(p)
    p.add_argument("--snapshot", nargs="*", default=[])
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="review every line of one or more files (JSONL report)")
    p.add_argument("files", nargs="+")
    _add_format(p)
    _add_provider(p)
    _add_protocol(p)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--jsonl", action="store_true", default=True)
    fmt.add_argument("--pretty", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("inject", help="write a mutated copy of a config plus its .truth.json")
    p.add_argument("file")
    p.add_argument("--kind", required=True, choices=[k.value for k in MutationKind])
    _add_selector(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("eval", help="inject every kind, run the detector, score it")
    p.add_argument("files", nargs="*", help="clean configs (default: bundled fixture)")
    _add_provider(p)
    _add_protocol(p)
    p.add_argument("--oracle", choices=["omniscient", "always-clean"],
                   help="use a built-in scripted detector instead of a provider")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for report.json and report.md")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
