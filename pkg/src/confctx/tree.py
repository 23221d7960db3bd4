"""Hierarchical configuration trees.

A configuration file is modelled as a rooted tree: section nodes open a
block (``interfaces { ... }``) and parameter nodes are leaves carrying a
value (``mtu 1500;``).  Every root-to-leaf walk is a :class:`ConfigPath`,
the unit that the miners and the detector reason about.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

ROOT_LABEL = "<root>"
FLAG_VALUE = "true"


class ConfigParseError(ValueError):
    """Base class for all parse failures.  ``line`` is 1-based when known."""

    kind = "ParseError"

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{self.kind}: {where}{message}")


class UnbalancedBraces(ConfigParseError):
    kind = "UnbalancedBraces"


class EmptyInput(ConfigParseError):
    kind = "EmptyInput"


class StatementOutsideRoot(ConfigParseError):
    """Tokens that do not form a statement inside any block.

    Raised for stray ``;`` and for tokens left dangling before ``}`` or EOF.
    """

    kind = "StatementOutsideRoot"


class MalformedJson(ConfigParseError):
    kind = "MalformedJson"

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        super().__init__(message if position is None else f"{message} (at char {position})")


class NonScalarLeaf(ConfigParseError):
    kind = "NonScalarLeaf"


class PathNotFound(LookupError):
    pass


class AmbiguousPath(LookupError):
    def __init__(self, selector: str, count: int):
        self.count = count
        super().__init__(f"{count} paths render as {selector!r}; select by path_id instead")


class NodeKind(enum.Enum):
    SECTION = "Section"
    PARAMETER = "Parameter"


@dataclass(frozen=True)
class ConfigNode:
    label: str
    kind: NodeKind
    value: Optional[str] = None
    children: tuple["ConfigNode", ...] = ()
    # provenance only; two nodes parsed from different layouts still compare equal
    source_span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)
    char_span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)
    value_span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.label or "\n" in self.label:
            raise ValueError(f"invalid node label {self.label!r}")
        if self.kind is NodeKind.PARAMETER:
            if self.children:
                raise ValueError("parameter nodes cannot have children")
            if self.value is None:
                raise ValueError(f"parameter {self.label!r} has no value")
        elif self.value is not None:
            raise ValueError("section nodes carry no value")

    @property
    def is_section(self) -> bool:
        return self.kind is NodeKind.SECTION

    @classmethod
    def section(cls, label: str, children: Iterable["ConfigNode"] = (), **kw) -> "ConfigNode":
        return cls(label, NodeKind.SECTION, None, tuple(children), **kw)

    @classmethod
    def parameter(cls, label: str, value: str, **kw) -> "ConfigNode":
        return cls(label, NodeKind.PARAMETER, value, (), **kw)


@dataclass(frozen=True)
class ConfigPath:
    """A complete root-to-parameter path: ``labels[0]`` is the root, ``labels[-1]`` the parameter."""

    labels: tuple[str, ...]
    value: str
    path_id: int

    @property
    def depth(self) -> int:
        return len(self.labels)

    @property
    def category(self) -> str:
        return self.labels[1]

    @property
    def parameter(self) -> str:
        return self.labels[-1]

    @property
    def statement(self) -> tuple[tuple[str, ...], str]:
        """Labels below the root plus the value; identity of a line across files."""
        return self.labels[1:], self.value

    def set_line(self) -> str:
        return render_set_line(self)


@dataclass(frozen=True)
class PathSelector:
    set_line: Optional[str] = None
    path_id: Optional[int] = None

    def __post_init__(self):
        if (self.set_line is None) == (self.path_id is None):
            raise ValueError("exactly one of set_line or path_id must be given")


def label_matches(label: str, value: str) -> bool:
    """Reference match: whole-label equality or equality with one of its tokens."""
    if not value:
        return False
    return label == value or value in label.split()


class ConfigTree:
    """Immutable configuration tree with lookup indexes built at construction."""

    def __init__(self, root: ConfigNode, source_id: str = "<memory>"):
        if root.label != ROOT_LABEL or not root.is_section:
            raise ValueError("tree root must be a section labelled <root>")
        self.root = root
        self.source_id = source_id
        self._build_indexes()

    def _build_indexes(self) -> None:
        paths: list[ConfigPath] = []
        # each intermediate node: (label, first path id, end path id); paths below a node are contiguous
        sections: list[tuple[str, int, int]] = []
        by_label: dict[str, list[int]] = {}

        def walk(node: ConfigNode, prefix: tuple[str, ...]) -> None:
            for child in node.children:
                labels = prefix + (child.label,)
                if child.is_section:
                    pos = len(sections)
                    sections.append((child.label, -1, -1))
                    start = len(paths)
                    walk(child, labels)
                    sections[pos] = (child.label, start, len(paths))
                    by_label.setdefault(child.label, []).append(pos)
                else:
                    paths.append(ConfigPath(labels, child.value, len(paths)))

        walk(self.root, (ROOT_LABEL,))
        self.paths: tuple[ConfigPath, ...] = tuple(paths)
        self._sections = tuple(sections)
        self._by_label = {k: tuple(sorted(v)) for k, v in by_label.items()}

        by_token: dict[str, set[int]] = {}
        for pos, (label, _, _) in enumerate(sections):
            for tok in set(label.split()) | {label}:
                by_token.setdefault(tok, set()).add(pos)
        self._by_token = {k: tuple(sorted(v)) for k, v in by_token.items()}

        by_prefix: dict[tuple[str, ...], list[int]] = {}
        by_cat_param: dict[tuple[str, str], list[int]] = {}
        statements: dict[tuple[tuple[str, ...], str], list[int]] = {}
        for p in paths:
            for j in range(1, p.depth + 1):
                by_prefix.setdefault(p.labels[:j], []).append(p.path_id)
            by_cat_param.setdefault((p.category, p.parameter), []).append(p.path_id)
            statements.setdefault(p.statement, []).append(p.path_id)
        self._by_prefix = {k: tuple(v) for k, v in by_prefix.items()}
        self._by_cat_param = {k: tuple(v) for k, v in by_cat_param.items()}
        self._statements = {k: tuple(v) for k, v in statements.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfigTree):
            return NotImplemented
        return self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def __len__(self) -> int:
        return len(self.paths)

    def __repr__(self) -> str:
        return f"ConfigTree({self.source_id!r}, {len(self.paths)} paths)"

    # index lookups used by the miners

    def paths_with_prefix(self, prefix: tuple[str, ...]) -> tuple[int, ...]:
        return self._by_prefix.get(tuple(prefix), ())

    def paths_with_category_parameter(self, category: str, parameter: str) -> tuple[int, ...]:
        return self._by_cat_param.get((category, parameter), ())

    def paths_with_statement(self, labels: tuple[str, ...], value: str) -> tuple[int, ...]:
        return self._statements.get((tuple(labels), value), ())

    def has_statement(self, labels: tuple[str, ...], value: str) -> bool:
        return (tuple(labels), value) in self._statements

    def sections_labelled(self, label: str) -> tuple[int, ...]:
        return self._by_label.get(label, ())

    def sections_matching(self, value: str) -> tuple[int, ...]:
        """Intermediate nodes whose label matches ``value`` under :func:`label_matches`."""
        if not value:
            return ()
        if value in self._by_token:
            return self._by_token[value]
        return ()

    def paths_under_section(self, pos: int) -> range:
        _, start, end = self._sections[pos]
        return range(start, end)

    def node_chain(self, path_id: int) -> list[ConfigNode]:
        """Nodes from the root down to the parameter of path ``path_id``."""
        if not 0 <= path_id < len(self.paths):
            raise PathNotFound(f"no path with id {path_id} in {self.source_id}")
        seen = 0
        chain = [self.root]
        node = self.root
        while True:
            for child in node.children:
                width = _leaf_count(child)
                if seen + width > path_id:
                    chain.append(child)
                    node = child
                    break
                seen += width
            if not node.is_section:
                return chain

    def index_snapshot(self) -> dict:
        """All derived indexes as plain data, for consistency checks."""
        return {
            "paths": self.paths,
            "sections": self._sections,
            "by_label": self._by_label,
            "by_token": self._by_token,
            "by_prefix": self._by_prefix,
            "by_cat_param": self._by_cat_param,
            "statements": self._statements,
        }


def _leaf_count(node: ConfigNode) -> int:
    if not node.is_section:
        return 1
    return sum(_leaf_count(c) for c in node.children)


# ---------------------------------------------------------------------------
# brace-format parsing

_SPECIAL = set("{};[]")


@dataclass
class _Token:
    text: str
    kind: str  # "word", "{", "}", ";", "[", "]"
    line: int
    start: int
    end: int


def _tokenize(text: str) -> Iterator[_Token]:
    i, n, line = 0, len(text), 1
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c.isspace():
            i += 1
        elif c == "#":
            j = text.find("\n", i)
            i = n if j < 0 else j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ConfigParseError("unterminated comment", line)
            line += text.count("\n", i, j)
            i = j + 2
        elif c in _SPECIAL:
            yield _Token(c, c, line, i, i + 1)
            i += 1
        elif c == '"':
            j, buf = i + 1, []
            start_line = line
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                if text[j] == "\n":
                    line += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ConfigParseError("unterminated quoted string", start_line)
            yield _Token("".join(buf), "word", start_line, i, j + 1)
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _SPECIAL and text[j] != '"':
                j += 1
            yield _Token(text[i:j], "word", line, i, j)
            i = j


class _Frame:
    def __init__(self, label: str, line: int, start: int):
        self.label = label
        self.line = line
        self.start = start
        self.children: list[ConfigNode] = []


def parse_juniper(text: str, source_id: str = "<memory>") -> ConfigTree:
    """Parse brace-structured (Junos-style) configuration text.

    ``a b c;`` becomes parameter ``a b`` with value ``c``; a single-token
    statement is a flag with value ``"true"``; ``a [ x y ];`` expands to
    sibling parameters ``a = x`` and ``a = y``.
    """
    tokens = list(_tokenize(text))
    if not tokens:
        raise EmptyInput("no configuration statements")

    stack = [_Frame(ROOT_LABEL, 1, 0)]
    pending: list[_Token] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind == "word":
            pending.append(tok)
        elif tok.kind == "{":
            if not pending:
                raise StatementOutsideRoot("block opened without a name", tok.line)
            stack.append(_Frame(" ".join(t.text for t in pending), pending[0].line, pending[0].start))
            pending = []
        elif tok.kind == "}":
            if pending:
                raise StatementOutsideRoot(
                    f"statement {' '.join(t.text for t in pending)!r} missing ';'", pending[0].line
                )
            if len(stack) == 1:
                raise UnbalancedBraces("unexpected '}'", tok.line)
            frame = stack.pop()
            stack[-1].children.append(
                ConfigNode.section(
                    frame.label,
                    frame.children,
                    source_span=(frame.line, tok.line),
                    char_span=(frame.start, tok.end),
                )
            )
        elif tok.kind == ";":
            if not pending:
                raise StatementOutsideRoot("empty statement", tok.line)
            stack[-1].children.append(_statement(pending, tok))
            pending = []
        elif tok.kind == "[":
            if not pending:
                raise StatementOutsideRoot("list without a parameter name", tok.line)
            j = i + 1
            items = []
            while j < len(tokens) and tokens[j].kind == "word":
                items.append(tokens[j])
                j += 1
            if j + 1 >= len(tokens) or tokens[j].kind != "]" or tokens[j + 1].kind != ";" or not items:
                raise ConfigParseError("malformed value list", tok.line)
            end = tokens[j + 1]
            label = " ".join(t.text for t in pending)
            for item in items:
                stack[-1].children.append(
                    ConfigNode.parameter(
                        label,
                        item.text,
                        source_span=(pending[0].line, end.line),
                        char_span=(pending[0].start, end.end),
                        value_span=(item.start, item.end),
                    )
                )
            pending = []
            i = j + 1
        else:
            raise ConfigParseError(f"unexpected {tok.text!r}", tok.line)
        i += 1

    if pending:
        raise StatementOutsideRoot(
            f"statement {' '.join(t.text for t in pending)!r} missing ';'", pending[0].line
        )
    if len(stack) > 1:
        raise UnbalancedBraces(f"block {stack[-1].label!r} is never closed", stack[-1].line)
    return ConfigTree(ConfigNode.section(ROOT_LABEL, stack[0].children), source_id)


def _statement(words: list[_Token], end: _Token) -> ConfigNode:
    span = dict(source_span=(words[0].line, end.line), char_span=(words[0].start, end.end))
    if len(words) == 1:
        return ConfigNode.parameter(words[0].text, FLAG_VALUE, **span)
    last = words[-1]
    return ConfigNode.parameter(
        " ".join(t.text for t in words[:-1]), last.text, value_span=(last.start, last.end), **span
    )


# ---------------------------------------------------------------------------
# JSON-format parsing


class _Pairs(list):
    """Key/value pairs of one JSON object, order and duplicates preserved."""


def parse_json_tree(text: str, source_id: str = "<memory>") -> ConfigTree:
    """Parse the nested key/value JSON rendering of a configuration.

    Objects are sections, scalars are parameters, and arrays of scalars
    expand to sibling parameters sharing the key.  ``null`` is a flag.
    Duplicate keys are kept in order.
    """
    try:
        data = json.loads(text, object_pairs_hook=_Pairs)
    except json.JSONDecodeError as exc:
        raise MalformedJson(exc.msg, exc.pos) from None
    if not isinstance(data, _Pairs):
        raise MalformedJson("top level must be an object")
    return ConfigTree(ConfigNode.section(ROOT_LABEL, _json_children(data, ())), source_id)


def _scalar(value, where: tuple[str, ...]) -> str:
    if value is None:
        return FLAG_VALUE
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return json.dumps(value)
    if isinstance(value, str):
        return value
    raise NonScalarLeaf(f"non-scalar value under {' / '.join(where)}")


def _json_children(pairs: _Pairs, where: tuple[str, ...]) -> list[ConfigNode]:
    out = []
    for key, value in pairs:
        if not key or "\n" in key:
            raise MalformedJson(f"invalid key {key!r} under " + (" / ".join(where) or "root"))
        here = where + (key,)
        if isinstance(value, _Pairs):
            out.append(ConfigNode.section(key, _json_children(value, here)))
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, list):
                    raise NonScalarLeaf(f"array of objects or arrays under {' / '.join(here)}")
                out.append(ConfigNode.parameter(key, _scalar(item, here)))
        else:
            out.append(ConfigNode.parameter(key, _scalar(value, here)))
    return out


def parse_file(path, fmt: Optional[str] = None) -> ConfigTree:
    """Parse a file, choosing the format from its extension unless ``fmt`` is given."""
    from pathlib import Path

    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if fmt is None or fmt == "auto":
        fmt = "json" if p.suffix.lower() == ".json" else "juniper"
    if fmt == "json":
        return parse_json_tree(text, str(path))
    if fmt == "juniper":
        return parse_juniper(text, str(path))
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# paths, selectors, rendering


def enumerate_paths(tree: ConfigTree) -> list[ConfigPath]:
    return list(tree.paths)


def render_set_line(path: ConfigPath) -> str:
    return " ".join(("set",) + path.labels[1:] + (path.value,))


def resolve_selector(tree: ConfigTree, sel: PathSelector) -> ConfigPath:
    if sel.path_id is not None:
        if 0 <= sel.path_id < len(tree.paths):
            return tree.paths[sel.path_id]
        raise PathNotFound(f"no path with id {sel.path_id} in {tree.source_id}")
    wanted = sel.set_line.strip()
    hits = [p for p in tree.paths if render_set_line(p) == wanted]
    if not hits:
        raise PathNotFound(f"no path renders as {wanted!r} in {tree.source_id}")
    if len(hits) > 1:
        raise AmbiguousPath(wanted, len(hits))
    return hits[0]


_NEEDS_QUOTE = re.compile(r'[\s{};\[\]"#\\]|^/\*')


def quote_token(tok: str) -> str:
    if tok and not _NEEDS_QUOTE.search(tok):
        return tok
    return '"' + tok.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label_tokens(label: str) -> str:
    return " ".join(quote_token(t) for t in label.split())


def serialize(tree: ConfigTree, fmt: str = "braces") -> str:
    """Render a tree as ``braces``, ``json`` or ``set-lines`` text."""
    fmt = fmt.lower().replace("_", "-")
    if fmt == "braces":
        lines: list[str] = []
        _braces(tree.root.children, 0, lines)
        return "".join(line + "\n" for line in lines)
    if fmt == "json":
        return _json_object(tree.root.children, 0) + "\n"
    if fmt in ("set-lines", "setlines"):
        return "".join(render_set_line(p) + "\n" for p in tree.paths)
    raise ValueError(f"unknown serialization format {fmt!r}")


def _braces(nodes: tuple[ConfigNode, ...], depth: int, out: list[str]) -> None:
    pad = "    " * depth
    for node in nodes:
        if node.is_section:
            out.append(f"{pad}{_label_tokens(node.label)} {{")
            _braces(node.children, depth + 1, out)
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}{_label_tokens(node.label)} {quote_token(node.value)};")


def _json_object(nodes: tuple[ConfigNode, ...], depth: int) -> str:
    if not nodes:
        return "{}"
    pad = "  " * (depth + 1)
    items = []
    i = 0
    while i < len(nodes):
        node = nodes[i]
        key = json.dumps(node.label, ensure_ascii=False)
        if node.is_section:
            items.append(f"{pad}{key}: {_json_object(node.children, depth + 1)}")
            i += 1
            continue
        # consecutive same-label parameters collapse into one array
        j = i
        while j < len(nodes) and not nodes[j].is_section and nodes[j].label == node.label:
            j += 1
        values = [json.dumps(n.value, ensure_ascii=False) for n in nodes[i:j]]
        rendered = values[0] if len(values) == 1 else "[" + ", ".join(values) + "]"
        items.append(f"{pad}{key}: {rendered}")
        i = j
    return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
