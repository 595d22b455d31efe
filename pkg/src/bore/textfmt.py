"""Text formats: the process-model DSL (.asis/.tobe), annotations (.annot), packages.

The model grammar is statement based. A statement starts with a keyword and
statements are usually written one per line; newlines are not significant, so
``process "P" { role r task t1 "Do" role=r }`` on one line is also accepted.

    process "Journal" kind=asis
    role EiC "Editor-in-chief"
    task t1 "Submit the paper" role=Author
    gateway g_final "Final decision" role=EiC
    flow g_final -> t15 [accept]
    start start
    end end_rejected "Rejected"

``branch g_final accept -> t15`` is shorthand for the labeled flow above.
Canonical output (serialize_model) is one statement per line, sections in the
order roles, tasks, gateways, flows, start, ends, each sorted by id.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .model import (
    AutomationLabel,
    DecisionGateway,
    EndNode,
    Flow,
    ModelKind,
    ProcessModel,
    Role,
    StartNode,
    Task,
    id_sort_key,
    require_valid,
)

MODEL_KEYWORDS = ("process", "role", "task", "gateway", "branch", "flow", "start", "end")
ANNOT_KEYWORDS = ("annotate", "override")
PACKAGE_KEYWORDS = ("package",)
KEYWORDS = frozenset(MODEL_KEYWORDS + ANNOT_KEYWORDS + PACKAGE_KEYWORDS)

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, code: str, message: str, span: SourceSpan):
        super().__init__(f"{span}: {code}: {message}")
        self.code = code
        self.message = message
        self.span = span


class Level(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"

    @property
    def rank(self) -> int:
        return {"high": 3, "medium": 2, "low": 1}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Level":
        return cls(text.lower())


@dataclass(frozen=True)
class Override:
    label: AutomationLabel
    reason: str

    def __post_init__(self):
        if not self.reason.strip():
            raise ValueError("override requires a non-empty reason")


@dataclass(frozen=True)
class Annotation:
    benefit: Level
    cost: Level
    override: Optional[Override] = None


@dataclass(frozen=True)
class AnnotationSet:
    entries: dict[str, Annotation] = field(default_factory=dict)

    def __getitem__(self, task_id: str) -> Annotation:
        return self.entries[task_id]

    def __contains__(self, task_id: str) -> bool:
        return task_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)


# ---------------------------------------------------------------------------
# tokenizer

_STRING = r'"(?:[^"\\\n]|\\.)*"'
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>{_STRING})
  | (?P<badstring>"[^\n]*)
  | (?P<arrow>->)
  | (?P<branch>\[[^\]\n]*\])
  | (?P<attr>[A-Za-z_][A-Za-z0-9_]*=(?:{_STRING}|[^\s\[\]{{}}#"]*))
  | (?P<word>[A-Za-z][A-Za-z0-9_]*)
  | (?P<lbrace>\{{)
  | (?P<rbrace>\}})
  | (?P<other>[^\s"\#\[\]{{}}A-Za-z]+|.)
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", '"': '"', "\\": "\\", "t": "\t"}


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


def quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan

    @property
    def value(self) -> str:
        return _unquote(self.text) if self.kind == "string" else self.text


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        start = m.start()
        span = SourceSpan(line, start - line_start + 1)
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = start + chunk.rfind("\n") + 1
        if kind in ("ws", "comment"):
            continue
        if kind == "badstring":
            raise ParseError("unterminated-string", "string literal is not closed", span)
        toks.append(_Tok(kind, chunk, span))
    return toks


class _Stream:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.eof_span = _eof_span(text)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def at_statement_end(self) -> bool:
        tok = self.peek()
        return tok is None or tok.kind in ("lbrace", "rbrace") or (tok.kind == "word" and tok.text in KEYWORDS)

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected-end", f"expected {what}", self.eof_span)
        self.pos += 1
        return tok

    def ident(self, what: str) -> _Tok:
        tok = self.next(what)
        if tok.kind != "word" or tok.text in KEYWORDS:
            raise ParseError("expected-identifier", f"expected {what}, got {tok.text!r}", tok.span)
        return tok

    def title(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.kind != "string":
            span = tok.span if tok is not None else self.eof_span
            got = tok.text if tok is not None else "end of input"
            raise ParseError("unquoted-title", f"{what} must be a double-quoted string, got {got!r}", span)
        self.pos += 1
        return tok

    def optional_title(self) -> Optional[str]:
        tok = self.peek()
        if tok is not None and tok.kind == "string":
            self.pos += 1
            return tok.value
        prev = self.toks[self.pos - 1]
        same_line = tok is not None and tok.span.line == prev.span.line
        if same_line and not self.at_statement_end() and tok.kind == "word":
            raise ParseError("unquoted-title", f"title must be double-quoted, got {tok.text!r}", tok.span)
        return None

    def attrs(self, allowed: tuple[str, ...]) -> dict[str, tuple[str, SourceSpan]]:
        found: dict[str, tuple[str, SourceSpan]] = {}
        while not self.at_statement_end():
            tok = self.next("attribute")
            if tok.kind != "attr":
                if tok.kind == "word":
                    raise ParseError("unknown-keyword", f"unknown keyword {tok.text!r}", tok.span)
                raise ParseError("unexpected-token", f"unexpected {tok.text!r}", tok.span)
            key, _, raw = tok.text.partition("=")
            if key not in allowed:
                raise ParseError("unknown-attribute", f"unknown attribute {key!r}", tok.span)
            if key in found:
                raise ParseError("duplicate-attribute", f"attribute {key!r} given twice", tok.span)
            value = _unquote(raw) if raw.startswith('"') else raw
            found[key] = (value, tok.span)
        return found

    def keyword(self, allowed: tuple[str, ...]) -> _Tok:
        tok = self.next("statement")
        if tok.kind != "word" or tok.text not in allowed:
            if tok.kind == "word" and tok.text in KEYWORDS:
                raise ParseError("unexpected-statement", f"{tok.text!r} is not allowed here", tok.span)
            if tok.kind == "word":
                raise ParseError("unknown-keyword", f"unknown keyword {tok.text!r}", tok.span)
            raise ParseError("unexpected-token", f"unexpected {tok.text!r}", tok.span)
        return tok


def _eof_span(text: str) -> SourceSpan:
    lines = text.split("\n")
    if len(lines) > 1 and lines[-1] == "":
        return SourceSpan(len(lines) - 1, len(lines[-2]) + 1)
    return SourceSpan(len(lines), len(lines[-1]) + 1)


# ---------------------------------------------------------------------------
# process models


def parse_model(text: str) -> ProcessModel:
    """Parse model DSL text. The result is not validated; run validate_model on it."""
    s = _Stream(text)
    tok = s.peek()
    if tok is None or tok.kind != "word" or tok.text != "process":
        span = tok.span if tok is not None else SourceSpan(1, 1)
        raise ParseError("missing-process-header", "input must start with a process statement", span)
    s.next("process")
    name = s.title("process name").value
    header = s.attrs(("kind",))
    kind = ModelKind.ASIS
    if "kind" in header:
        value, span = header["kind"]
        try:
            kind = ModelKind(value.lower())
        except ValueError:
            raise ParseError("bad-kind", f"kind must be asis or tobe, got {value!r}", span) from None
    braced = False
    if s.peek() is not None and s.peek().kind == "lbrace":
        s.next("{")
        braced = True

    roles: list[Role] = []
    role_ids: set[str] = set()
    nodes: list = []
    node_ids: set[str] = set()
    # (flow, span of source, span of target, span of branch)
    flows: list[tuple[Flow, SourceSpan, SourceSpan, Optional[SourceSpan]]] = []

    def declare_node(tok: _Tok, node) -> None:
        if tok.text in node_ids:
            raise ParseError("duplicate-id", f"node id {tok.text!r} already declared", tok.span)
        node_ids.add(tok.text)
        nodes.append(node)

    while True:
        tok = s.peek()
        if tok is None:
            if braced:
                raise ParseError("unclosed-brace", "missing '}' after process body", s.eof_span)
            break
        if tok.kind == "rbrace":
            s.next("}")
            if not braced:
                raise ParseError("unexpected-token", "'}' without matching '{'", tok.span)
            extra = s.peek()
            if extra is not None:
                raise ParseError("unexpected-token", f"unexpected {extra.text!r} after process body", extra.span)
            break
        kw = s.keyword(MODEL_KEYWORDS[1:])
        if kw.text == "role":
            rid = s.ident("role id")
            if rid.text in role_ids:
                raise ParseError("duplicate-id", f"role id {rid.text!r} already declared", rid.span)
            role_ids.add(rid.text)
            roles.append(Role(rid.text, s.optional_title()))
        elif kw.text == "task":
            tid = s.ident("task id")
            title = s.title("task title").value
            attrs = s.attrs(("role", "roles", "label"))
            if "role" in attrs and "roles" in attrs:
                raise ParseError("duplicate-attribute", "give either role= or roles=", attrs["roles"][1])
            role_value = attrs.get("role") or attrs.get("roles")
            task_roles = tuple(_id_list(role_value)) if role_value else ()
            label = None
            if "label" in attrs:
                value, span = attrs["label"]
                label = _parse_label(value, span)
            declare_node(tid, Task(tid.text, title, task_roles, label))
        elif kw.text == "gateway":
            gid = s.ident("gateway id")
            title = s.title("gateway title").value
            attrs = s.attrs(("role",))
            if "role" not in attrs:
                raise ParseError("missing-attribute", "gateway needs role=", gid.span)
            role = _id_list(attrs["role"])
            if len(role) != 1:
                raise ParseError("bad-attribute", "gateway takes exactly one role", attrs["role"][1])
            declare_node(gid, DecisionGateway(gid.text, title, role[0]))
        elif kw.text in ("start", "end"):
            nid = s.ident(f"{kw.text} node id")
            title = s.optional_title()
            cls = StartNode if kw.text == "start" else EndNode
            declare_node(nid, cls(nid.text, title))
        elif kw.text == "flow":
            src = s.ident("flow source")
            arrow = s.next("'->'")
            if arrow.kind != "arrow":
                raise ParseError("malformed-flow-arrow", f"expected '->', got {arrow.text!r}", arrow.span)
            dst = s.ident("flow target")
            branch, bspan = None, None
            nxt = s.peek()
            if nxt is not None and nxt.kind == "branch":
                s.next("branch")
                branch, bspan = _branch_label(nxt), nxt.span
            elif nxt is not None and not s.at_statement_end():
                raise ParseError("malformed-flow-arrow", f"unexpected {nxt.text!r} in flow", nxt.span)
            flows.append((Flow(src.text, dst.text, branch), src.span, dst.span, bspan))
        elif kw.text == "branch":
            gid = s.ident("gateway id")
            label = s.ident("branch label")
            arrow = s.next("'->'")
            if arrow.kind != "arrow":
                raise ParseError("malformed-flow-arrow", f"expected '->', got {arrow.text!r}", arrow.span)
            dst = s.ident("branch target")
            flows.append((Flow(gid.text, dst.text, label.text), gid.span, dst.span, label.span))

    kinds = {n.id: type(n) for n in nodes}
    for flow, sspan, tspan, bspan in flows:
        for ref, span in ((flow.source, sspan), (flow.target, tspan)):
            if ref not in kinds:
                raise ParseError("unknown-node-reference", f"flow references undeclared node {ref!r}", span)
        if flow.branch is not None and kinds[flow.source] is not DecisionGateway:
            raise ParseError(
                "branch-on-non-gateway", f"branch label on flow from non-gateway {flow.source!r}", bspan
            )

    return ProcessModel(
        name=name,
        roles=tuple(roles),
        nodes=tuple(nodes),
        flows=tuple(f for f, *_ in flows),
        kind=kind,
    )


def _branch_label(tok: _Tok) -> str:
    label = tok.text[1:-1].strip()
    if not IDENT.match(label):
        raise ParseError("bad-branch-label", f"branch label {label!r} is not an identifier", tok.span)
    return label


def _id_list(attr: tuple[str, SourceSpan]) -> list[str]:
    value, span = attr
    ids = [p.strip() for p in value.split(",")]
    for ident in ids:
        if not IDENT.match(ident) or ident in KEYWORDS:
            raise ParseError("expected-identifier", f"{ident!r} is not an identifier", span)
    return ids


def _parse_label(value: str, span: SourceSpan) -> AutomationLabel:
    try:
        return AutomationLabel(value.upper())
    except ValueError:
        raise ParseError("bad-label", f"label must be A, S or M, got {value!r}", span) from None


def serialize_model(model: ProcessModel) -> str:
    """Canonical text for a clean model. Same input always gives the same bytes."""
    require_valid(model)
    m = model.normalized()
    lines = [f"process {quote(m.name)} kind={m.kind.value}"]
    for role in m.roles:
        lines.append(f"role {role.id}" + (f" {quote(role.title)}" if role.title is not None else ""))
    for task in m.tasks:
        line = f"task {task.id} {quote(task.title)} role={','.join(task.roles)}"
        if task.label is not None:
            line += f" label={task.label.value}"
        lines.append(line)
    for gw in m.gateways:
        lines.append(f"gateway {gw.id} {quote(gw.title)} role={gw.role}")
    for f in m.flows:
        lines.append(f"flow {f.source} -> {f.target}" + (f" [{f.branch}]" if f.branch is not None else ""))
    for n in m.start_nodes + m.end_nodes:
        kw = "start" if isinstance(n, StartNode) else "end"
        lines.append(f"{kw} {n.id}" + (f" {quote(n.title)}" if n.title is not None else ""))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# annotations


def parse_annotations(text: str) -> AnnotationSet:
    s = _Stream(text)
    base: dict[str, Annotation] = {}
    overrides: list[tuple[_Tok, Override]] = []
    seen_override: set[str] = set()
    while s.peek() is not None:
        kw = s.keyword(ANNOT_KEYWORDS)
        tid = s.ident("task id")
        if kw.text == "annotate":
            attrs = s.attrs(("benefit", "cost"))
            if tid.text in base:
                raise ParseError("duplicate-annotation", f"task {tid.text!r} annotated twice", tid.span)
            levels = {}
            for key in ("benefit", "cost"):
                if key not in attrs:
                    raise ParseError("missing-attribute", f"annotate needs {key}=", tid.span)
                value, span = attrs[key]
                try:
                    levels[key] = Level.parse(value)
                except ValueError:
                    raise ParseError("bad-level", f"{key} must be high, medium or low, got {value!r}", span) from None
            base[tid.text] = Annotation(levels["benefit"], levels["cost"])
        else:
            attrs = s.attrs(("decision", "reason"))
            if "decision" not in attrs:
                raise ParseError("missing-attribute", "override needs decision=", tid.span)
            label = _parse_label(*attrs["decision"])
            reason = attrs.get("reason", ("", tid.span))[0]
            if not reason.strip():
                raise ParseError("override-missing-reason", f"override of {tid.text!r} needs reason=", tid.span)
            if tid.text in seen_override:
                raise ParseError("duplicate-override", f"task {tid.text!r} overridden twice", tid.span)
            seen_override.add(tid.text)
            overrides.append((tid, Override(label, reason)))
    for tid, ov in overrides:
        if tid.text not in base:
            raise ParseError("override-unknown-task", f"override of {tid.text!r} has no annotate entry", tid.span)
        a = base[tid.text]
        base[tid.text] = Annotation(a.benefit, a.cost, ov)
    return AnnotationSet(base)


def serialize_annotations(annotations: AnnotationSet) -> str:
    lines = []
    overrides = []
    for tid in sorted(annotations.entries, key=id_sort_key):
        a = annotations.entries[tid]
        lines.append(f"annotate {tid} benefit={a.benefit.value} cost={a.cost.value}")
        if a.override is not None:
            overrides.append(f"override {tid} decision={a.override.label.value} reason={quote(a.override.reason)}")
    return "\n".join(lines + overrides) + "\n"


# ---------------------------------------------------------------------------
# use-case packages


def parse_packages(text: str) -> list[tuple[str, list[str]]]:
    """``package "name" t1 t2 ...`` statements, kept in file order."""
    s = _Stream(text)
    out: list[tuple[str, list[str]]] = []
    names: set[str] = set()
    while s.peek() is not None:
        s.keyword(PACKAGE_KEYWORDS)
        name_tok = s.title("package name")
        if name_tok.value in names:
            raise ParseError("duplicate-package", f"package {name_tok.value!r} declared twice", name_tok.span)
        names.add(name_tok.value)
        members = []
        while not s.at_statement_end():
            members.append(s.ident("task id").text)
        out.append((name_tok.value, members))
    return out


def serialize_packages(packages: list[tuple[str, list[str]]]) -> str:
    return "".join(f"package {quote(name)} {' '.join(ids)}\n".replace(" \n", "\n") for name, ids in packages)
