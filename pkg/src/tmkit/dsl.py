"""Textual ``.tm`` surface language: parser and canonical printer.

Grammar (whitespace-insensitive, ``#`` starts a comment)::

    model    := item*
    item     := thimac | flow | trigger | join | event | negative | choice | chron
    thimac   := "thimac" NAME [appearing|existing|subsisting] "{" body "}"
    body     := (stage | thimac | memory)*
    stage    := KIND [in|out|both] ["@" LABEL] ";"
    memory   := "memory" NAME "{" body "}" "on" REF [";"]
    flow     := "flow" PATH "->" PATH ";"
    trigger  := "trigger" PATH "->" PATH ["when" STRING] ";"
    join     := "join" "(" PATH ["when" STRING] ("," PATH ["when" STRING])* ")" "->" PATH ";"
    event    := "event" NAME ["*"] ["entity"] ["instant"] ["duration" INT]
                ["measure" STRING] STRING "region" "{" REF+ "}"
    negative := "negative" NAME "of" NAME [";"]
    choice   := "choice" NAME "(" STRING ("," STRING)* ")" ";"
    chron    := "chron" NAME "->" NAME ["when" STRING] ";"
              | "chron" "join" "(" NAME ["when" STRING] ("," ...)* ")" "->" NAME ["when" STRING] ";"

``PATH`` is ``@label`` or ``Thimac.Sub.kind[i]``; ``REF`` additionally
accepts a bare label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .decls import ChoiceDecl, ChronEdge, ChronJoin, DynamicDecls, EventDecl, JoinInput, NegativeDecl
from .errors import Diagnostics, ModelError, ParseError, error
from .model import (
    NAME_RE,
    RESERVED_NAMES,
    ActionKind,
    ArcKind,
    StaticModel,
    ThingClassification,
    TransferDirection,
)

__all__ = ["SourceFile", "parse", "parse_text", "print_model", "format_model"]

_CLASSIFICATIONS = {c.value for c in ThingClassification}
_DIRECTIONS = {d.value for d in TransferDirection}
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class SourceFile:
    text: str
    name: str = "<string>"


class Token(NamedTuple):
    kind: str  # WORD, STRING, PUNCT, EOF
    value: str
    line: int
    col: int


class _SyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"""
    (?:[ \t\r\n\f\v]+|\#[^\n]*)+
  | (?P<STRING>"(?:[^"\\\n]|\\[nt"\\])*")
  | (?P<PUNCT>->|[{}();,@*\[\]])
  | (?P<WORD>[A-Za-z0-9_.]+)
  | (?P<BAD>.)
""", re.VERBOSE | re.DOTALL)
_UNESCAPE_RE = re.compile(r"\\(.)")


def _string_error(text: str, i: int, line: int, line_start: int) -> _SyntaxError:
    """Explain why the string literal opening at ``i`` did not scan."""
    j = i + 1
    while j < len(text) and text[j] != "\n":
        if text[j] == "\\":
            if j + 1 >= len(text) or text[j + 1] not in _ESCAPES:
                return _SyntaxError("invalid escape in string", line, j - line_start + 1)
            j += 2
            continue
        j += 1
    return _SyntaxError("unterminated string", line, i - line_start + 1)


def tokenize(text: str) -> list[Token]:
    newlines = [m.start() for m in re.finditer("\n", text)]
    k, line_start = 0, 0
    tokens: list[Token] = []
    append = tokens.append
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind is None:
            continue
        pos = m.start()
        while k < len(newlines) and newlines[k] < pos:
            line_start = newlines[k] + 1
            k += 1
        if kind == "BAD":
            if text[pos] == '"':
                raise _string_error(text, pos, k + 1, line_start)
            raise _SyntaxError(f"unexpected character {text[pos]!r}", k + 1, pos - line_start + 1)
        value = m.group()
        if kind == "STRING":
            value = _UNESCAPE_RE.sub(lambda e: _ESCAPES[e.group(1)], value[1:-1])
        append(Token(kind, value, k + 1, pos - line_start + 1))
    line_start = newlines[-1] + 1 if newlines else 0
    append(Token("EOF", "", len(newlines) + 1, len(text) - line_start + 1))
    return tokens


# AST


@dataclass
class _Ref:
    text: str
    at: bool
    tok: Token

    @property
    def source(self) -> str:
        return "@" + self.text if self.at else self.text


@dataclass
class _StageNode:
    kind: ActionKind
    direction: Optional[TransferDirection]
    label: Optional[str]
    tok: Token


@dataclass
class _ThimacNode:
    name: str
    classification: ThingClassification
    body: list = field(default_factory=list)
    tok: Optional[Token] = None
    memory_host: Optional[_Ref] = None  # set for memory blocks


@dataclass
class _ArcNode:
    kind: ArcKind
    src: _Ref
    dst: _Ref
    guard: Optional[str]
    tok: Token


@dataclass
class _JoinNode:
    inputs: list[tuple[_Ref, Optional[str]]]
    output: _Ref
    tok: Token


@dataclass
class _EventNode:
    decl: EventDecl
    refs: list[_Ref]
    tok: Token


@dataclass
class _NameNode:  # negatives, choices and chronology carry plain names
    item: Union[NegativeDecl, ChoiceDecl, ChronEdge, ChronJoin]
    tok: Token


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def fail(self, message: str, tok: Optional[Token] = None) -> None:
        tok = tok or self.tok
        shown = tok.value if tok.kind != "EOF" else "end of input"
        raise _SyntaxError(f"{message}, found {shown!r}", tok.line, tok.col)

    def next(self) -> Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, value: str, kind: Optional[str] = None) -> bool:
        tok = self.tok
        return tok.value == value and tok.kind in ((kind,) if kind else ("PUNCT", "WORD"))

    def accept(self, value: str) -> Optional[Token]:
        if self.at(value):
            return self.next()
        return None

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"expected {value!r}")
        return self.next()

    def name(self, what: str = "name") -> str:
        tok = self.tok
        if tok.kind != "WORD" or not NAME_RE.match(tok.value):
            self.fail(f"expected {what}")
        return self.next().value

    def string(self) -> str:
        if self.tok.kind != "STRING":
            self.fail("expected string")
        return self.next().value

    def integer(self) -> int:
        tok = self.tok
        if tok.kind != "WORD" or not tok.value.isdigit():
            self.fail("expected integer")
        return int(self.next().value)

    def ref(self, allow_bare_label: bool = True) -> _Ref:
        tok = self.tok
        at = bool(self.accept("@"))
        word = self.tok
        if word.kind != "WORD":
            self.fail("expected stage reference")
        self.next()
        text = word.value
        if at:
            return _Ref(text, True, tok)
        if self.at("["):
            self.next()
            text += f"[{self.integer()}]"
            self.expect("]")
        elif not allow_bare_label and "." not in text:
            self.fail("expected '@label' or thimac path", word)
        return _Ref(text, False, tok)

    # grammar

    def parse_model(self) -> list:
        items = []
        while self.tok.kind != "EOF":
            tok = self.tok
            if tok.kind != "WORD":
                self.fail("expected declaration")
            handler = {
                "thimac": self.thimac,
                "flow": self.arc,
                "trigger": self.arc,
                "join": self.join,
                "event": self.event,
                "negative": self.negative,
                "choice": self.choice,
                "chron": self.chron,
            }.get(tok.value)
            if handler is None:
                self.fail("expected declaration")
            items.append(handler())
        return items

    def thimac(self) -> _ThimacNode:
        tok = self.expect("thimac")
        name = self.name("thimac name")
        classification = ThingClassification.SUBSISTING
        if self.tok.kind == "WORD" and self.tok.value in _CLASSIFICATIONS:
            classification = ThingClassification(self.next().value)
        node = _ThimacNode(name, classification, tok=tok)
        node.body = self.body()
        return node

    def body(self) -> list:
        self.expect("{")
        items: list = []
        while not self.at("}"):
            tok = self.tok
            if tok.kind == "WORD" and tok.value in RESERVED_NAMES:
                items.append(self.stage())
            elif self.at("thimac"):
                items.append(self.thimac())
            elif self.at("memory"):
                items.append(self.memory())
            else:
                self.fail("expected stage, thimac, memory or '}'")
        self.expect("}")
        return items

    def stage(self) -> _StageNode:
        tok = self.next()
        kind = ActionKind(tok.value)
        direction = None
        if self.tok.kind == "WORD" and self.tok.value in _DIRECTIONS:
            direction = TransferDirection(self.next().value)
        label = None
        if self.accept("@"):
            if self.tok.kind != "WORD":
                self.fail("expected label")
            label = self.next().value
        self.expect(";")
        return _StageNode(kind, direction, label, tok)

    def memory(self) -> _ThimacNode:
        tok = self.expect("memory")
        name = self.name("memory name")
        node = _ThimacNode(name, ThingClassification.SUBSISTING, tok=tok)
        node.body = self.body()
        self.expect("on")
        node.memory_host = self.ref()
        self.accept(";")
        return node

    def arc(self) -> _ArcNode:
        tok = self.next()
        kind = ArcKind(tok.value)
        src = self.ref(allow_bare_label=False)
        self.expect("->")
        dst = self.ref(allow_bare_label=False)
        guard = None
        if kind is ArcKind.TRIGGER and self.accept("when"):
            guard = self.string()
        self.expect(";")
        return _ArcNode(kind, src, dst, guard, tok)

    def join(self) -> _JoinNode:
        tok = self.expect("join")
        self.expect("(")
        inputs = []
        while True:
            src = self.ref(allow_bare_label=False)
            guard = self.string() if self.accept("when") else None
            inputs.append((src, guard))
            if not self.accept(","):
                break
        self.expect(")")
        self.expect("->")
        out = self.ref(allow_bare_label=False)
        self.expect(";")
        return _JoinNode(inputs, out, tok)

    def event(self) -> _EventNode:
        tok = self.expect("event")
        name = self.name("event name")
        extended = entity = instant = False
        duration = 1
        measure = None
        while True:
            if self.accept("*"):
                extended = True
            elif self.accept("entity"):
                entity = extended = True
            elif self.accept("instant"):
                instant = True
            elif self.accept("duration"):
                dtok = self.tok
                duration = self.integer()
                if duration < 1:
                    raise _SyntaxError("duration must be at least 1 tick", dtok.line, dtok.col)
            elif self.accept("measure"):
                measure = self.string()
            else:
                break
        description = self.string()
        self.expect("region")
        self.expect("{")
        refs = []
        while not self.at("}"):
            refs.append(self.ref())
        self.expect("}")
        decl = EventDecl(name, description, (), duration, extended, measure, entity, instant, line=tok.line)
        return _EventNode(decl, refs, tok)

    def negative(self) -> _NameNode:
        tok = self.expect("negative")
        name = self.name("negative event name")
        self.expect("of")
        paired = self.name("event name")
        self.accept(";")
        return _NameNode(NegativeDecl(name, paired, line=tok.line), tok)

    def choice(self) -> _NameNode:
        tok = self.expect("choice")
        name = self.name("choice name")
        self.expect("(")
        options = [self.string()]
        while self.accept(","):
            options.append(self.string())
        self.expect(")")
        self.expect(";")
        return _NameNode(ChoiceDecl(name, tuple(options)), tok)

    def chron(self) -> _NameNode:
        tok = self.expect("chron")
        if self.at("join") and self.peek().value == "(":
            self.next()
            self.expect("(")
            inputs = []
            while True:
                name = self.name("event name")
                guard = self.string() if self.accept("when") else None
                inputs.append(JoinInput(name, guard))
                if not self.accept(","):
                    break
            self.expect(")")
            self.expect("->")
            out = self.name("event name")
            join_guard = self.string() if self.accept("when") else None
            self.expect(";")
            return _NameNode(ChronJoin(tuple(inputs), out, join_guard), tok)
        src = self.name("event name")
        self.expect("->")
        dst = self.name("event name")
        guard = self.string() if self.accept("when") else None
        self.expect(";")
        return _NameNode(ChronEdge(src, dst, guard), tok)


class _Builder:
    def __init__(self) -> None:
        self.model = StaticModel()
        self.decls = DynamicDecls()
        self.diags = Diagnostics()
        self.pending_memories: list[tuple[int, _Ref]] = []

    def report(self, code: str, message: str, tok: Token) -> None:
        self.diags.add(error(code, message, tok.line, tok.col))

    def resolve(self, ref: _Ref) -> Optional[int]:
        try:
            return self.model.resolve_ref(ref.source)
        except ModelError as exc:
            self.report("E_UNKNOWN_REF", str(exc), ref.tok)
            return None

    def build(self, items: list) -> None:
        for item in items:
            if isinstance(item, _ThimacNode):
                self.thimac(item, None)
        for tid, ref in self.pending_memories:
            sid = self.resolve(ref)
            if sid is None:
                continue
            mem = self.model.thimacs[tid]
            if self.model.stages[sid].owner != mem.parent:
                self.report("E_MEMORY_HOST", f"memory {mem.name!r} must be hosted by a stage of its enclosing thimac", ref.tok)
                continue
            mem.host = sid
        for item in items:
            if isinstance(item, _ArcNode):
                self.arc(item)
            elif isinstance(item, _JoinNode):
                self.join(item)
            elif isinstance(item, _EventNode):
                self.event(item)
            elif isinstance(item, _NameNode):
                self.named(item)

    def thimac(self, node: _ThimacNode, parent: Optional[int]) -> None:
        try:
            if node.memory_host is not None:
                tid = self.model._add_thimac(parent, node.name, node.classification, is_memory=True)
                self.pending_memories.append((tid, node.memory_host))
            else:
                tid = self.model.add_thimac(parent, node.name, node.classification)
        except ModelError as exc:
            self.report(exc.code, str(exc), node.tok)
            return
        for child in node.body:
            if isinstance(child, _StageNode):
                try:
                    self.model.add_stage(tid, child.kind, child.direction, child.label)
                except ModelError as exc:
                    self.report(exc.code, str(exc), child.tok)
            else:
                self.thimac(child, tid)

    def arc(self, node: _ArcNode) -> None:
        src, dst = self.resolve(node.src), self.resolve(node.dst)
        if src is None or dst is None:
            return
        if node.kind is ArcKind.FLOW:
            self.model.add_flow(src, dst)
        else:
            self.model.add_trigger(src, dst, node.guard)

    def join(self, node: _JoinNode) -> None:
        out = self.resolve(node.output)
        srcs = [(self.resolve(r), g) for r, g in node.inputs]
        if out is None or any(s is None for s, _ in srcs):
            return
        arcs = [self.model.add_trigger(s, out, g) for s, g in srcs]
        self.model.add_join(arcs, out)

    def event(self, node: _EventNode) -> None:
        decl = node.decl
        if self._taken(decl.name):
            self.report("E_DUPLICATE", f"duplicate event name {decl.name!r}", node.tok)
            return
        refs = []
        for ref in node.refs:
            sid = self.resolve(ref)
            if sid is not None:
                refs.append(self.model.stage_ref(sid))
        decl.region = tuple(dict.fromkeys(refs))
        self.decls.events.append(decl)

    def named(self, node: _NameNode) -> None:
        item = node.item
        if isinstance(item, NegativeDecl):
            if self._taken(item.name):
                self.report("E_DUPLICATE", f"duplicate event name {item.name!r}", node.tok)
                return
            self.decls.negatives.append(item)
        elif isinstance(item, ChoiceDecl):
            if any(c.name == item.name for c in self.decls.choices):
                self.report("E_DUPLICATE", f"duplicate choice {item.name!r}", node.tok)
                return
            if len(set(item.options)) != len(item.options):
                self.report("E_DUPLICATE", f"choice {item.name!r} repeats an option", node.tok)
                return
            self.decls.choices.append(item)
        else:
            self.decls.chronology.append(item)

    def _taken(self, name: str) -> bool:
        return any(e.name == name for e in self.decls.events) or any(
            n.name == name for n in self.decls.negatives
        )


def parse(source: SourceFile | str) -> tuple[StaticModel, DynamicDecls]:
    """Parse ``.tm`` text into a static model and its dynamic declarations.

    Raises :class:`ParseError` carrying located diagnostics on any syntax
    or resolution problem.
    """
    if isinstance(source, str):
        source = SourceFile(source)
    try:
        items = _Parser(tokenize(source.text)).parse_model()
    except _SyntaxError as exc:
        raise ParseError([error("E_SYNTAX", str(exc), exc.line, exc.col)]) from None
    except RecursionError:
        raise ParseError([error("E_SYNTAX", "nesting too deep", 1, 1)]) from None
    builder = _Builder()
    try:
        builder.build(items)
    except RecursionError:
        raise ParseError([error("E_SYNTAX", "nesting too deep", 1, 1)]) from None
    if builder.diags.has_errors:
        raise ParseError(builder.diags)
    return builder.model, builder.decls


def parse_text(text: str, name: str = "<string>") -> tuple[StaticModel, DynamicDecls]:
    return parse(SourceFile(text, name))


# printing


def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _path_ref(model: StaticModel, sid: int) -> str:
    st = model.stages[sid]
    return f"@{st.label}" if st.label is not None else model.stage_path(sid)


def _thimac_lines(model: StaticModel, tid: int, depth: int) -> list[str]:
    th = model.thimacs[tid]
    pad = "  " * depth
    if th.is_memory:
        head = f"{pad}memory {th.name}"
    else:
        head = f"{pad}thimac {th.name}"
        if th.classification is not ThingClassification.SUBSISTING:
            head += f" {th.classification.value}"
    body: list[tuple[int, list[str]]] = []
    for sid in th.stages:
        st = model.stages[sid]
        text = f"{pad}  {st.describe()}"
        if st.label is not None:
            text += f" @{st.label}"
        body.append((sid, [text + ";"]))
    for child in th.children:
        body.append((child, _thimac_lines(model, child, depth + 1)))
    body.sort(key=lambda item: item[0])
    tail = "}"
    if th.is_memory:
        tail += f" on {model.stage_ref(th.host)};" if th.host is not None else " on ?;"
    if not body:
        return [f"{head} {{{tail}"]
    lines = [f"{head} {{"]
    for _, chunk in body:
        lines.extend(chunk)
    lines.append(pad + tail)
    return lines


def format_model(model: StaticModel, decls: Optional[DynamicDecls] = None) -> str:
    """Canonical text for a model; parsing it back yields an equal model."""
    decls = decls or DynamicDecls()
    static: list[tuple[int, list[str]]] = []
    for tid in model.roots:
        static.append((tid, _thimac_lines(model, tid, 0)))
    joined_arcs = {a for j in model.joins.values() for a in j.inputs}
    for arc in model.arcs.values():
        if arc.id in joined_arcs:
            continue
        text = f"{arc.kind.value} {_path_ref(model, arc.src)} -> {_path_ref(model, arc.dst)}"
        if arc.guard is not None:
            text += f" when {_quote(arc.guard)}"
        static.append((arc.id, [text + ";"]))
    for join in model.joins.values():
        parts = []
        for aid in join.inputs:
            arc = model.arcs[aid]
            part = _path_ref(model, arc.src)
            if arc.guard is not None:
                part += f" when {_quote(arc.guard)}"
            parts.append(part)
        key = min(join.inputs) if join.inputs else join.id
        static.append((key, [f"join ({', '.join(parts)}) -> {_path_ref(model, join.output)};"]))
    static.sort(key=lambda item: item[0])

    sections: list[list[str]] = []
    block: list[str] = []
    for _, chunk in static:
        if len(chunk) > 1 or chunk[0].startswith("thimac"):
            if block:
                sections.append(block)
            sections.append(chunk)
            block = []
        else:
            block.extend(chunk)
    if block:
        sections.append(block)

    if decls.choices:
        sections.append(
            [f"choice {c.name} ({', '.join(_quote(o) for o in c.options)});" for c in decls.choices]
        )
    if decls.events:
        lines = []
        for ev in decls.events:
            text = f"event {ev.name}"
            if ev.extended:
                text += " *"
            if ev.entity:
                text += " entity"
            if ev.instant:
                text += " instant"
            if ev.duration != 1:
                text += f" duration {ev.duration}"
            if ev.measure is not None:
                text += f" measure {_quote(ev.measure)}"
            text += f" {_quote(ev.description)} region {{ {' '.join(ev.region)} }}"
            lines.append(text)
        sections.append(lines)
    if decls.negatives:
        sections.append([f"negative {n.name} of {n.paired};" for n in decls.negatives])
    if decls.chronology:
        lines = []
        for item in decls.chronology:
            if isinstance(item, ChronEdge):
                text = f"chron {item.src} -> {item.dst}"
                if item.guard is not None:
                    text += f" when {_quote(item.guard)}"
            else:
                ins = ", ".join(
                    i.name + (f" when {_quote(i.guard)}" if i.guard is not None else "") for i in item.inputs
                )
                text = f"chron join ({ins}) -> {item.output}"
                if item.guard is not None:
                    text += f" when {_quote(item.guard)}"
            lines.append(text + ";")
        sections.append(lines)
    if not sections:
        return ""
    return "\n\n".join("\n".join(s) for s in sections) + "\n"


print_model = format_model
