"""Textual syntax for model bundles (``.tm``) and scenarios (``.tms``).

A model file::

    model "mug-handle"

    thimac Mug object {
      stages: create, release, transfer
      thimac Handle {
        stages: create
      }
    }

    flow Mug.create -> Mug.release
    flow f3: Mug.transfer -> Kitchen.transfer label "Mug"
    trigger Mug.process => Mug.create

    event m1 unique {
      region: Mug, Mug.create, f1
      attach Mug/Handle -> Mug
      detach Mug/Handle
    }

    behavior {
      start m1
      m1 -> m2
      m2 -[yes]-> m3
      m2 -[no]-> m1
    }

A scenario file::

    scenario "assignments" start work
    max_steps 100
    guard work: yes, yes, no
    keys work: E1, E2, E1

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .core import IDENT_RE, ModelError, StageKind, StageRef, StaticModel
from .levels import (
    BehaviorEdge,
    BehaviorModel,
    Event,
    EventsModel,
    Guard,
    ModelBundle,
    SourceSpan,
)

DEFAULT_MAX_STEPS = 10000
MAX_NESTING = 128

_TOKEN_RE = re.compile(
    r"""
     (?P<ws>[ \t\r\n]+)
    |(?P<comment>\#[^\n]*)
    |(?P<string>"(?:[^"\\\n]|\\[^\n])*")
    |(?P<yes>-\[yes\]->)
    |(?P<no>-\[no\]->)
    |(?P<arrow>->)
    |(?P<darrow>=>)
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
    |(?P<int>[0-9]+)
    |(?P<punct>[{}:,./])
    """,
    re.VERBOSE,
)
_ESCAPES = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class ParseDiagnostic:
    code: str
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.code}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Scenario:
    name: str
    start: str
    guards: dict[str, list[bool]] = field(default_factory=dict)
    max_steps: int = DEFAULT_MAX_STEPS
    unique_keys: dict[str, list[str]] = field(default_factory=dict)


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


class _Source:
    def __init__(self, text: str):
        self.text = text
        self._newlines = [m.start() for m in re.finditer("\n", text)]

    def span(self, offset: int) -> SourceSpan:
        # keep end-of-input positions on the last real character
        if offset >= len(self.text) and self.text:
            offset = len(self.text) - 1
        line = bisect.bisect_left(self._newlines, offset)
        line_start = self._newlines[line - 1] + 1 if line else 0
        return SourceSpan(line + 1, offset - line_start + 1)


def _decode(data: str | bytes) -> str:
    if isinstance(data, str):
        text = data
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            head = data[: exc.start]
            line = head.count(b"\n") + 1
            column = exc.start - (head.rfind(b"\n") + 1) + 1
            raise ParseError(
                [ParseDiagnostic("syntax-error", "input is not valid UTF-8", SourceSpan(line, column))]
            ) from None
    return text[1:] if text.startswith("\ufeff") else text


def _tokenize(src: _Source) -> list[Token]:
    text = src.text
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            msg = "unterminated string" if ch == '"' else f"unexpected character {ch!r}"
            raise ParseError([ParseDiagnostic("syntax-error", msg, src.span(pos))])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _unquote(literal: str) -> str:
    body = literal[1:-1]
    if "\\" not in body:
        return body
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            out.append(_ESCAPES.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def quote(value: str) -> str:
    escaped = (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


class _Cursor:
    """Token stream with the small set of helpers a recursive descent needs."""

    def __init__(self, src: _Source):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def span(self, tok: Token | None = None) -> SourceSpan:
        return self.src.span((tok or self.tok).offset)

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        where = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(
            [ParseDiagnostic("syntax-error", f"{message} (found {where})", self.span(tok))]
        )

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.tok
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        return self.advance() if self.at(kind, text) else None

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, text):
            self.fail(f"expected {what or text or kind}")
        return self.advance()

    def keyword(self, word: str) -> Token:
        return self.expect("ident", word, what=f"'{word}'")

    def ident(self, what: str = "identifier") -> Token:
        return self.expect("ident", what=what)

    def string(self, what: str = "string") -> str:
        return _unquote(self.expect("string", what=what).text)

    def path(self) -> tuple[str, Token]:
        first = self.ident("thimac path")
        parts = [first.text]
        while self.accept("punct", "/"):
            parts.append(self.ident("thimac name").text)
        return "/".join(parts), first

    def stage(self) -> StageKind:
        tok = self.ident("stage kind")
        try:
            return StageKind(tok.text)
        except ValueError:
            self.fail("expected one of create, process, release, transfer, receive", tok)

    def stage_ref(self) -> tuple[StageRef, Token]:
        path, tok = self.path()
        self.expect("punct", ".", what="'.' before the stage kind")
        return StageRef(path, self.stage()), tok


# -- model parsing ------------------------------------------------------------


@dataclass
class _ThimacDecl:
    name: str
    parent: str | None
    kind: str
    stages: list[tuple[StageKind, Token]]
    tok: Token


@dataclass
class _ArcDecl:
    trigger: bool
    id: str | None
    source: tuple[StageRef, Token]
    target: tuple[StageRef, Token]
    label: str | None
    tok: Token


@dataclass
class _EventDecl:
    id: str
    unique: bool
    tok: Token
    region: list[tuple[str, Token]] = field(default_factory=list)
    attach: list[tuple[str, str, Token]] = field(default_factory=list)
    detach: list[tuple[str, Token]] = field(default_factory=list)


@dataclass
class _BehaviorDecl:
    tok: Token
    start: tuple[str, Token] | None = None
    edges: list[tuple[str, str, Guard, Token, Token]] = field(default_factory=list)


class _ModelParser:
    def __init__(self, text: str):
        self.cur = _Cursor(_Source(text))
        self.name = ""
        self.thimacs: list[_ThimacDecl] = []
        self.arcs: list[_ArcDecl] = []
        self.events: list[_EventDecl] = []
        self.behavior: _BehaviorDecl | None = None
        self.errors: list[ParseDiagnostic] = []

    def error(self, code: str, message: str, tok: Token) -> None:
        self.errors.append(ParseDiagnostic(code, message, self.cur.span(tok)))

    def parse(self) -> ModelBundle:
        cur = self.cur
        cur.keyword("model")
        self.name = cur.string("model name")
        while not cur.at("eof"):
            tok = cur.tok
            if tok.kind != "ident":
                cur.fail("expected a declaration")
            if tok.text == "thimac":
                self.thimac(None, 0)
            elif tok.text in ("flow", "trigger"):
                self.arc()
            elif tok.text == "event":
                self.event()
            elif tok.text == "behavior":
                self.behavior_block()
            else:
                cur.fail(f"unknown keyword {tok.text!r}")
        return self.build()

    def thimac(self, parent: str | None, depth: int) -> None:
        cur = self.cur
        start = cur.keyword("thimac")
        if depth >= MAX_NESTING:
            cur.fail(f"thimacs nested deeper than {MAX_NESTING} levels", start)
        name_tok = cur.ident("thimac name")
        kind = "object" if cur.accept("ident", "object") else "generic"
        decl = _ThimacDecl(name_tok.text, parent, kind, [], name_tok)
        self.thimacs.append(decl)
        path = name_tok.text if parent is None else f"{parent}/{name_tok.text}"
        cur.expect("punct", "{", what="'{'")
        while not cur.accept("punct", "}"):
            if cur.at("ident", "stages"):
                cur.advance()
                cur.expect("punct", ":", what="':'")
                while True:
                    tok = cur.tok
                    decl.stages.append((cur.stage(), tok))
                    if not cur.accept("punct", ","):
                        break
            elif cur.at("ident", "thimac"):
                self.thimac(path, depth + 1)
            else:
                cur.fail("expected 'stages', 'thimac' or '}'")

    def arc(self) -> None:
        cur = self.cur
        start = cur.advance()
        trigger = start.text == "trigger"
        arc_id = None
        if cur.at("ident") and cur.tokens[cur.i + 1].text == ":":
            arc_id = cur.advance().text
            cur.advance()
        source = cur.stage_ref()
        cur.expect("darrow" if trigger else "arrow", what="'=>'" if trigger else "'->'")
        target = cur.stage_ref()
        label = cur.string("label text") if cur.accept("ident", "label") else None
        self.arcs.append(_ArcDecl(trigger, arc_id, source, target, label, start))

    def event(self) -> None:
        cur = self.cur
        cur.keyword("event")
        id_tok = cur.ident("event id")
        unique = cur.accept("ident", "unique") is not None
        decl = _EventDecl(id_tok.text, unique, id_tok)
        cur.expect("punct", "{", what="'{'")
        while not cur.accept("punct", "}"):
            if cur.accept("ident", "region"):
                cur.expect("punct", ":", what="':'")
                while True:
                    decl.region.append(self.region_ref())
                    if not cur.accept("punct", ","):
                        break
            elif cur.accept("ident", "attach"):
                part, tok = cur.path()
                cur.expect("arrow", what="'->'")
                whole, _ = cur.path()
                decl.attach.append((part, whole, tok))
            elif cur.accept("ident", "detach"):
                part, tok = cur.path()
                decl.detach.append((part, tok))
            else:
                cur.fail("expected 'region', 'attach', 'detach' or '}'")
        self.events.append(decl)

    def region_ref(self) -> tuple[str, Token]:
        cur = self.cur
        path, tok = cur.path()
        if cur.accept("punct", "."):
            return f"{path}.{cur.stage().value}", tok
        return path, tok

    def behavior_block(self) -> None:
        cur = self.cur
        start = cur.keyword("behavior")
        if self.behavior is not None:
            self.error("duplicate-declaration", "second behavior block", start)
        decl = _BehaviorDecl(start)
        cur.expect("punct", "{", what="'{'")
        while not cur.accept("punct", "}"):
            if cur.at("ident", "start") and cur.tokens[cur.i + 1].kind == "ident":
                cur.advance()
                tok = cur.ident("event id")
                if decl.start is not None:
                    self.error("duplicate-declaration", "start event declared twice", tok)
                decl.start = (tok.text, tok)
                continue
            src = cur.ident("event id")
            arrow = cur.tok
            guard = {"arrow": Guard.ALWAYS, "yes": Guard.YES, "no": Guard.NO}.get(arrow.kind)
            if guard is None:
                cur.fail("expected '->', '-[yes]->' or '-[no]->'")
            cur.advance()
            dst = cur.ident("event id")
            decl.edges.append((src.text, dst.text, guard, src, dst))
        if self.behavior is None:
            self.behavior = decl

    # -- building -----------------------------------------------------------

    def build(self) -> ModelBundle:
        model = StaticModel(self.name)
        for decl in self.thimacs:
            try:
                tid = model.add_thimac(decl.name, decl.parent, decl.kind)
            except ModelError as exc:
                code = "duplicate-declaration" if exc.code != "unknown-parent" else "syntax-error"
                self.error(code, exc.message, decl.tok)
                continue
            for stage, tok in decl.stages:
                try:
                    model.add_stage(tid, stage)
                except ModelError as exc:
                    self.error("duplicate-declaration", exc.message, tok)
        # flows first, then triggers: each list keeps its own auto-numbering
        for decl in sorted(self.arcs, key=lambda a: a.trigger):
            ok = True
            for ref, tok in (decl.source, decl.target):
                if not model.has_stage(ref):
                    if ref.thimac not in model.thimacs:
                        message = f"thimac {ref.thimac!r} is not declared"
                    else:
                        message = f"stage {str(ref)!r} is not declared"
                    self.error("unresolved-reference", message, tok)
                    ok = False
            if not ok:
                continue
            add = model.add_trigger if decl.trigger else model.add_flow
            try:
                add(decl.source[0], decl.target[0], decl.label, decl.id)
            except ModelError as exc:
                code = "syntax-error" if exc.code == "self-loop" else "duplicate-declaration"
                self.error(code, exc.message, decl.tok)

        events = None
        if self.events:
            events = EventsModel()
            for decl in self.events:
                if events.get(decl.id) is not None:
                    self.error("duplicate-declaration", f"event {decl.id!r} declared twice", decl.tok)
                    continue
                events.events.append(self.build_event(model, decl))

        behavior = None
        if self.behavior is not None:
            known = set(events.ids) if events else set()
            behavior = BehaviorModel()
            if self.behavior.start is not None:
                name, tok = self.behavior.start
                if name not in known:
                    self.error("unresolved-reference", f"event {name!r} is not declared", tok)
                behavior.start = name
            for src, dst, guard, stok, dtok in self.behavior.edges:
                for name, tok in ((src, stok), (dst, dtok)):
                    if name not in known:
                        self.error("unresolved-reference", f"event {name!r} is not declared", tok)
                behavior.edges.append(BehaviorEdge(src, dst, guard))

        if self.errors:
            raise ParseError(self.errors)
        return ModelBundle(model, events, behavior)

    def build_event(self, model: StaticModel, decl: _EventDecl) -> Event:
        ev = Event(decl.id, unique=decl.unique, span=self.cur.span(decl.tok))
        for ref, tok in decl.region:
            if model.classify(ref) is None:
                self.error("unresolved-reference", f"region element {ref!r} is not declared", tok)
            elif ref in ev.region:
                self.error("duplicate-declaration", f"{ref!r} listed twice in region", tok)
            else:
                ev.region.append(ref)
        for part, whole, tok in decl.attach:
            for path in (part, whole):
                if path not in model.thimacs:
                    self.error("unresolved-reference", f"thimac {path!r} is not declared", tok)
            ev.attach.append((part, whole))
        for part, tok in decl.detach:
            if part not in model.thimacs:
                self.error("unresolved-reference", f"thimac {part!r} is not declared", tok)
            ev.detach.append(part)
        return ev


def parse(text: str | bytes) -> ModelBundle:
    """Parse a ``.tm`` document; raises ParseError carrying positioned diagnostics."""
    return _ModelParser(_decode(text)).parse()


# -- scenarios ------------------------------------------------------------------


def parse_scenario(text: str | bytes) -> Scenario:
    cur = _Cursor(_Source(_decode(text)))
    cur.keyword("scenario")
    name = cur.string("scenario name")
    cur.keyword("start")
    scenario = Scenario(name, cur.ident("event id").text)
    errors: list[ParseDiagnostic] = []
    seen_max = False
    while not cur.at("eof"):
        tok = cur.tok
        if cur.accept("ident", "max_steps"):
            num = cur.expect("int", what="a positive integer")
            if int(num.text) < 1:
                cur.fail("max_steps must be at least 1", num)
            if seen_max:
                errors.append(ParseDiagnostic("duplicate-declaration", "max_steps given twice", cur.span(tok)))
            seen_max = True
            scenario.max_steps = int(num.text)
        elif cur.accept("ident", "guard"):
            event = cur.ident("event id")
            cur.expect("punct", ":", what="':'")
            values = []
            while True:
                word = cur.tok
                if word.kind != "ident" or word.text not in ("yes", "no"):
                    cur.fail("expected 'yes' or 'no'")
                cur.advance()
                values.append(word.text == "yes")
                if not cur.accept("punct", ","):
                    break
            if event.text in scenario.guards:
                errors.append(
                    ParseDiagnostic("duplicate-declaration", f"guards for {event.text!r} given twice", cur.span(event))
                )
            scenario.guards[event.text] = values
        elif cur.accept("ident", "keys"):
            event = cur.ident("event id")
            cur.expect("punct", ":", what="':'")
            keys = []
            while True:
                if cur.at("string"):
                    keys.append(cur.string())
                elif cur.at("ident") or cur.at("int"):
                    keys.append(cur.advance().text)
                else:
                    cur.fail("expected a key")
                if not cur.accept("punct", ","):
                    break
            if event.text in scenario.unique_keys:
                errors.append(
                    ParseDiagnostic("duplicate-declaration", f"keys for {event.text!r} given twice", cur.span(event))
                )
            scenario.unique_keys[event.text] = keys
        else:
            cur.fail("expected 'max_steps', 'guard' or 'keys'")
    if errors:
        raise ParseError(errors)
    return scenario


# -- canonical text -----------------------------------------------------------------


def _thimac_lines(model: StaticModel, tid: str, depth: int, out: list[str]) -> None:
    t = model.thimacs[tid]
    pad = "  " * depth
    kind = " object" if t.is_object else ""
    out.append(f"{pad}thimac {t.name}{kind} {{")
    if t.stages:
        out.append(f"{pad}  stages: {', '.join(s.value for s in t.stages)}")
    for child in model.children(tid):
        _thimac_lines(model, child.id, depth + 1, out)
    out.append(f"{pad}}}")


def _arc_line(keyword: str, arrow: str, arc, auto_id: str) -> str:
    prefix = "" if arc.id == auto_id else f"{arc.id}: "
    label = "" if arc.label is None else f" label {quote(arc.label)}"
    return f"{keyword} {prefix}{arc.source} {arrow} {arc.target}{label}"


def serialize(bundle: ModelBundle) -> str:
    """Canonical text: declaration order, two-space indent, one construct per line."""
    model = bundle.static
    blocks: list[list[str]] = []
    for root in model.roots():
        lines: list[str] = []
        _thimac_lines(model, root.id, 0, lines)
        blocks.append(lines)
    if model.flows:
        blocks.append(
            [_arc_line("flow", "->", a, f"f{i}") for i, a in enumerate(model.flows, 1)]
        )
    if model.triggers:
        blocks.append(
            [_arc_line("trigger", "=>", a, f"t{i}") for i, a in enumerate(model.triggers, 1)]
        )
    if bundle.events is not None:
        for ev in bundle.events.events:
            lines = [f"event {ev.id}{' unique' if ev.unique else ''} {{"]
            if ev.region:
                lines.append(f"  region: {', '.join(ev.region)}")
            lines.extend(f"  attach {part} -> {whole}" for part, whole in ev.attach)
            lines.extend(f"  detach {part}" for part in ev.detach)
            lines.append("}")
            blocks.append(lines)
    if bundle.behavior is not None:
        lines = ["behavior {"]
        if bundle.behavior.start is not None:
            lines.append(f"  start {bundle.behavior.start}")
        arrows = {Guard.ALWAYS: "->", Guard.YES: "-[yes]->", Guard.NO: "-[no]->"}
        lines.extend(
            f"  {e.source} {arrows[e.guard]} {e.target}" for e in bundle.behavior.edges
        )
        lines.append("}")
        blocks.append(lines)
    head = f"model {quote(model.name)}"
    return "\n\n".join(["\n".join(b) for b in [[head], *blocks]]) + "\n"


def _key_text(key: str) -> str:
    return key if IDENT_RE.match(key) or key.isdigit() else quote(key)


def serialize_scenario(scenario: Scenario) -> str:
    lines = [f"scenario {quote(scenario.name)} start {scenario.start}"]
    if scenario.max_steps != DEFAULT_MAX_STEPS:
        lines.append(f"max_steps {scenario.max_steps}")
    for event, values in scenario.guards.items():
        if values:
            lines.append(f"guard {event}: {', '.join('yes' if v else 'no' for v in values)}")
    for event, keys in scenario.unique_keys.items():
        if keys:
            lines.append(f"keys {event}: {', '.join(_key_text(k) for k in keys)}")
    return "\n".join(lines) + "\n"
