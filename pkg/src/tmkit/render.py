"""DOT output for the three description levels.

Stages become nodes named ``"<path>__<stage>"``; thimacs become nested
``cluster_<path>`` subgraphs.  Object thimacs get a doubled border,
flows are solid and triggers dashed.  Everything is emitted in
declaration order so identical input yields identical bytes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .core import StageRef, StaticModel
from .levels import Guard, ModelBundle

HIGHLIGHT_FILL = "#ffe08a"


class Level(str, Enum):
    STATIC = "static"
    EVENTS = "events"
    BEHAVIOR = "behavior"

    def __str__(self) -> str:
        return self.value


class RenderError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class RenderOptions:
    level: Level = Level.STATIC
    highlight: str | None = None
    rankdir: str = "LR"
    # behavior level only: keep the events reachable from this one
    focus: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "level", Level(self.level))
        if self.rankdir not in ("LR", "TB"):
            raise ValueError(f"rankdir must be LR or TB, got {self.rankdir!r}")
        if self.highlight is not None and self.level is not Level.EVENTS:
            raise ValueError("highlight is only valid for the events level")
        if self.focus is not None and self.level is not Level.BEHAVIOR:
            raise ValueError("focus is only valid for the behavior level")


def dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def stage_node(ref: StageRef) -> str:
    return dot_id(f"{ref.thimac}__{ref.stage.value}")


def _attrs(pairs: list[tuple[str, str]]) -> str:
    return "[" + ", ".join(f"{k}={dot_id(v)}" for k, v in pairs) + "]" if pairs else ""


def _header(name: str, opts: RenderOptions) -> list[str]:
    return [
        f"digraph {dot_id(name)} {{",
        f"  rankdir={opts.rankdir};",
        "  compound=true;",
        "  node [shape=box, fontname=\"Helvetica\"];",
    ]


def _memberships(bundle: ModelBundle) -> dict[str, list[str]]:
    """element ref -> ids of the events whose region lists it."""
    out: dict[str, list[str]] = {}
    if bundle.events is not None:
        for ev in bundle.events.events:
            for ref in ev.region:
                out.setdefault(ref, [])
                if ev.id not in out[ref]:
                    out[ref].append(ev.id)
    return out


def _decor(ref: str, members: dict[str, list[str]], highlight: str | None) -> list[tuple[str, str]]:
    events = members.get(ref)
    if not events:
        return []
    classes = [f"ev-{e}" for e in events]
    pairs = []
    if highlight is not None and highlight in events:
        classes.append("highlight")
    pairs.append(("class", " ".join(classes)))
    if "highlight" in classes:
        pairs.append(("style", "filled"))
        pairs.append(("fillcolor", HIGHLIGHT_FILL))
    return pairs


def _cluster(
    model: StaticModel,
    tid: str,
    depth: int,
    members: dict[str, list[str]],
    highlight: str | None,
    out: list[str],
) -> None:
    t = model.thimacs[tid]
    pad = "  " * depth
    out.append(f"{pad}subgraph {dot_id('cluster_' + tid)} {{")
    out.append(f"{pad}  label={dot_id(t.name)};")
    if t.is_object:
        out.append(f"{pad}  peripheries=2;")
    for key, value in _decor(tid, members, highlight):
        out.append(f"{pad}  {key}={dot_id(value)};")
    for stage in t.stages:
        ref = StageRef(tid, stage)
        attrs = [("label", stage.value), *_decor(str(ref), members, highlight)]
        out.append(f"{pad}  {stage_node(ref)} {_attrs(attrs)};")
    for child in model.children(tid):
        _cluster(model, child.id, depth + 1, members, highlight, out)
    out.append(f"{pad}}}")


def _static_body(bundle: ModelBundle, members: dict[str, list[str]], highlight: str | None) -> list[str]:
    model = bundle.static
    out: list[str] = []
    for root in model.roots():
        _cluster(model, root.id, 1, members, highlight, out)
    dashed = {a.id for a in model.triggers}
    for arc in model.arcs:
        attrs = [("id", arc.id)]
        if arc.id in dashed:
            attrs.append(("style", "dashed"))
        if arc.label is not None:
            attrs.append(("label", arc.label))
        # edges take the class tag; the shade becomes a pen colour
        decor = dict(_decor(arc.id, members, highlight))
        if "class" in decor:
            attrs.append(("class", decor["class"]))
        if "fillcolor" in decor:
            attrs.append(("color", decor["fillcolor"]))
        out.append(f"  {stage_node(arc.source)} -> {stage_node(arc.target)} {_attrs(attrs)};")
    return out


def render_static(bundle: ModelBundle, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions()
    lines = _header(bundle.static.name, opts) + _static_body(bundle, {}, None)
    return "\n".join(lines + ["}"]) + "\n"


def render_events(bundle: ModelBundle, opts: RenderOptions | None = None) -> str:
    """Static diagram with every region member tagged ``class="ev-<id> ..."``."""
    opts = opts or RenderOptions(level=Level.EVENTS)
    if opts.highlight is not None and (bundle.events is None or bundle.event(opts.highlight) is None):
        raise RenderError("highlight-unknown-event", f"no event {opts.highlight!r} to highlight")
    members = _memberships(bundle)
    lines = _header(bundle.static.name, opts) + _static_body(bundle, members, opts.highlight)
    return "\n".join(lines + ["}"]) + "\n"


def _reachable(bundle: ModelBundle, root: str) -> set[str]:
    edges = bundle.behavior.edges if bundle.behavior else []
    seen = {root}
    queue = deque([root])
    while queue:
        current = queue.popleft()
        for e in edges:
            if e.source == current and e.target not in seen:
                seen.add(e.target)
                queue.append(e.target)
    return seen


def render_behavior(bundle: ModelBundle, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions(level=Level.BEHAVIOR)
    behavior = bundle.behavior
    ids = bundle.events.ids if bundle.events else []
    edges = behavior.edges if behavior else []
    start = behavior.start if behavior else None
    if opts.focus is not None:
        if opts.focus not in ids:
            raise RenderError("focus-unknown-event", f"no event {opts.focus!r} to focus on")
        keep = _reachable(bundle, opts.focus)
        ids = [i for i in ids if i in keep]
        edges = [e for e in edges if e.source in keep and e.target in keep]
        start = opts.focus
    lines = _header(bundle.static.name, opts)
    for eid in ids:
        attrs = [("label", eid)]
        if eid == start:
            attrs.append(("peripheries", "2"))
        lines.append(f"  {dot_id(eid)} {_attrs(attrs)};")
    for e in edges:
        attrs = [] if e.guard is Guard.ALWAYS else [("label", e.guard.value)]
        suffix = f" {_attrs(attrs)}" if attrs else ""
        lines.append(f"  {dot_id(e.source)} -> {dot_id(e.target)}{suffix};")
    return "\n".join(lines + ["}"]) + "\n"


def render(bundle: ModelBundle, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions()
    return {
        Level.STATIC: render_static,
        Level.EVENTS: render_events,
        Level.BEHAVIOR: render_behavior,
    }[opts.level](bundle, opts)
