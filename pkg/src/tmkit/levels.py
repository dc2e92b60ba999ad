"""Events and behavior levels over a static model, and their checks W7-W10."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .core import StageKind, StageRef, StaticModel
from .validator import Diagnostic, Severity, sort_diagnostics, validate_static


@dataclass(frozen=True)
class SourceSpan:
    line: int = 1
    column: int = 1

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError(f"span must be 1-based, got {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass
class Event:
    """A region of the static model paired with (logical) time.

    ``attach`` holds ``(part, whole)`` thimac-path pairs and ``detach`` part
    paths; the simulator applies them when the event fires.
    """

    id: str
    region: list[str] = field(default_factory=list)
    unique: bool = False
    attach: list[tuple[str, str]] = field(default_factory=list)
    detach: list[str] = field(default_factory=list)
    span: SourceSpan = field(default_factory=SourceSpan, compare=False, repr=False)


@dataclass
class EventsModel:
    events: list[Event] = field(default_factory=list)

    def get(self, event_id: str) -> Event | None:
        for e in self.events:
            if e.id == event_id:
                return e
        return None

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.events]


class Guard(str, Enum):
    ALWAYS = "unconditional"
    YES = "yes"
    NO = "no"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BehaviorEdge:
    source: str
    target: str
    guard: Guard = Guard.ALWAYS


@dataclass
class BehaviorModel:
    edges: list[BehaviorEdge] = field(default_factory=list)
    start: str | None = None

    def successors(self, event_id: str) -> dict[Guard, str]:
        """First declared successor per guard kind."""
        out: dict[Guard, str] = {}
        for e in self.edges:
            if e.source == event_id:
                out.setdefault(e.guard, e.target)
        return out


@dataclass
class ModelBundle:
    static: StaticModel
    events: EventsModel | None = None
    behavior: BehaviorModel | None = None

    def event(self, event_id: str) -> Event | None:
        return self.events.get(event_id) if self.events else None


def region_union(bundle: ModelBundle) -> set[str]:
    if bundle.events is None:
        return set()
    return {ref for e in bundle.events.events for ref in e.region}


def _neighbours(model: StaticModel, refs: list[str]) -> dict[str, set[str]]:
    """Adjacency among region members: containment, stage membership, arc incidence."""
    present = set(refs)
    adj: dict[str, set[str]] = {r: set() for r in refs}

    def link(a: str, b: str) -> None:
        if a in present and b in present and a != b:
            adj[a].add(b)
            adj[b].add(a)

    for r in refs:
        kind = model.classify(r)
        if kind == "thimac":
            for anc in model.ancestors(r):
                link(r, anc)
        elif kind == "stage":
            link(r, StageRef.parse(r).thimac)
        elif kind == "arc":
            arc = model.arc(r)
            link(r, str(arc.source))
            link(r, str(arc.target))
    return adj


def _connected(adj: dict[str, set[str]]) -> bool:
    if not adj:
        return True
    start = next(iter(adj))
    seen = {start}
    queue = deque([start])
    while queue:
        for n in adj[queue.popleft()]:
            if n not in seen:
                seen.add(n)
                queue.append(n)
    return len(seen) == len(adj)


def check_events(bundle: ModelBundle) -> list[Diagnostic]:
    if bundle.events is None:
        return []
    model = bundle.static
    out: list[Diagnostic] = []
    for ev in bundle.events.events:
        if not ev.region:
            out.append(Diagnostic("W7", Severity.ERROR, ev.id, "event has an empty region"))
            continue
        dangling = [r for r in ev.region if model.classify(r) is None]
        for r in dangling:
            out.append(
                Diagnostic("W7", Severity.ERROR, ev.id, f"region element {r!r} does not resolve")
            )
        # connectivity is meaningless while members are missing
        if not dangling and not _connected(_neighbours(model, ev.region)):
            out.append(
                Diagnostic("W8", Severity.ERROR, ev.id, "region is not a connected subdiagram")
            )
    covered = region_union(bundle)
    for element in model.elements():
        if element not in covered:
            out.append(
                Diagnostic("W9", Severity.WARNING, element, "not covered by any event region")
            )
    return sort_diagnostics(out)


def check_behavior(bundle: ModelBundle) -> list[Diagnostic]:
    behavior = bundle.behavior
    if behavior is None:
        return []
    declared = bundle.events.ids if bundle.events else []
    known = set(declared)
    out: list[Diagnostic] = []

    def w10(subject: str, message: str) -> None:
        out.append(Diagnostic("W10", Severity.ERROR, subject, message))

    for edge in behavior.edges:
        for end in (edge.source, edge.target):
            if end not in known:
                w10(end, f"edge {edge.source} -> {edge.target} uses undeclared event {end!r}")

    counts: dict[tuple[str, Guard], int] = {}
    for edge in behavior.edges:
        counts[edge.source, edge.guard] = counts.get((edge.source, edge.guard), 0) + 1
    for (source, guard), n in counts.items():
        if n > 1 and source in known:
            w10(source, f"{n} {guard.value} successors; at most one is allowed")

    guarded = []
    for edge in behavior.edges:
        if edge.guard is not Guard.ALWAYS and edge.source in known and edge.source not in guarded:
            guarded.append(edge.source)
    for source in guarded:
        ev = bundle.event(source)
        has_process = any(
            bundle.static.classify(r) == "stage" and StageRef.parse(r).stage is StageKind.PROCESS
            for r in ev.region
        )
        if not has_process:
            w10(source, "guarded branch from an event whose region has no process stage")

    if behavior.start is not None:
        if behavior.start not in known:
            w10(behavior.start, "start event is not declared")
        else:
            reached = {behavior.start}
            queue = deque([behavior.start])
            while queue:
                current = queue.popleft()
                for edge in behavior.edges:
                    if edge.source == current and edge.target in known and edge.target not in reached:
                        reached.add(edge.target)
                        queue.append(edge.target)
            for eid in declared:
                if eid not in reached:
                    w10(eid, f"not reachable from start event {behavior.start}")
    return sort_diagnostics(out)


def check_bundle(bundle: ModelBundle, strict: bool = False) -> list[Diagnostic]:
    """All three levels; ``strict`` promotes coverage warnings to errors."""
    diags = [*validate_static(bundle.static), *check_events(bundle), *check_behavior(bundle)]
    if strict:
        diags = [
            Diagnostic(d.rule, Severity.ERROR, d.subject, d.message) if d.rule == "W9" else d
            for d in diags
        ]
    return sort_diagnostics(diags)
