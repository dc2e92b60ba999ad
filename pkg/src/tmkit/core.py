"""In-memory metamodel for static thinging-machine models.

A static model is a forest of thimacs.  Each thimac has a machine side,
the set of stages it declares, and the arcs drawn between stages: solid
flow arcs that move things, dashed trigger arcs that start a new flow.
Thimacs are addressed by slash paths from a root (``Mug/Handle``); the
path doubles as the thimac id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*\Z")


class ModelError(Exception):
    """Raised when a construction operation would break a model invariant."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class StageKind(str, Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"

    def __str__(self) -> str:
        return self.value


class ThimacKind(str, Enum):
    GENERIC = "generic"
    OBJECT = "object"

    def __str__(self) -> str:
        return self.value


# Legal flow successors inside one machine.  Across machines only
# transfer -> transfer is legal.  Triggers are unrestricted apart from
# exact self-loops.
_INTRA_FLOW = frozenset(
    {
        (StageKind.TRANSFER, StageKind.RECEIVE),
        (StageKind.RECEIVE, StageKind.PROCESS),
        (StageKind.RECEIVE, StageKind.RELEASE),
        (StageKind.PROCESS, StageKind.RELEASE),
        (StageKind.PROCESS, StageKind.CREATE),
        (StageKind.CREATE, StageKind.PROCESS),
        (StageKind.CREATE, StageKind.RELEASE),
        (StageKind.RELEASE, StageKind.TRANSFER),
    }
)
_CROSS_FLOW = frozenset({(StageKind.TRANSFER, StageKind.TRANSFER)})


def stage_adjacency(source: StageKind, same_machine: bool, target: StageKind) -> bool:
    """Return True when a flow ``source -> target`` is a legal stage succession."""
    table = _INTRA_FLOW if same_machine else _CROSS_FLOW
    return (StageKind(source), StageKind(target)) in table


class StageRef(NamedTuple):
    thimac: str
    stage: StageKind

    def __str__(self) -> str:
        return f"{self.thimac}.{self.stage.value}"

    @classmethod
    def parse(cls, text: str) -> StageRef:
        path, _, stage = text.rpartition(".")
        if not path:
            raise ValueError(f"not a stage reference: {text!r}")
        return cls(path, StageKind(stage))


@dataclass
class Thimac:
    id: str
    name: str
    kind: ThimacKind = ThimacKind.GENERIC
    parent: str | None = None
    stages: list[StageKind] = field(default_factory=list)

    @property
    def is_object(self) -> bool:
        return self.kind is ThimacKind.OBJECT


@dataclass(frozen=True)
class Arc:
    id: str
    source: StageRef
    target: StageRef
    label: str | None = None

    @property
    def same_machine(self) -> bool:
        return self.source.thimac == self.target.thimac


class FlowArc(Arc):
    """Solid arrow: a thing moving from one stage to the next."""


class TriggerArc(Arc):
    """Dashed arrow: one stage starting a flow elsewhere."""


def _ref(ref: tuple[str, StageKind | str]) -> StageRef:
    return StageRef(ref[0], StageKind(ref[1]))


def path_join(parent: str | None, name: str) -> str:
    return name if parent is None else f"{parent}/{name}"


class StaticModel:
    """A mutable-while-building static model.

    Thimacs are kept in insertion order; flows and triggers in declaration
    order.  Equality is structural: the containment forest in preorder with
    siblings in insertion order, then the arc lists.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.thimacs: dict[str, Thimac] = {}
        self.flows: list[FlowArc] = []
        self.triggers: list[TriggerArc] = []

    def __repr__(self) -> str:
        return (
            f"StaticModel({self.name!r}, thimacs={len(self.thimacs)}, "
            f"flows={len(self.flows)}, triggers={len(self.triggers)})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StaticModel):
            return NotImplemented
        return (
            self.name == other.name
            and list(self.preorder()) == list(other.preorder())
            and self.flows == other.flows
            and self.triggers == other.triggers
        )

    # -- construction -----------------------------------------------------

    def add_thimac(
        self,
        name: str,
        parent: str | None = None,
        kind: ThimacKind | str = ThimacKind.GENERIC,
    ) -> str:
        if not isinstance(name, str) or not IDENT_RE.match(name):
            raise ModelError("invalid-name", f"thimac name {name!r} is not an identifier")
        if parent is not None and parent not in self.thimacs:
            raise ModelError("unknown-parent", f"parent thimac {parent!r} does not exist")
        tid = path_join(parent, name)
        if tid in self.thimacs:
            raise ModelError(
                "duplicate-sibling-name",
                f"{name!r} already exists under {parent or 'the model root'}",
            )
        if parent is None and self.arc(tid) is not None:
            raise ModelError("name-clash", f"root thimac {name!r} clashes with an arc id")
        self.thimacs[tid] = Thimac(tid, name, ThimacKind(kind), parent)
        return tid

    def add_stage(self, thimac: str, stage: StageKind | str) -> None:
        t = self._thimac(thimac)
        kind = StageKind(stage)
        if kind in t.stages:
            raise ModelError("duplicate-stage", f"{thimac} already declares {kind.value}")
        t.stages.append(kind)

    def add_flow(
        self,
        source: StageRef,
        target: StageRef,
        label: str | None = None,
        id: str | None = None,
    ) -> str:
        self._resolve(source)
        self._resolve(target)
        if _ref(source) == _ref(target):
            raise ModelError("self-loop", f"flow from {source} to itself")
        arc_id = self._new_arc_id(id, "f", len(self.flows) + 1)
        self.flows.append(FlowArc(arc_id, _ref(source), _ref(target), label))
        return arc_id

    def add_trigger(
        self,
        source: StageRef,
        target: StageRef,
        label: str | None = None,
        id: str | None = None,
    ) -> str:
        self._resolve(source)
        self._resolve(target)
        if _ref(source) == _ref(target):
            raise ModelError("self-loop", f"trigger from {source} to itself")
        arc_id = self._new_arc_id(id, "t", len(self.triggers) + 1)
        self.triggers.append(TriggerArc(arc_id, _ref(source), _ref(target), label))
        return arc_id

    def _new_arc_id(self, requested: str | None, prefix: str, position: int) -> str:
        arc_id = requested if requested is not None else f"{prefix}{position}"
        if not IDENT_RE.match(arc_id):
            raise ModelError("invalid-name", f"arc id {arc_id!r} is not an identifier")
        if self.arc(arc_id) is not None:
            raise ModelError("duplicate-arc-id", f"arc id {arc_id!r} is already in use")
        if arc_id in self.thimacs:
            raise ModelError("name-clash", f"arc id {arc_id!r} clashes with a root thimac")
        return arc_id

    def _thimac(self, tid: str) -> Thimac:
        try:
            return self.thimacs[tid]
        except KeyError:
            raise ModelError("unknown-thimac", f"thimac {tid!r} does not exist") from None

    def _resolve(self, ref: StageRef) -> None:
        t = self.thimacs.get(ref[0])
        if t is None or StageKind(ref[1]) not in t.stages:
            raise ModelError("unresolved-stage-ref", f"stage {ref[0]}.{ref[1]} is not declared")

    # -- queries ------------------------------------------------------------

    @property
    def arcs(self) -> list[Arc]:
        return [*self.flows, *self.triggers]

    def arc(self, arc_id: str) -> Arc | None:
        for a in self.flows:
            if a.id == arc_id:
                return a
        for a in self.triggers:
            if a.id == arc_id:
                return a
        return None

    def has_stage(self, ref: StageRef) -> bool:
        t = self.thimacs.get(ref.thimac)
        return t is not None and ref.stage in t.stages

    def roots(self) -> list[Thimac]:
        return [t for t in self.thimacs.values() if t.parent is None]

    def children(self, tid: str | None) -> list[Thimac]:
        return [t for t in self.thimacs.values() if t.parent == tid]

    def preorder(self) -> Iterator[Thimac]:
        """Yield thimacs depth first, siblings in insertion order."""
        kids: dict[str | None, list[Thimac]] = {}
        for t in self.thimacs.values():
            kids.setdefault(t.parent, []).append(t)
        seen: set[str] = set()
        stack = list(reversed(kids.get(None, [])))
        while stack:
            t = stack.pop()
            if t.id in seen:
                continue
            seen.add(t.id)
            yield t
            stack.extend(reversed(kids.get(t.id, [])))

    def descendants(self, tid: str) -> set[str]:
        self._thimac(tid)
        kids: dict[str | None, list[str]] = {}
        for t in self.thimacs.values():
            kids.setdefault(t.parent, []).append(t.id)
        found: set[str] = set()
        frontier = [tid]
        while frontier:
            for child in kids.get(frontier.pop(), ()):
                if child not in found and child != tid:
                    found.add(child)
                    frontier.append(child)
        return found

    def ancestors(self, tid: str) -> list[str]:
        """Parent chain of ``tid``, nearest first; stops on a cycle."""
        chain: list[str] = []
        seen = {tid}
        t = self.thimacs.get(tid)
        while t is not None and t.parent is not None and t.parent not in seen:
            chain.append(t.parent)
            seen.add(t.parent)
            t = self.thimacs.get(t.parent)
        return chain

    def stage_refs(self) -> list[StageRef]:
        return [StageRef(t.id, s) for t in self.preorder() for s in t.stages]

    def elements(self) -> list[str]:
        """Every referenceable element: thimac paths, stage refs, arc ids."""
        out: list[str] = []
        for t in self.preorder():
            out.append(t.id)
            out.extend(f"{t.id}.{s.value}" for s in t.stages)
        out.extend(a.id for a in self.arcs)
        return out

    def classify(self, ref: str) -> str | None:
        """Return ``"thimac"``, ``"stage"``, ``"arc"`` or None for an element ref."""
        if ref in self.thimacs:
            return "thimac"
        if self.arc(ref) is not None:
            return "arc"
        try:
            sref = StageRef.parse(ref)
        except ValueError:
            return None
        return "stage" if self.has_stage(sref) else None
