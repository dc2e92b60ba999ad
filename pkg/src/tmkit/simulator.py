"""Deterministic, scenario-driven execution of a behavior model.

Each firing of an event applies its region to the token state in a fixed
order:

1. every ``X.create`` stage in the region spawns a token of type ``X``
   located at ``X``;
2. every ``detach`` annotation frees the latest token of that part type;
3. every cross-machine flow arc in the region moves one free token from
   the source thimac to the target thimac (the release/transfer/receive
   chain collapses into that single move);
4. every ``attach part -> whole`` annotation binds the latest part token
   to the latest whole token and co-locates the part with the whole.

Guard outcomes and uniqueness keys come from the scenario, in order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

from .core import StageKind, StageRef
from .dsl import Scenario
from .levels import Guard, ModelBundle


class SimulationError(Exception):
    def __init__(self, code: str, subject: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.subject = subject
        self.message = message
        self.trace: SimulationTrace | None = None

    def __str__(self) -> str:
        return f"{self.code} error {self.subject}: {self.message}"


class Outcome(str, Enum):
    EXECUTED = "executed"
    SKIPPED_UNIQUE = "skipped-unique"
    HALTED_MAX_STEPS = "halted-max-steps"

    def __str__(self) -> str:
        return self.value


@dataclass
class Token:
    id: str
    type: str
    location: str
    attached_to: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "type": self.type, "location": self.location, "attached_to": self.attached_to}


@dataclass(frozen=True)
class FiringRecord:
    step: int
    event: str
    outcome: Outcome
    key: str | None = None
    guard_value: bool | None = None

    def to_dict(self) -> dict:
        d: dict = {"step": self.step, "event": self.event, "outcome": self.outcome.value}
        if self.key is not None:
            d["key"] = self.key
        if self.guard_value is not None:
            d["guard"] = self.guard_value
        return d


@dataclass
class SimulationTrace:
    scenario: str
    records: list[FiringRecord] = field(default_factory=list)
    final_tokens: list[Token] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "records": [r.to_dict() for r in self.records],
            "final_tokens": [t.to_dict() for t in self.final_tokens],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_table(self) -> str:
        """Plain-text table: instance, entity, occurrence, note."""
        rows = [("step", "instance", "entity", "occurrence", "note")]
        attempts: dict[str, int] = {}
        first_seen: dict[tuple[str, str], int] = {}
        for r in self.records:
            attempts[r.event] = attempts.get(r.event, 0) + 1
            note = ""
            if r.outcome is Outcome.SKIPPED_UNIQUE:
                earlier = first_seen.get((r.event, r.key))
                note = f"Not executed because {r.key} already occurred in {r.event}"
                if earlier is not None:
                    note += f" (step {earlier})"
            elif r.outcome is Outcome.HALTED_MAX_STEPS:
                note = "Not executed: step limit reached"
            elif r.key is not None:
                first_seen.setdefault((r.event, r.key), r.step)
            if r.guard_value is not None:
                verdict = f"guard {'yes' if r.guard_value else 'no'}"
                note = f"{note}; {verdict}" if note else verdict
            rows.append(
                (str(r.step), r.key or "-", r.event, f"{r.event}_{attempts[r.event]}", note)
            )
        widths = [max(len(row[i]) for row in rows) for i in range(5)]
        return "".join(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() + "\n"
            for row in rows
        )


class SimState:
    """Token population of one run.  Owned by a single run; not thread-safe."""

    def __init__(self, places: set[str] | None = None):
        self.places = places
        self.tokens: dict[str, Token] = {}
        self._activity: dict[str, int] = {}
        self._clock = 0

    def _touch(self, token_id: str) -> None:
        self._clock += 1
        self._activity[token_id] = self._clock

    def token(self, token_id: str) -> Token:
        try:
            return self.tokens[token_id]
        except KeyError:
            raise SimulationError("unknown-token", token_id, f"no token {token_id!r}") from None

    def spawn(self, type_path: str) -> Token:
        tok = Token(f"tok{len(self.tokens) + 1}", type_path, type_path)
        self.tokens[tok.id] = tok
        self._touch(tok.id)
        return tok

    def attachments(self, token_id: str) -> list[Token]:
        """Tokens transitively attached to ``token_id``."""
        out: list[Token] = []
        frontier = [token_id]
        while frontier:
            whole = frontier.pop()
            for t in self.tokens.values():
                if t.attached_to == whole and t not in out:
                    out.append(t)
                    frontier.append(t.id)
        return out

    def move_token(self, token_id: str, destination: str) -> None:
        tok = self.token(token_id)
        if self.places is not None and destination not in self.places:
            raise SimulationError(
                "unknown-destination", destination, f"thimac {destination!r} does not exist"
            )
        if tok.attached_to is not None:
            raise SimulationError(
                "attached-part",
                token_id,
                f"{token_id} is attached to {tok.attached_to} and moves only with its whole",
            )
        tok.location = destination
        self._touch(tok.id)
        for part in self.attachments(token_id):
            part.location = destination

    def detach_token(self, part_id: str) -> None:
        tok = self.token(part_id)
        if tok.attached_to is None:
            raise SimulationError("not-attached", part_id, f"{part_id} is not attached to a whole")
        tok.attached_to = None
        self._touch(tok.id)

    def attach_token(self, part_id: str, whole_id: str) -> None:
        part, whole = self.token(part_id), self.token(whole_id)
        if part_id == whole_id or part in self.attachments(whole_id) or whole in self.attachments(part_id):
            raise SimulationError(
                "attach-cycle", part_id, f"attaching {part_id} to {whole_id} would form a cycle"
            )
        part.attached_to = whole.id
        self._touch(part.id)
        for t in (part, *self.attachments(part.id)):
            t.location = whole.location

    def latest(self, type_path: str) -> Token | None:
        found = [t for t in self.tokens.values() if t.type == type_path]
        return max(found, key=lambda t: self._activity[t.id]) if found else None

    def free_token_at(self, place: str, label: str | None) -> Token | None:
        found = [
            t
            for t in self.tokens.values()
            if t.location == place
            and t.attached_to is None
            and (label is None or label in (t.type, t.type.rsplit("/", 1)[-1]))
        ]
        return max(found, key=lambda t: self._activity[t.id]) if found else None

    def snapshot(self) -> list[Token]:
        return [replace(t) for t in self.tokens.values()]


class Simulator:
    """One run of ``scenario`` over ``bundle``.

    After :meth:`run`, ``state`` holds the final token population and
    ``history`` a token snapshot taken after every record.
    """

    def __init__(self, bundle: ModelBundle, scenario: Scenario):
        self.bundle = bundle
        self.scenario = scenario
        self.state = SimState(set(bundle.static.thimacs))
        self.history: list[list[Token]] = []

    def _fail(self, trace: SimulationTrace, code: str, subject: str, message: str):
        err = SimulationError(code, subject, message)
        trace.final_tokens = self.state.snapshot()
        err.trace = trace
        raise err

    def run(self) -> SimulationTrace:
        bundle, scenario = self.bundle, self.scenario
        trace = SimulationTrace(scenario.name)
        events = {e.id: e for e in bundle.events.events} if bundle.events else {}
        if scenario.start not in events:
            self._fail(trace, "start-missing", scenario.start, f"start event {scenario.start!r} is not declared")
        for eid in [*scenario.guards, *scenario.unique_keys]:
            if eid not in events:
                self._fail(trace, "unknown-event", eid, f"scenario scripts undeclared event {eid!r}")
        behavior = bundle.behavior
        keys = {k: list(v) for k, v in scenario.unique_keys.items()}
        guards = {k: list(v) for k, v in scenario.guards.items()}
        seen_keys: dict[str, set[str]] = {}

        current: str | None = scenario.start
        while current is not None:
            step = len(trace.records) + 1
            if step >= scenario.max_steps and scenario.max_steps > 0:
                trace.records.append(FiringRecord(step, current, Outcome.HALTED_MAX_STEPS))
                self.history.append(self.state.snapshot())
                break
            event = events[current]
            succ = behavior.successors(current) if behavior else {}

            key = None
            if event.unique:
                queue = keys.get(current)
                if not queue:
                    self._fail(trace, "unique-keys-exhausted", current, f"no uniqueness key left for {current}")
                key = queue.pop(0)
                seen = seen_keys.setdefault(current, set())
                if key in seen:
                    trace.records.append(FiringRecord(step, current, Outcome.SKIPPED_UNIQUE, key))
                    self.history.append(self.state.snapshot())
                    current = succ.get(Guard.ALWAYS)
                    continue
                seen.add(key)

            guard = None
            if Guard.YES in succ or Guard.NO in succ:
                queue = guards.get(current)
                if not queue:
                    self._fail(trace, "guard-script-exhausted", current, f"no scripted guard outcome left for {current}")
                guard = queue.pop(0)
                branch = succ.get(Guard.YES if guard else Guard.NO)
                nxt = branch if branch is not None else succ.get(Guard.ALWAYS)
            else:
                nxt = succ.get(Guard.ALWAYS)

            try:
                self._apply(current)
            except SimulationError as exc:
                self._fail(trace, exc.code, exc.subject, f"in event {current}: {exc.message}")
            trace.records.append(FiringRecord(step, current, Outcome.EXECUTED, key, guard))
            self.history.append(self.state.snapshot())
            current = nxt

        trace.final_tokens = self.state.snapshot()
        return trace

    def _apply(self, event_id: str) -> None:
        model = self.bundle.static
        event = self.bundle.event(event_id)
        state = self.state
        kinds = {ref: model.classify(ref) for ref in event.region}
        for ref, kind in kinds.items():
            if kind == "stage":
                sref = StageRef.parse(ref)
                if sref.stage is StageKind.CREATE:
                    state.spawn(sref.thimac)
        for part in event.detach:
            tok = state.latest(part)
            if tok is None:
                raise SimulationError("no-token", part, f"no {part} token to detach")
            state.detach_token(tok.id)
        for ref, kind in kinds.items():
            if kind != "arc":
                continue
            arc = model.arc(ref)
            if arc in model.flows and not arc.same_machine:
                tok = state.free_token_at(arc.source.thimac, arc.label)
                if tok is not None:
                    state.move_token(tok.id, arc.target.thimac)
        for part, whole in event.attach:
            p, w = state.latest(part), state.latest(whole)
            if p is None or w is None:
                missing = part if p is None else whole
                raise SimulationError("no-token", missing, f"no {missing} token to attach")
            state.attach_token(p.id, w.id)


def simulate(bundle: ModelBundle, scenario: Scenario) -> SimulationTrace:
    return Simulator(bundle, scenario).run()
