"""Static well-formedness rules W1-W6.

W1  intra-machine flows follow the stage-adjacency table
W2  cross-machine flows are transfer -> transfer
W3  no trigger loops back onto its own stage
W4  reserved, never reported
W5  containment is a forest with unique sibling names
W6  parts of an object thimac reach the outside only through the whole
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable

from .core import StaticModel, stage_adjacency

RULES = ("W1", "W2", "W3", "W4", "W5", "W6", "W7", "W8", "W9", "W10")


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: Severity
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule} {self.severity.value} {self.subject}: {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def to_dict(self) -> dict[str, str]:
        d = asdict(self)
        d["severity"] = self.severity.value
        return d


def _rule_number(rule: str) -> int:
    m = re.match(r"W(\d+)\Z", rule)
    return int(m.group(1)) if m else len(RULES) + 1


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Order by rule number, then subject; ties keep discovery order."""
    return sorted(diags, key=lambda d: (_rule_number(d.rule), d.rule, d.subject))


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


def format_text(diags: Iterable[Diagnostic]) -> str:
    return "".join(f"{d}\n" for d in diags)


def format_json(diags: Iterable[Diagnostic]) -> str:
    return json.dumps([d.to_dict() for d in diags], indent=2, ensure_ascii=False) + "\n"


def _error(rule: str, subject: str, message: str) -> Diagnostic:
    return Diagnostic(rule, Severity.ERROR, subject, message)


def _check_flows(model: StaticModel) -> list[Diagnostic]:
    out = []
    for arc in model.flows:
        src, dst = arc.source, arc.target
        if not (model.has_stage(src) and model.has_stage(dst)):
            out.append(_error("W1", arc.id, f"flow {src} -> {dst} references an undeclared stage"))
        elif arc.same_machine:
            if not stage_adjacency(src.stage, True, dst.stage):
                out.append(
                    _error(
                        "W1",
                        arc.id,
                        f"{src.stage.value} -> {dst.stage.value} is not a legal "
                        f"succession inside {src.thimac}",
                    )
                )
        elif not stage_adjacency(src.stage, False, dst.stage):
            out.append(
                _error(
                    "W2",
                    arc.id,
                    f"flow between machines {src.thimac} and {dst.thimac} must be "
                    f"transfer -> transfer, got {src.stage.value} -> {dst.stage.value}",
                )
            )
    return out


def _check_triggers(model: StaticModel) -> list[Diagnostic]:
    return [
        _error("W3", arc.id, f"trigger {arc.source} loops back onto itself")
        for arc in model.triggers
        if arc.source == arc.target
    ]


def _check_forest(model: StaticModel) -> list[Diagnostic]:
    out = []
    seen_names: dict[tuple[str | None, str], str] = {}
    for t in model.thimacs.values():
        if t.parent is not None and t.parent not in model.thimacs:
            out.append(_error("W5", t.id, f"parent {t.parent!r} does not exist"))
        key = (t.parent, t.name)
        if key in seen_names:
            out.append(
                _error("W5", t.id, f"sibling name {t.name!r} already used by {seen_names[key]}")
            )
        else:
            seen_names[key] = t.id
    # a thimac is on a cycle when walking its parent chain returns to it
    for t in model.thimacs.values():
        current, steps = t.parent, 0
        while current is not None and steps <= len(model.thimacs):
            if current == t.id:
                out.append(_error("W5", t.id, "containment links form a cycle"))
                break
            parent = model.thimacs.get(current)
            current = parent.parent if parent else None
            steps += 1
    return out


def _check_encapsulation(model: StaticModel) -> list[Diagnostic]:
    objects = [t.id for t in model.preorder() if t.is_object]
    if not objects:
        return []
    subtree = {o: model.descendants(o) for o in objects}
    out = []
    for arc in model.arcs:
        a, b = arc.source.thimac, arc.target.thimac
        for o in reversed(objects):  # innermost whole first
            inner = subtree[o]
            inside_a = a == o or a in inner
            inside_b = b == o or b in inner
            if (a in inner and not inside_b) or (b in inner and not inside_a):
                part = a if a in inner else b
                out.append(
                    _error(
                        "W6",
                        arc.id,
                        f"{part} is part of object thimac {o} but {arc.source} -> "
                        f"{arc.target} bypasses the whole",
                    )
                )
                break
    return out


def validate_static(model: StaticModel) -> list[Diagnostic]:
    diags = [
        *_check_flows(model),
        *_check_triggers(model),
        *_check_forest(model),
        *_check_encapsulation(model),
    ]
    return sort_diagnostics(diags)

