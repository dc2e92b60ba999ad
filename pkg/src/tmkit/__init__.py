"""Toolkit for thinging-machine conceptual models: parse, validate, simulate, render."""

from .core import (
    Arc,
    FlowArc,
    ModelError,
    StageKind,
    StageRef,
    StaticModel,
    Thimac,
    ThimacKind,
    TriggerArc,
    stage_adjacency,
)
from .dsl import ParseDiagnostic, ParseError, Scenario, parse, parse_scenario, serialize, serialize_scenario
from .levels import (
    BehaviorEdge,
    BehaviorModel,
    Event,
    EventsModel,
    Guard,
    ModelBundle,
    SourceSpan,
    check_behavior,
    check_bundle,
    check_events,
    region_union,
)
from .render import Level, RenderError, RenderOptions, render, render_behavior, render_events, render_static
from .simulator import FiringRecord, Outcome, SimState, SimulationError, SimulationTrace, Simulator, Token, simulate
from .validator import Diagnostic, Severity, validate_static

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "BehaviorEdge",
    "BehaviorModel",
    "check_behavior",
    "check_bundle",
    "check_events",
    "Diagnostic",
    "Event",
    "EventsModel",
    "FiringRecord",
    "FlowArc",
    "Guard",
    "Level",
    "ModelBundle",
    "ModelError",
    "Outcome",
    "parse",
    "parse_scenario",
    "ParseDiagnostic",
    "ParseError",
    "region_union",
    "render",
    "render_behavior",
    "render_events",
    "render_static",
    "RenderError",
    "RenderOptions",
    "Scenario",
    "serialize",
    "serialize_scenario",
    "Severity",
    "SimState",
    "simulate",
    "SimulationError",
    "SimulationTrace",
    "Simulator",
    "SourceSpan",
    "stage_adjacency",
    "StageKind",
    "StageRef",
    "StaticModel",
    "Thimac",
    "ThimacKind",
    "Token",
    "TriggerArc",
    "validate_static",
]
