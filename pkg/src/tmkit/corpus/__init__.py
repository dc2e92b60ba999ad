"""Worked-example fixtures shipped with the package, plus their goldens.

Fixtures live in ``fixtures/<name>.tm`` with scenarios in
``fixtures/<name>.<scenario>.tms``.  Goldens in ``golden/`` are produced by
:func:`regenerate_goldens` (``python -m tmkit.corpus``) and compared
byte-for-byte by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..dsl import Scenario, parse, parse_scenario
from ..levels import ModelBundle
from ..render import Level, RenderOptions, render
from ..simulator import simulate

ROOT = Path(__file__).resolve().parent
FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "golden"

_PROVENANCE = {
    "tuple": "Fig. 6: attribute values processed into a tuple thimac",
    "customer-order-item": "Figs. 11, 13, 14, 15: customer/order/item modules A-F, events v1-v17",
    "employee-company": "Figs. 18-21: employee assigned to a company, uniqueness of the assignment event",
    "table": "Figs. 23-25: constructing an object table, events E1-E10",
    "mug-handle": "Fig. 27: the part moves wherever the whole moves",
    "stereo-remote": "Fig. 28: the part moves freely",
    "cake": "Figs. 29-31: the left half is separated and handed over",
    "cat": "Figs. 35-36: the cat loses its tail, chronology a -> b -> c",
}


class UnknownFixture(LookupError):
    code = "unknown-fixture"

    def __init__(self, name: str):
        super().__init__(f"unknown-fixture: no fixture named {name!r}")
        self.name = name


@dataclass(frozen=True)
class FixtureEntry:
    name: str
    model_path: Path
    scenario_paths: tuple[Path, ...]
    provenance: str

    def scenario_path(self, scenario: str) -> Path:
        path = FIXTURES / f"{self.name}.{scenario}.tms"
        if path not in self.scenario_paths:
            raise KeyError(f"{self.name} has no scenario {scenario!r}")
        return path

    @property
    def scenario_names(self) -> list[str]:
        return [p.name[len(self.name) + 1 : -len(".tms")] for p in self.scenario_paths]


def list_fixtures() -> list[FixtureEntry]:
    entries = []
    for name in sorted(_PROVENANCE):
        scenarios = tuple(sorted(FIXTURES.glob(f"{name}.*.tms")))
        entries.append(FixtureEntry(name, FIXTURES / f"{name}.tm", scenarios, _PROVENANCE[name]))
    return entries


def fixture(name: str) -> FixtureEntry:
    for entry in list_fixtures():
        if entry.name == name:
            return entry
    raise UnknownFixture(name)


def load_fixture(name: str) -> ModelBundle:
    return parse(fixture(name).model_path.read_bytes())


def load_scenario(name: str, scenario: str) -> Scenario:
    return parse_scenario(fixture(name).scenario_path(scenario).read_bytes())


def golden_artifacts(entry: FixtureEntry) -> dict[str, str]:
    """File name -> expected content for every golden of ``entry``."""
    bundle = load_fixture(entry.name)
    out = {f"{entry.name}.static.dot": render(bundle, RenderOptions(Level.STATIC))}
    if bundle.events is not None:
        out[f"{entry.name}.events.dot"] = render(bundle, RenderOptions(Level.EVENTS))
    if bundle.behavior is not None:
        out[f"{entry.name}.behavior.dot"] = render(bundle, RenderOptions(Level.BEHAVIOR))
    for scenario in entry.scenario_names:
        trace = simulate(bundle, load_scenario(entry.name, scenario))
        out[f"{entry.name}.{scenario}.trace.json"] = trace.to_json()
        out[f"{entry.name}.{scenario}.table.txt"] = trace.to_table()
    return out


def regenerate_goldens(directory: Path = GOLDEN) -> list[Path]:
    """Rewrite generated goldens; hand-written files (``*.md``) are left alone."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in list_fixtures():
        for name, text in golden_artifacts(entry).items():
            path = directory / name
            path.write_text(text, encoding="utf-8", newline="\n")
            written.append(path)
    return written
