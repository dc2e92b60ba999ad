import json
import re

import pytest

from tmkit.corpus import GOLDEN, UnknownFixture, golden_artifacts, list_fixtures, load_fixture, regenerate_goldens
from tmkit.levels import check_bundle

NAMES = [
    "cake", "cat", "customer-order-item", "employee-company",
    "mug-handle", "stereo-remote", "table", "tuple",
]


def test_exactly_eight_fixtures_sorted():
    assert [e.name for e in list_fixtures()] == NAMES
    assert list_fixtures() == list_fixtures()


@pytest.mark.parametrize("entry", list_fixtures(), ids=lambda e: e.name)
def test_entry_paths_exist_and_cite_figures(entry):
    assert entry.model_path.is_file()
    assert entry.scenario_paths and all(p.is_file() for p in entry.scenario_paths)
    assert re.search(r"Figs?\. \d+", entry.provenance)


@pytest.mark.parametrize("entry", list_fixtures(), ids=lambda e: e.name)
def test_fixture_has_no_errors(entry):
    assert [d for d in check_bundle(load_fixture(entry.name)) if d.is_error] == []


def test_unknown_fixture():
    with pytest.raises(UnknownFixture) as exc:
        load_fixture("nope")
    assert exc.value.code == "unknown-fixture"
    assert isinstance(exc.value, LookupError)


def test_employee_company_contents():
    b = load_fixture("employee-company")
    assert len(b.static.roots()) == 2
    assert [e.id for e in b.events.events if e.unique] == ["work"]


def test_case_study_event_ids():
    ids = load_fixture("customer-order-item").events.ids
    assert ids == [f"v{i}" for i in range(1, 18)]


def test_case_study_encodes_all_six_modules_statically():
    arcs = load_fixture("customer-order-item").static.arcs
    assert {a.id[0] for a in arcs} == set("ABCEF")
    # module D mirrors A and is not drawn separately


def test_table_nailing_events_attach_legs_to_top():
    b = load_fixture("table")
    for i in range(1, 5):
        assert b.event(f"E{i + 5}").attach == [(f"Table/Leg{i}", "Table/Top")]


@pytest.mark.parametrize("entry", list_fixtures(), ids=lambda e: e.name)
def test_goldens_match(entry):
    expected = golden_artifacts(entry)
    assert any(name.endswith(".dot") for name in expected)
    assert any(name.endswith(".trace.json") for name in expected)
    for name, text in expected.items():
        assert (GOLDEN / name).read_text(encoding="utf-8") == text, name


def test_regeneration_is_stable(tmp_path):
    first = {p.name: p.read_bytes() for p in regenerate_goldens(tmp_path / "a")}
    second = {p.name: p.read_bytes() for p in regenerate_goldens(tmp_path / "b")}
    assert first == second


def test_delete_item_oracle_agrees_with_golden_trace():
    oracle = (GOLDEN / "customer-order-item.delete-item.oracle.md").read_text(encoding="utf-8")
    rows = re.findall(r"^\| (\d+)\s+\| (v\d+)\s+\|", oracle, flags=re.M)
    trace = json.loads((GOLDEN / "customer-order-item.delete-item.trace.json").read_text(encoding="utf-8"))
    assert [(int(s), e) for s, e in rows] == [(r["step"], r["event"]) for r in trace["records"]]
