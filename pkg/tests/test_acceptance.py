"""End-to-end acceptance criteria, one test per criterion.

The terminal summary prints one PASS/FAIL line per criterion (see conftest).
"""

import hashlib
import itertools
import json
import os
import re
import subprocess
import sys

from hypothesis import HealthCheck, given, settings, strategies as st

from tmkit.cli import main
from tmkit.core import StageKind, stage_adjacency
from tmkit.corpus import FIXTURES, GOLDEN, fixture, golden_artifacts, list_fixtures, load_fixture, load_scenario
from tmkit.dsl import ParseError, parse, serialize
from tmkit.levels import check_bundle
from tmkit.render import Level, RenderOptions, render
from tmkit.simulator import Outcome, Simulator
from tmkit.validator import Severity

from dotcheck import parse_dot
from mutations import MUTATIONS, UNDER_COVERED
from strategies import VOCAB, bundles

K = StageKind
EXPECTED_INTRA = {
    (K.TRANSFER, K.RECEIVE),
    (K.RECEIVE, K.PROCESS),
    (K.RECEIVE, K.RELEASE),
    (K.PROCESS, K.RELEASE),
    (K.PROCESS, K.CREATE),
    (K.CREATE, K.PROCESS),
    (K.CREATE, K.RELEASE),
    (K.RELEASE, K.TRANSFER),
}
EXPECTED_CROSS = {(K.TRANSFER, K.TRANSFER)}

DELETE_ITEM = ["v1", "v2", "v3", "v2", "v4", "v5", "v6", "v7", "v8", "v9", "v7", "v8", "v10"]


def _run(fixture, scenario):
    sim = Simulator(load_fixture(fixture), load_scenario(fixture, scenario))
    return sim, sim.run()


def test_criterion_1_corpus_cleanliness():
    entries = list_fixtures()
    assert len(entries) == 8
    for entry in entries:
        errors = [d for d in check_bundle(load_fixture(entry.name)) if d.severity is Severity.ERROR]
        assert len(errors) == 0, (entry.name, errors)


def test_criterion_2_mutation_suite():
    assert len(MUTATIONS) >= 10
    for mutation in MUTATIONS:
        errors = [d for d in check_bundle(mutation.build()) if d.is_error]
        assert errors, mutation.name
        assert {d.rule for d in errors} == {mutation.rule}, mutation.name
    assert {m.rule for m in MUTATIONS} == {"W1", "W2", "W3", "W5", "W6", "W7", "W8", "W10"}
    diags = check_bundle(UNDER_COVERED())
    assert [(d.rule, d.severity) for d in diags] == [("W9", Severity.WARNING)]


def test_criterion_3_uniqueness_replay(capsys):
    _, trace = _run("employee-company", "assignments")
    assert [r.key for r in trace.records] == ["E1", "E2", "E3", "E4", "E1"]
    outcomes = [r.outcome for r in trace.records]
    assert outcomes.count(Outcome.EXECUTED) == 4
    assert outcomes.count(Outcome.SKIPPED_UNIQUE) == 1
    scenario = str(fixture("employee-company").scenario_path("assignments"))
    assert main(["simulate", str(FIXTURES / "employee-company.tm"), scenario, "--table"]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert len(rows) == 5
    assert "Not executed because E1 already occurred" in rows[4]
    assert not any("Not executed" in r for r in rows[:4])


def test_criterion_4_delete_item_oracle():
    _, trace = _run("customer-order-item", "delete-item")
    events = [r.event for r in trace.records]
    assert events == DELETE_ITEM
    oracle = (GOLDEN / "customer-order-item.delete-item.oracle.md").read_text(encoding="utf-8")
    assert re.findall(r"^\| \d+\s+\| (v\d+)\s+\|", oracle, flags=re.M) == DELETE_ITEM
    golden = json.loads((GOLDEN / "customer-order-item.delete-item.trace.json").read_text(encoding="utf-8"))
    assert [r["event"] for r in golden["records"]] == DELETE_ITEM


def test_criterion_5_table_ordering_and_coupling():
    sim, trace = _run("table", "build")
    assert (trace.records[-1].step, trace.records[-1].event) == (10, "E10")
    assert trace.records[9].outcome is Outcome.EXECUTED
    tokens = {t.type: t for t in sim.state.tokens.values()}
    table, top = tokens["Table"], tokens["Table/Top"]
    parts = [top] + [tokens[f"Table/Leg{i}"] for i in range(1, 5)]
    assert top.attached_to == table.id
    for leg in parts[1:]:
        assert leg.attached_to == top.id
    for part in parts:
        assert part.location == table.location
    assert {t.id for t in sim.state.attachments(table.id)} == {p.id for p in parts}
    sim.state.move_token(table.id, "Room")
    assert [p.location for p in parts] == ["Room"] * 5


def test_criterion_6_cat_identity():
    sim, trace = _run("cat", "accident")
    assert [r.event for r in trace.records] == ["a", "b", "c"]
    ids = {t.id for snap in sim.history for t in snap if t.type == "Cat"}
    assert len(ids) == 1
    after_b = {t.type: t for t in sim.history[1]}
    assert after_b["Cat/Tail"].attached_to is None
    tokens = {t.type: t for t in sim.state.tokens.values()}
    tail_before = tokens["Cat/Tail"].location
    sim.state.move_token(tokens["Cat"].id, "Garden")
    assert tokens["Cat"].location == "Garden"
    assert tokens["Cat/Tail"].location == tail_before


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(bundles())
def _round_trip(bundle):
    text = serialize(bundle)
    assert parse(text) == bundle


@settings(max_examples=1000, deadline=None)
@given(st.one_of(st.binary(max_size=200), st.text(max_size=200), st.lists(st.sampled_from(VOCAB), max_size=40).map(" ".join)))
def _fuzz(data):
    try:
        parse(data)
    except ParseError as err:
        assert err.diagnostics


def test_criterion_7_round_trip_and_fuzz():
    _round_trip()
    _fuzz()


def test_criterion_8_adjacency_totality():
    combos = list(itertools.product(StageKind, (True, False), StageKind))
    assert len(combos) == 50
    allowed = {(a, same, b) for a, same, b in combos if stage_adjacency(a, same, b)}
    expected = {(a, True, b) for a, b in EXPECTED_INTRA} | {(a, False, b) for a, b in EXPECTED_CROSS}
    assert allowed == expected


def test_criterion_9_renderer_goldens():
    for entry in list_fixtures():
        bundle = load_fixture(entry.name)
        for level in Level:
            first = render(bundle, RenderOptions(level))
            second = render(load_fixture(entry.name), RenderOptions(level))
            assert first == second
            parse_dot(first)
            golden = GOLDEN / f"{entry.name}.{level.value}.dot"
            assert golden.read_text(encoding="utf-8") == first
        for name, text in golden_artifacts(entry).items():
            assert (GOLDEN / name).read_text(encoding="utf-8") == text
    tuple_dot = parse_dot(render(load_fixture("tuple"), RenderOptions(Level.STATIC)))
    assert sum(1 for e in tuple_dot.edges if e[2].get("style") == "dashed") == 1


def _tm(args, seed, cwd):
    env = dict(os.environ, PYTHONHASHSEED=str(seed), TM_COLOR="never")
    proc = subprocess.run([sys.executable, "-m", "tmkit", *args], capture_output=True, env=env, cwd=cwd)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_criterion_10_determinism(tmp_path):
    digests = set()
    for seed in (0, 1, 12345):
        h = hashlib.sha256()
        for entry in list_fixtures():
            for name in entry.scenario_names:
                out = tmp_path / f"{seed}-{entry.name}-{name}.json"
                _tm(["simulate", str(entry.model_path), str(entry.scenario_path(name)), "--trace", str(out)], seed, tmp_path)
                h.update(out.read_bytes())
                h.update(_tm(["simulate", str(entry.model_path), str(entry.scenario_path(name)), "--table"], seed, tmp_path))
            for level in ("static", "events", "behavior"):
                h.update(_tm(["render", str(entry.model_path), "--level", level], seed, tmp_path))
        digests.add(h.hexdigest())
    assert len(digests) == 1
