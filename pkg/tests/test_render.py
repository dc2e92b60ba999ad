import pytest

from tmkit.corpus import list_fixtures, load_fixture
from tmkit.dsl import parse
from tmkit.render import Level, RenderError, RenderOptions, render, render_behavior, render_events, render_static

from dotcheck import DotSyntaxError, parse_dot


def _dashed(graph):
    return [e for e in graph.edges if e[2].get("style") == "dashed"]


def test_empty_model_is_valid_dot():
    g = parse_dot(render_static(parse('model "empty"')))
    assert g.directed and g.nodes == {} and g.edges == []


def test_employee_company_census():
    g = parse_dot(render_static(load_fixture("employee-company")))
    clusters = [s for s in g.subgraphs if s.id.startswith("cluster_")]
    assert len(clusters) == 2
    assert len(g.nodes) == 6
    assert len(g.edges) == 5 and _dashed(g) == []


def test_tuple_has_exactly_one_dashed_edge():
    (edge,) = _dashed(parse_dot(render_static(load_fixture("tuple"))))
    assert edge[:2] == ("Tuple__process", "Tuple__create")


def test_object_clusters_get_double_border():
    g = parse_dot(render_static(load_fixture("mug-handle")))
    kinds = {s.id: s.attrs.get("peripheries") for s in g.subgraphs}
    assert kinds["cluster_Mug"] == "2"
    assert kinds["cluster_Mug/Handle"] is None and kinds["cluster_Kitchen"] is None
    nested = {s.id: s.parent for s in g.subgraphs}
    assert nested["cluster_Mug/Handle"] == "cluster_Mug"


def test_arc_labels_become_edge_labels():
    g = parse_dot(render_static(load_fixture("employee-company")))
    labels = {(a, b): attrs.get("label") for a, b, attrs in g.edges}
    assert labels[("Employee__transfer", "Company__transfer")] == "Employee"


def test_events_without_events_matches_static():
    b = parse('model "m" thimac A { stages: create, release } flow A.create -> A.release')
    opts = RenderOptions(Level.EVENTS)
    assert render_events(b, opts) == render_static(b, RenderOptions(rankdir=opts.rankdir))


def test_highlight_marks_exactly_the_region():
    b = load_fixture("customer-order-item")
    g = parse_dot(render_events(b, RenderOptions(Level.EVENTS, highlight="v1")))
    shaded = set()
    for node, attrs in g.nodes.items():
        if "highlight" in attrs.get("class", "").split():
            assert attrs["fillcolor"]
            path, _, stage = node.rpartition("__")
            shaded.add(f"{path}.{stage}")
    for sub in g.subgraphs:
        if "highlight" in sub.attrs.get("class", "").split():
            shaded.add(sub.id[len("cluster_"):])
    for _, _, attrs in g.edges:
        if "highlight" in attrs.get("class", "").split():
            assert attrs["color"]
            shaded.add(attrs["id"])
    assert shaded == set(b.event("v1").region)


def test_region_members_carry_event_classes():
    g = parse_dot(render_events(load_fixture("cat"), RenderOptions(Level.EVENTS)))
    assert set(g.nodes["Cat__process"]["class"].split()) == {"ev-b", "ev-c"}


def test_unknown_highlight():
    with pytest.raises(RenderError) as exc:
        render_events(load_fixture("cat"), RenderOptions(Level.EVENTS, highlight="zz"))
    assert exc.value.code == "highlight-unknown-event"


def test_highlight_only_for_events_level():
    with pytest.raises(ValueError):
        RenderOptions(Level.STATIC, highlight="a")


def test_cat_behavior():
    g = parse_dot(render_behavior(load_fixture("cat")))
    assert list(g.nodes) == ["a", "b", "c"]
    assert [(a, b) for a, b, _ in g.edges] == [("a", "b"), ("b", "c")]
    assert g.nodes["a"]["peripheries"] == "2"


def test_delete_item_behavior_view():
    b = load_fixture("customer-order-item")
    g = parse_dot(render_behavior(b, RenderOptions(Level.BEHAVIOR, focus="v1")))
    assert len(g.nodes) == 10
    no_edges = [(a, t) for a, t, attrs in g.edges if attrs.get("label") == "no"]
    assert no_edges == [("v2", "v3"), ("v8", "v9")]
    back = {(a, t) for a, t, _ in g.edges}
    assert {("v3", "v2"), ("v9", "v7")} <= back


def test_single_event_behavior():
    b = parse('model "m" thimac A {} event x { region: A } behavior { start x }')
    g = parse_dot(render_behavior(b))
    assert list(g.nodes) == ["x"] and g.edges == []


def test_rankdir():
    text = render_static(load_fixture("cat"), RenderOptions(rankdir="TB"))
    assert parse_dot(text).attrs["rankdir"] == "TB"
    with pytest.raises(ValueError):
        RenderOptions(rankdir="RL")


def test_awkward_names_stay_valid_dot():
    b = parse('model "q\\"uote\\\\" thimac A { stages: create, release } flow A.create -> A.release label "say \\"hi\\""')
    g = parse_dot(render_static(b))
    assert g.name == 'q"uote\\'
    assert g.edges[0][2]["label"] == 'say "hi"'


@pytest.mark.parametrize("entry", list_fixtures(), ids=lambda e: e.name)
@pytest.mark.parametrize("level", list(Level))
def test_fixture_renders_are_faithful_and_stable(entry, level):
    b = load_fixture(entry.name)
    opts = RenderOptions(level)
    first, second = render(b, opts), render(load_fixture(entry.name), opts)
    assert first == second
    g = parse_dot(first)
    if level is Level.BEHAVIOR:
        assert len(g.nodes) == len(b.events.ids)
        assert len(g.edges) == len(b.behavior.edges)
    else:
        assert len(g.nodes) == len(b.static.stage_refs())
        assert len(g.edges) == len(b.static.arcs)


@pytest.mark.parametrize(
    "bad",
    ["digraph {", "digraph { a -> }", "digraph { a [x] }", "graph { a -> b }", "digraph { } extra"],
)
def test_dot_checker_rejects_malformed_input(bad):
    with pytest.raises(DotSyntaxError):
        parse_dot(bad)
