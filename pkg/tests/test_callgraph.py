import json

import pytest

from impactlab import corpus
from impactlab.callgraph import (
    CALL,
    FIELD_READ,
    FIELD_WRITE,
    FIGURE,
    OVERRIDE,
    CallGraph,
    Edge,
    GraphNode,
    GraphVariant,
    build,
    export,
    from_json,
    is_isolated,
    method_node,
    node_for,
    to_json,
)
from impactlab.frontend import MethodRef

from conftest import compile_source

FOO_A, FOO_B = MethodRef("A", "foo", ()), MethodRef("B", "foo", ())


def edge_ids(graph):
    return {(e.src.id, e.dst.id, e.kind) for e in graph.edges}


def test_exactly_four_variants():
    assert [v.value for v in GraphVariant] == ["S", "B", "H", "F"]
    assert GraphVariant.parse("h") is GraphVariant.H
    with pytest.raises(ValueError):
        GraphVariant.parse("x")


def test_override_field_h_adds_override_edge(override_field):
    b, h = build(override_field, "B"), build(override_field, "H")
    assert b.nodes == h.nodes
    assert edge_ids(h) - edge_ids(b) == {("A.foo()", "B.foo()", OVERRIDE)}


def test_override_field_f_field_edges(override_field):
    h, f = build(override_field, "H"), build(override_field, "F")
    assert f.nodes - h.nodes == {GraphNode("field", "C#bar")}
    assert edge_ids(f) - edge_ids(h) == {
        ("C.biz1()", "C#bar", FIELD_READ),
        ("C#bar", "C.biz2()", FIELD_WRITE),
    }


def test_override_field_figure_orientation(override_field):
    f = build(override_field, "F", FIGURE)
    assert ("C#bar", "C.biz1()", FIELD_READ) in edge_ids(f)
    assert ("C.biz2()", "C#bar", FIELD_WRITE) in edge_ids(f)
    with pytest.raises(ValueError):
        build(override_field, "F", "sideways")


def test_override_field_s_lifts_to_declaration(override_field):
    s = build(override_field, "S")
    assert node_for(s, FOO_B) is None
    assert edge_ids(s) == {("C.biz1()", "A.foo()", CALL), ("C.biz2()", "A.foo()", CALL)}


def test_node_for(override_field):
    assert node_for(build(override_field, "B"), FOO_B) == method_node(FOO_B)
    one = compile_source("class A { int one() { return 1; } }")
    for v in GraphVariant:
        g = build(one, v)
        node = node_for(g, MethodRef("A", "one", ()))
        assert node == GraphNode("method", "A.one()")
        assert is_isolated(g, node)


def test_empty_program():
    empty = compile_source("")
    for v in GraphVariant:
        g = build(empty, v)
        assert not g.nodes and not g.edges
    assert export(build(empty, "B"), "json") == b'{"variant":"B","nodes":[],"edges":[]}'


def test_is_isolated_never_called(corpus_programs):
    inv = corpus_programs[corpus.ISOLATED_PROJECT]
    ref = inv.method_by_id("Warehouse.legacyChecksum()")
    for v in GraphVariant:
        g = build(inv, v)
        assert is_isolated(g, node_for(g, ref))


def test_mul_not_isolated(calc):
    g = build(calc, "B")
    assert not is_isolated(g, node_for(g, calc.method_by_id("Calc.mul(int,int)")))


def test_is_isolated_rejects_foreign_node(override_field):
    with pytest.raises(KeyError):
        is_isolated(build(override_field, "B"), GraphNode("method", "Z.z()"))


def test_recursion_self_loop():
    g = build(compile_source("class A { int f(int n) { if (n == 0) { return 0; } return f(n - 1); } }"), "B")
    assert edge_ids(g) == {("A.f(int)", "A.f(int)", CALL)}
    assert not is_isolated(g, GraphNode("method", "A.f(int)"))


def test_reflect_and_abs_add_no_edges():
    g = build(
        compile_source('class A { int f() { return 1; } int g() { return abs(reflect_call(this, "f")); } }'), "F"
    )
    assert not g.edges


def test_compound_field_update_both_edges():
    g = build(compile_source("class A { int x; void inc() { x = x + 1; } }"), "F")
    assert edge_ids(g) == {("A.inc()", "A#x", FIELD_READ), ("A#x", "A.inc()", FIELD_WRITE)}


def test_static_and_interface_members():
    checked = compile_source(
        """
        interface I { int v(); }
        class A implements I { static int n; int v() { return A.n; } }
        class U { int u(I i) { return i.v(); } }
        """
    )
    h = build(checked, "H")
    assert ("I.v()", "A.v()", OVERRIDE) in edge_ids(h)
    assert ("U.u(I)", "I.v()", CALL) in edge_ids(h)
    assert ("A.v()", "A#n", FIELD_READ) in edge_ids(build(checked, "F"))


def test_edge_endpoints_validated():
    a = GraphNode("method", "A.a()")
    with pytest.raises(ValueError):
        CallGraph(GraphVariant.B, frozenset(), frozenset({Edge(a, a, CALL)}))


@pytest.mark.parametrize("name", corpus.project_names())
def test_variant_inclusions(name, corpus_programs):
    checked = corpus_programs[name]
    s, b, h, f = (build(checked, v) for v in GraphVariant)
    assert b.nodes == h.nodes
    assert h.nodes <= f.nodes
    assert b.edges <= h.edges <= f.edges
    assert len(s.nodes) <= len(b.nodes)
    assert all(n.kind == "method" for g in (s, b, h) for n in g.nodes)
    assert all(e.kind != OVERRIDE for g in (s, b) for e in g.edges)


@pytest.mark.parametrize("name", corpus.project_names())
def test_call_edges_follow_resolution(name, corpus_programs):
    checked = corpus_programs[name]
    from impactlab.frontend import method_at

    expected = {(str(method_at(checked, p)), str(t)) for p, t in checked.call_targets.items()}
    got = {(e.src.id, e.dst.id) for e in build(checked, "B").edges}
    assert got == expected


@pytest.mark.parametrize("name", corpus.project_names())
def test_json_round_trip(name, corpus_programs):
    for v in GraphVariant:
        data = to_json(build(corpus_programs[name], v))
        assert to_json(from_json(data)) == data
        doc = json.loads(data)
        assert set(doc) == {"variant", "nodes", "edges"}


def test_dot_export(override_field):
    dot = export(build(override_field, "F"), "dot").decode()
    assert dot.startswith("digraph")
    assert '"C#bar" [shape=box]' in dot
    assert 'label="field_write"' in dot
    with pytest.raises(ValueError):
        export(build(override_field, "F"), "png")


def test_dot_marks_tests(calc):
    dot = export(build(calc, "B"), "dot").decode()
    assert '"CalcTest.testMul()" [shape=ellipse, peripheries=2]' in dot
