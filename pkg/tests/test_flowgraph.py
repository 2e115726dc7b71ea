import json

import pytest
from hypothesis import given, settings, strategies as st

from metaguard.core_lang import parse
from metaguard.flowgraph import FlowGraph, GraphBuilder, InvalidNode, explore_states
from metaguard.machine import Machine, abstract, concrete, run
from metaguard.machine.values import num

from programs import gen_program


def test_empty_program_dot():
    g = run(parse(""), concrete())
    assert len(g) == 2
    dot = g.to_dot()
    assert dot.startswith("digraph")
    assert dot.count("shape=") == 2 and "n0 -> n1" in dot


def test_terminal_of_literal():
    g = run(parse("42"), concrete())
    (t,) = g.terminals()
    assert g.successors(t) == frozenset()
    assert g.result_values() == frozenset([num(42)])


def test_straight_line_successors():
    g = run(parse("var a = 1; a = a + 1; a;"), concrete())
    for i in range(len(g)):
        assert len(g.successors(i)) == (0 if i in g.terminals() else 1)


def test_ambiguous_if_two_successors():
    g = run(parse("var x = hasDigit(prompt('q')); if (x) { 1; } else { 2; }"), abstract("H"))
    assert any(len(g.successors(i)) == 2 for i in range(len(g)))


def test_incomplete_graph():
    g = run(parse("var i = 0; while (true) { i = i + 1; }"), concrete(step_budget=50))
    assert not g.complete
    assert g.terminals() == frozenset()


def test_invalid_node_id():
    g = run(parse("1"), concrete())
    with pytest.raises(InvalidNode):
        g.successors(99)
    with pytest.raises(InvalidNode):
        g.node(-1)


def test_json_round_trip():
    g = run(parse("function f(a) { return a + 1; } var r = f(2); if (r > 2) { r = 0; }"), abstract("L"))
    obj = json.loads(g.to_json())
    assert len(obj["nodes"]) == len(g)
    assert sorted(map(tuple, obj["edges"])) == sorted(g.edges)
    g2 = FlowGraph.from_json(g.to_json())
    assert g2 == g
    assert g2.to_json() == g.to_json()


def test_value_summaries_sorted_tokens():
    g = run(parse("var x = hasDigit(prompt('q')); x;"), abstract("H"))
    obj = json.loads(g.to_json())
    term = [n for n in obj["nodes"] if n["kind"] == "ko" and n["terminal"]]
    assert term and all(n["value"] == sorted(n["value"]) for n in term)


def test_deduplication_same_id():
    m = Machine(concrete())
    b = GraphBuilder()
    s = m.inject(parse("1").body)
    s2 = m.inject(parse("1").body)
    i, new = b.add(s)
    j, new2 = b.add(s)
    assert i == j and new and not new2
    # a different program text gives a different node
    assert b.add(s2)[0] != i


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 5000), st.sampled_from("HL"))
def test_no_duplicate_nodes_and_edge_closure(seed, prec):
    m = Machine(abstract(prec))
    g = run(parse(gen_program(seed, 5)), abstract(prec), m)
    assert len(set(g.nodes)) == len(g)
    assert all(0 <= a < len(g) and 0 <= b < len(g) for a, b in g.edges)
    # every successor of every node is present (complete graph has no frontier)
    index = {s: i for i, s in enumerate(g.nodes)}
    for i, s in enumerate(g.nodes):
        for t in m.step(s):
            assert t in index


def test_explore_states_multiple_roots():
    m = Machine(concrete())
    r1 = m.inject(parse("1").body)
    b, complete = explore_states(m.step, [r1], 100)
    assert complete and len(b.nodes) == 2
