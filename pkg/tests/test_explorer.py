import pytest

from metaguard.bench import load_suite
from metaguard.core_lang import parse
from metaguard.explorer import (
    IncompleteGraph, explore, reachable, trap, verify, verify_1ph,
)
from metaguard.explorer.handle import meta_addrs
from metaguard.machine import Machine, abstract, concrete, run
from metaguard.machine.store import Obj, Store, store_leq
from metaguard.machine.values import Addr, FALSE, leq, truthiness
from metaguard.policies import link

from metas import STATELESS


def _lines(res):
    return [r.span.start_line for r in res]


def _calls(n):
    return "\n".join(f"fetch('u{i}');" for i in range(n))


def _state(meta, text="1;"):
    m = Machine(abstract("H"))
    g = run(link(parse(text), meta), abstract("H"), m)
    (t,) = g.terminals()
    return m, g.nodes[t]


def test_trap_lookup():
    m, st = _state("var META = { apply: function () { return true; }, get: 3 };")
    assert len(trap(st, "apply", m)) == 1
    assert trap(st, "get", m) == []         # not callable
    assert trap(st, "set", m) == []         # undefined
    m, st = _state("var x = 1;")
    assert trap(st, "apply", m) == []       # no META


def test_reachable():
    a, b, c = Addr(("t", 1)), Addr(("t", 2)), Addr(("t", 3))
    s = Store().set(a, Obj().with_prop("x", frozenset([b]))).set(b, Obj().with_prop("y", frozenset([a])))
    s = s.set(c, Obj())
    assert reachable([a], s) == {a, b}
    assert reachable([c], s) == {c}
    assert reachable([], s) == frozenset()


def test_counter_chain():
    res = verify(parse(_calls(5), "c.js0"), _counter(), abstract("H"), policy_id="fetch3")
    assert _lines(res) == [4, 5]
    assert res[0].severity == "definite" and res[0].policy_id == "fetch3" and res[0].trap == "apply"


def test_counter_under_limit_clean():
    assert verify(parse(_calls(3)), _counter(), abstract("H")) == []


def _counter():
    from conftest import COUNTER_POLICY
    from metaguard.policies import compile_policy, parse_policy
    return compile_policy(parse_policy(COUNTER_POLICY))


def test_loop_possible():
    text = "var n = prompt('n');\nvar i = 0;\nwhile (i < n) {\n  fetch(i);\n  i = i + 1;\n}"
    res = verify(parse(text), _counter(), abstract("H"))
    assert _lines(res) == [4] and res[0].severity == "possible"


def test_no_intercept_without_traps():
    g = run(link(parse("var x = 1; fetch(x);"), "var META = {};"), abstract("H"))
    ex = explore(g)
    assert all(not r.intercepted and not r.value for r in ex.results.values())
    assert ex.trap_states == 0


def test_handler_decision_value():
    g = run(link(parse("fetch(1);"), "var META = { apply: function (f) { return f !== fetch; } };"),
            abstract("H"))
    ex = explore(g)
    decided = [r for r in ex.results.values() if r.trap == "apply"]
    assert decided and all(truthiness(r.value) == {FALSE} for r in decided)


def test_safe_analogue_clean_at_h():
    (case,) = [c for c in load_suite("analogues") if c.name == "safe"]
    assert verify(case.program, case.policy.meta, abstract("H")) == []


def test_graph_unchanged_by_exploration():
    g = run(link(parse(_calls(4)), _counter()), abstract("H"))
    before = g.to_json()
    explore(g)
    assert g.to_json() == before


def test_meta_store_is_reachability_closure():
    res = verify(parse(_calls(5)), _counter(), abstract("H"))
    m = Machine(res.graph.config)
    checked = 0
    for n, r in res.exploration.results.items():
        roots = meta_addrs(res.graph.nodes[n].store, m) if hasattr(res.graph.nodes[n], "store") else []
        if not roots or not len(r.meta):
            continue
        checked += 1
        dom = {a for a, _ in r.meta.items()}
        # host objects live in the shared heap and are never copied
        closure = {a for a in reachable(roots, r.meta) if r.meta.bound(a) and a.key[0] != "host"}
        assert dom == closure
    assert checked


def test_order_independence_stateless():
    text = "var o = {secret: 1, pub: 2};\nvar x = o.pub;\nvar y = o.secret;\nfetch(x);\nfetch(x, y);"
    g = run(link(parse(text), STATELESS), abstract("H"))
    base = explore(g)
    from metaguard.explorer import violations
    want = violations(g, base)
    assert [r.span.start_line for r in want] == [3, 5]
    for seed in range(5):
        ex = explore(g, order_seed=seed)
        assert violations(g, ex) == want
        assert {n: r.value for n, r in ex.results.items()} == {n: r.value for n, r in base.results.items()}


def test_chains_ascending():
    g = run(link(parse("var i = 0;\nwhile (i < 3) {\n  fetch(i);\n  i = i + 1;\n}"), _counter()),
            abstract("H"))
    ex = explore(g, trace=True)
    assert ex.chains
    for chain in ex.chains.values():
        for (v0, s0), (v1, s1) in zip(chain, chain[1:]):
            assert leq(v0, v1) and store_leq(s0, s1)


def test_verify_rejects_concrete_config():
    with pytest.raises(ValueError):
        verify(parse("1"), "var META = {};", concrete())
    with pytest.raises(ValueError):
        verify_1ph(parse("1"), "var META = {};", concrete())


def test_incomplete_phase_one():
    with pytest.raises(IncompleteGraph):
        verify(parse(_calls(5)), _counter(), abstract("H", node_ceiling=20))
    res = verify(parse(_calls(5)), _counter(), abstract("H", node_ceiling=20), allow_partial=True)
    assert not res.complete


def test_verify_1ph_small():
    res = verify_1ph(parse(_calls(4), "c.js0"), _counter(), abstract("H"))
    two = verify(parse(_calls(4), "c.js0"), _counter(), abstract("H"))
    # the single-phase analysis joins callees at the monitor's one apply site
    assert res.complete and 4 in _lines(res) and set(_lines(two)) <= set(_lines(res))
    assert _lines(two) == [4]
