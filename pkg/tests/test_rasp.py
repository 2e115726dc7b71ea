from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from metaguard.core_lang import parse, shape, walk
from metaguard.core_lang.printer import pretty
from metaguard.core_lang.syntax import MethodCall, Var
from metaguard.explorer.handle import trap_calls
from metaguard.machine import Machine, concrete, run
from metaguard.machine.values import A0, num, summarize
from metaguard.policies import link
from metaguard.rasp import (
    DECISION_TRAPS, TRAP_TABLE, InstrumentError, em_trap, enforce, instrument, trap_for,
)
import importlib
from metaguard.rasp.instrument import EM_FILE, EM_METHODS
from metaguard.rasp.traps import TRAP_NAMES

from metas import COUNTING, PROCEED_ALWAYS
from programs import gen_program


def _base(ip):
    """The instrumented program minus the EM prelude."""
    return ip.body.second


def test_trap_table_contents():
    assert TRAP_TABLE["FunCall"] == TRAP_TABLE["MethodCall"] == "apply"
    assert (TRAP_TABLE["PropLoad"], TRAP_TABLE["PropStore"], TRAP_TABLE["CtorCall"]) == ("get", "set", "construct")
    assert (TRAP_TABLE["VarAssign"], TRAP_TABLE["Binary"], TRAP_TABLE["Lit"]) == ("write", "binary", "literal")
    assert DECISION_TRAPS == {"apply", "get", "set", "construct", "write"}
    assert set(EM_METHODS.values()) == set(TRAP_TABLE.values())


def test_trap_table_shared_with_explorer():
    from metaguard.explorer import handle
    assert importlib.import_module("metaguard.rasp.instrument").TRAP_TABLE is TRAP_TABLE
    assert handle.trap_for.__globals__["TRAP_TABLE"] is TRAP_TABLE


def test_call_wrapped_in_em_apply():
    ip = instrument(parse("var x = 'a'; fetch(x);"))
    text = pretty(ip)
    assert "EM.apply(fetch, window, " in text
    calls = [n for n in walk(ip.body) if type(n) is MethodCall and n.name == "apply" and not n.meta]
    assert len(calls) == 1 and em_trap(calls[0]) == "apply"
    # the rewritten call keeps the original label and span
    orig = parse("var x = 'a'; fetch(x);")
    fetch_call = next(n for n in walk(orig.body) if type(n).__name__ == "Call")
    assert calls[0].label == fetch_call.label and ip.label_table[calls[0].label] == fetch_call.span


def test_lone_variable_only_prelude():
    p = parse("x")
    ip = instrument(p)
    assert shape(_base(ip)) == shape(p.body)
    em = [n for n in walk(ip.body.first)]
    assert all(n.meta for n in em)
    assert ip.label_table[em[0].label].file == EM_FILE


def test_double_instrumentation_rejected():
    with pytest.raises(InstrumentError):
        instrument(instrument(parse("1")))


def test_nested_calls_preserve_effect_order():
    text = "var s = 'x'; fetch(open(s + '1'), alert(s));"
    plain = run(link(parse(text), PROCEED_ALWAYS), concrete())
    inst = run(instrument(link(parse(text), PROCEED_ALWAYS)), concrete())
    assert plain.effects and plain.effects == inst.effects


def _calls(n):
    return "\n".join(f"fetch('u{i}');" for i in range(n))


def test_counter_three_calls_proceed(counter_meta):
    out = enforce(parse(_calls(3)), counter_meta, policy_id="fetch3")
    assert out.kind == "completed"
    assert [e[0] for e in out.effects] == ["fetch"] * 3


def test_counter_fourth_call_halts(counter_meta):
    out = enforce(parse(_calls(5), "c.js0"), counter_meta, policy_id="fetch3")
    assert out.kind == "halted"
    assert (out.halt_span.file, out.halt_span.start_line) == ("c.js0", 4)
    assert out.halt_trap == "apply"
    assert len(out.effects) == 3
    j = out.to_json()
    assert j["outcome"] == "halted" and j["span"]["start_line"] == 4 and j["policy_id"] == "fetch3"


def test_proceed_always_transparent_value():
    text = "function f(a) { return a * 2; } var o = {p: f(4)}; o.p + 1;"
    out = enforce(parse(text), PROCEED_ALWAYS)
    assert out.kind == "completed"
    assert out.value == summarize(run(parse(text), concrete()).result_values())


def test_policy_code_failure_is_not_a_violation():
    meta = "var META = { apply: function (f, a) { return missing(f); } };"
    out = enforce(parse("fetch(1);"), meta)
    assert out.kind == "error" and "policy code" in out.message


def test_base_program_error_reported():
    out = enforce(parse("var x = 1; x();"), PROCEED_ALWAYS)
    assert out.kind == "error" and "not a function" in out.message
    assert enforce(parse("var x = 1; new x();"), PROCEED_ALWAYS).kind == "error"


def test_step_budget_partial(counter_meta):
    out = enforce(parse("var i = 0; while (true) { i = i + 1; }"), counter_meta, step_budget=2000)
    assert out.kind == "partial"


def test_host_inputs_reach_program():
    meta = "var META = { apply: function (f, a) { return f !== fetch || a[0] !== 'secret'; } };"
    text = "fetch(document.getElementById('pw').value);"
    assert enforce(parse(text), meta, **{"element:pw": "secret"}).kind == "halted"
    assert enforce(parse(text), meta, **{"element:pw": "other"}).kind == "completed"


def _expected_traps(p):
    """Trap invocations implied by a plain concrete trace of ``p``."""
    m = Machine(concrete(20_000))
    g = run(p, concrete(20_000), m)
    c = Counter()
    for n, s in enumerate(g.nodes):
        for call in trap_calls(s, m, g, n):
            c[call.name] += 1
    return c, g


def _meta_counters(g, m):
    (t,) = g.terminals()
    store = g.nodes[t].store
    (a,) = m.lookup_prop(store, A0, "META")
    out = Counter()
    for name in TRAP_NAMES:
        (v,) = m.lookup_prop(store, a, "c_" + name)
        if v.c:
            out[name] = int(v.c)
    return out


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_trap_call_completeness(seed):
    p = link(parse(gen_program(seed, 6)), COUNTING)
    expected, plain = _expected_traps(p)
    m = Machine(concrete(200_000))
    g = run(instrument(p), concrete(200_000), m)
    assert g.complete
    assert _meta_counters(g, m) == expected
