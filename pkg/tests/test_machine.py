import pytest
from hypothesis import given, settings, strategies as st

from metaguard.core_lang import parse, walk
from metaguard.core_lang.syntax import Call, Fun, Lit, Var
from metaguard.flowgraph import is_terminal
from metaguard.machine import (
    Closure, ErrorState, Ev, Ko, Kont, Machine, MachineConfig, abstract, concrete, parse_config, phase2, run,
)
from metaguard.machine.store import ABSENT, EMPTY_ENV, Env, FrozenMap, Obj
from metaguard.machine.values import (
    A0, FALSE, NUM_TOP, STR_TOP, TRUE, UNDEF, Addr, Num, Str, alpha, join, leq, num, V_FALSE,
)

from programs import gen_program


def _root(m):
    return m.inject(parse("0").body)


def test_eval_simple_literal():
    m = Machine(concrete())
    st = _root(m)
    lit = parse("true").body
    assert m.eval_simple(lit, EMPTY_ENV, st.store, st.kont) == frozenset([TRUE])


def test_eval_simple_variable():
    m = Machine(concrete())
    st = _root(m)
    a = Addr(("var", "v", None), 0)
    store = st.store.set(a, frozenset([num(42)]))
    assert m.eval_simple(parse("v").body, Env({"v": a}), store, st.kont) == frozenset([num(42)])


def test_eval_simple_global():
    m = Machine(concrete())
    st = _root(m)
    store = st.store.set(A0, st.store.obj(A0).with_prop("w", V_FALSE))
    assert m.eval_simple(parse("w").body, EMPTY_ENV, store, st.kont) == V_FALSE
    # absent global reads as undefined
    assert m.eval_simple(parse("nowhere").body, EMPTY_ENV, store, st.kont) == frozenset([UNDEF])


def test_eval_simple_this_at_root():
    m = Machine(concrete())
    st = _root(m)
    assert m.eval_simple(parse("this").body, EMPTY_ENV, st.store, st.kont) == frozenset([A0])


def _chain(m):
    st = _root(m)
    a, b = Addr(("obj", 1, None), 0), Addr(("obj", 2, None), 1)
    root = Obj(FrozenMap({"p": frozenset([num(1)])}))
    child = Obj(FrozenMap({"q": frozenset([num(2)])}), proto=frozenset([a]))
    return st.store.set(a, root).set(b, child), a, b


def test_lookup_prop_own_and_chain():
    m = Machine(concrete())
    store, a, b = _chain(m)
    assert m.lookup_prop(store, b, "q") == frozenset([num(2)])
    assert m.lookup_prop(store, b, "p") == frozenset([num(1)])
    assert m.lookup_prop(store, b, "r") == frozenset([UNDEF])


def test_lookup_prop_cycle_terminates():
    m = Machine(abstract("H"))
    st = _root(m)
    a, b = Addr(("obj", 1, None)), Addr(("obj", 2, None))
    store = st.store.set(a, Obj(proto=frozenset([b]))).set(b, Obj(proto=frozenset([a])))
    assert m.lookup_prop(store, a, "x") == frozenset([UNDEF])


def test_eval_call_binds_and_pushes_stack():
    m = Machine(concrete())
    p = parse("function id(v) { var h; return v; } id(7);")
    st = m.inject(p.body)
    f = next(n for n in walk(p.body) if type(n) is Fun)
    call = next(n for n in walk(p.body) if type(n) is Call)
    c = Closure(f, EMPTY_ENV)
    args = (frozenset([num(7)]),)
    k2 = Kont(call, c, args, A0, st.store)
    ev = m.eval_call(c, args, st.store, (), st.kont, k2)
    assert type(ev) is Ev and ev.kont is k2 and ev.iota == ()
    assert ev.store.lookup(ev.env["v"]) == frozenset([num(7)])
    # hoisted locals start undefined: unbound addresses read as undef
    assert m.eval_simple(Var(label=-1, span=f.span, meta=False, name="h"), ev.env, ev.store, k2) == frozenset([UNDEF])
    assert m.xi[k2] == [((), st.kont)]


def test_run_straight_line_concrete():
    g = run(parse("var a = 1; var b = a + 2; b;"), concrete())
    assert g.complete
    assert g.result_values() == frozenset([num(3)])
    assert len(g.terminals()) == 1
    for i in range(len(g)):
        assert len(g.successors(i)) == (0 if i in g.terminals() else 1)


def test_function_return_value_unchanged():
    g = run(parse("function f(x) { return x; } f('k');"), concrete())
    assert g.result_values() == frozenset([Str("k")])


def test_constructor_returns_this():
    g = run(parse("function P(v) { this.v = v; return 5; } var o = new P(3); o;"), concrete())
    (a,) = g.result_values()
    assert type(a) is Addr and a.key[0] == "this"
    (t,) = g.terminals()
    assert g.nodes[t].store.obj(a).props["v"] == frozenset([num(3)])


def test_abstract_if_explores_both_branches():
    p = parse("var x = hasDigit(prompt('p')); if (x) { 1; } else { 2; }")
    assert run(p, abstract("H")).result_values() == frozenset([num(1), num(2)])
    assert run(p, concrete(prompt="a1")).result_values() == frozenset([num(1)])
    assert run(p, concrete(prompt="ab")).result_values() == frozenset([num(2)])


def test_calling_non_callable_is_error_state():
    g = run(parse("var x = 1; x(2);"), concrete())
    (t,) = g.terminals()
    assert type(g.nodes[t]) is ErrorState
    assert g.nodes[t].node.span.start_line == 1


def test_step_budget_marks_incomplete():
    g = run(parse("var i = 0; while (true) { i = i + 1; }"), concrete(step_budget=500))
    assert not g.complete


def test_abstract_loop_terminates():
    g = run(parse("var i = 0; while (true) { i = i + 1; }"), abstract("H"))
    assert g.complete


def test_alpha():
    assert alpha(42) == frozenset([num(42)])
    assert alpha(42, "L") == frozenset([NUM_TOP])
    assert alpha("a", "H") == frozenset([Str("a")])
    assert alpha("a", "L") == frozenset([STR_TOP])
    assert alpha(True, "L") == frozenset([TRUE])


def test_widening_threshold():
    ns = [frozenset([num(i)]) for i in range(5)]
    v = ns[0]
    for i in range(1, 3):
        v = join(v, ns[i], 3)
    assert v == frozenset(num(i) for i in range(3))
    assert join(v, ns[3], 3) == frozenset([NUM_TOP])


def _param_addrs(prec_or_cfg, text="function f(x) { return x; } f(1); f(2);"):
    cfg = prec_or_cfg if isinstance(prec_or_cfg, MachineConfig) else abstract(prec_or_cfg)
    g = run(parse(text), cfg)
    out = set()
    for s in g.nodes:
        if hasattr(s, "store") and s.store is not None:
            out |= {a for a in s.store.keys() if a.key[0] == "var" and a.key[1].endswith(".x")}
    return out


def test_allocator_concrete_fresh():
    assert len(_param_addrs(concrete())) == 2


def test_allocator_low_monovariant():
    addrs = _param_addrs("L")
    assert len(addrs) == 1
    g = run(parse("function f(x) { return x; } f(1); f(2);"), abstract("L"))
    (a,) = addrs
    final = [g.nodes[t].store for t in g.terminals()]
    assert all(s.lookup(a) == frozenset([NUM_TOP]) for s in final)


def test_allocator_high_per_call_site():
    assert len(_param_addrs("H")) == 2


def test_inject_shape():
    m = Machine(abstract("H"))
    st = m.inject(parse("x").body)
    assert dict(st.env.items()) == {}
    assert list(st.store.keys()) == [A0]
    assert st.kont.is_root and st.kont.this == A0


def test_config_validation_and_file_format():
    cfg = parse_config("mode = abstract\nprecision = L  # low\nwiden_threshold = 4\nnode_ceiling = 1_000\n")
    assert (cfg.precision, cfg.widen_threshold, cfg.node_ceiling, cfg.allocator) == ("L", 4, 1000, "L")
    assert concrete().allocator == "fresh" and concrete().strong_updates
    p2 = phase2()
    assert p2.precision == "H" and p2.allocator == "fresh" and p2.strong_updates
    with pytest.raises(ValueError):
        MachineConfig(mode="abstract", precision="M")
    with pytest.raises(ValueError):
        parse_config("colour = red")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_concrete_determinism(seed):
    g = run(parse(gen_program(seed)), concrete(10_000))
    for i, s in enumerate(g.nodes):
        if not is_terminal(s):
            assert len(g.successors(i)) == 1


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from("HL"))
def test_abstract_store_monotone_along_edges(seed, prec):
    g = run(parse(gen_program(seed, 6)), abstract(prec))
    assert g.complete
    for i, j in g.edges:
        a, b = g.nodes[i], g.nodes[j]
        if type(a) in (Ev, Ko) and type(b) in (Ev, Ko):
            assert _grows(a.store, b.store)


def _grows(a, b) -> bool:
    """Pointwise order with a missing binding or property as bottom."""
    for k, v in a.items():
        if not b.bound(k):
            return False
        w = b.lookup(k)
        if type(v) is Obj:
            if type(w) is not Obj or not (v.proto <= w.proto and v.call <= w.call):
                return False
            if any(n not in w.props or not leq(x - {ABSENT}, w.props[n]) for n, x in v.props.items()):
                return False
        elif not leq(v, w):
            return False
    return True


_atoms = st.sampled_from([num(0), num(1), num(2), Str("a"), Str("b"), NUM_TOP, STR_TOP, TRUE, FALSE, UNDEF])
_vals = st.frozensets(_atoms, max_size=4)


@given(_vals, _vals, _vals)
def test_join_laws(a, b, c):
    t = 3
    assert join(a, b, t) == join(b, a, t)
    assert join(join(a, b, t), c, t) == join(a, join(b, c, t), t)
    assert join(join(a, a, t), a, t) == join(a, a, t)
    assert leq(a, join(a, b, t)) and leq(b, join(a, b, t))


@given(st.one_of(st.integers(-5, 5), st.text(max_size=3), st.booleans()),
       st.one_of(st.integers(-5, 5), st.text(max_size=3), st.booleans()))
def test_alpha_monotone(x, y):
    for prec in ("H", "L"):
        j = join(alpha(x), alpha(y))
        assert leq(alpha(x, prec), frozenset().union(*[alpha_of(v, prec) for v in j]))


def alpha_of(atom, prec):
    from metaguard.machine.values import alpha_atom
    return frozenset([alpha_atom(atom, prec)])
