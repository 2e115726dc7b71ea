"""Trap lookup and abstract execution of trap methods on single states."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..core_lang.syntax import (
    Call, Fun, Index, Lit, Load, MethodCall, New, NewObj, Node, Return, This, Var,
)
from ..flowgraph import explore_states
from ..machine.semantics import Machine, MachineError
from ..machine.state import Closure, ErrorState, Ev, Halt, Ko, Kont
from ..machine.store import EMPTY_ENV, FrozenMap, Obj, Store, join_stores
from ..machine.values import A0, Addr, BOTTOM, Str, alpha, join as vjoin, num
from ..rasp.traps import is_decision, operand_trap, trap_for

# frames whose pending operand is observed by read/literal notifications
_OPERAND_FRAMES = ("as", "decl", "st", "ist", "binL", "binR")
_NOTIFY_KINDS = (Var, Lit, This, NewObj, Fun)

EMPTY_META = Store()


class PolicyCodeError(Exception):
    """Trap code failed (machine error, halt, or the step ceiling)."""


@dataclass
class HandleResult:
    value: frozenset
    meta: Store
    trap: Optional[str] = None      # decision trap consulted, if any
    intercepted: bool = False
    errors: list = field(default_factory=list)


def _values(v) -> list:
    # T(v): the addresses a value mentions
    return [a for a in v if type(a) is Addr]


def _targets(x) -> list:
    """Addresses mentioned by a store entry (value or object)."""
    if type(x) is Obj:
        out = []
        for v in x.props.values():
            out.extend(_values(v))
        out.extend(_values(x.proto))
        for c in x.call:
            if isinstance(c, Closure):
                out.extend(c.env.values())
        return out
    return _values(x)


def reachable(roots, store: Store) -> frozenset:
    """Addresses reachable from ``roots`` (a value or addresses) in ``store``.

    Host objects are followed too but, living in the shared heap, never need
    to be copied into a restricted store.
    """
    todo = [a for a in roots if type(a) is Addr]
    seen = set()
    while todo:
        a = todo.pop()
        if a in seen:
            continue
        seen.add(a)
        if not store.bound(a):
            continue
        todo.extend(_targets(store.lookup(a)))
    return frozenset(seen)


def meta_addrs(store: Store, m: Machine) -> list:
    """Addresses of the global META object (empty when not linked)."""
    if not store.bound(A0) or "META" not in store.obj(A0).props:
        return []
    return sorted(_values(m.lookup_prop(store, A0, "META")), key=repr)


def trap(st, name: str, m: Machine, store: Optional[Store] = None) -> list:
    """Callables implementing trap ``name`` of META within ``st``'s store."""
    store = st.store if store is None else store
    out = []
    for a in meta_addrs(store, m):
        for c in m.callables(store, m.lookup_prop(store, a, name)):
            if c not in out:
                out.append(c)
    return out


def frame_node(fr) -> Optional[Node]:
    tag = fr[0]
    if tag in ("as", "decl"):
        return fr[3]
    if tag == "st":
        return fr[4]
    if tag in ("ist", "binL", "binR"):
        return fr[1]
    return None


@dataclass
class TrapCall:
    """One trap invocation implied by a state: ``name(*args)`` at ``node``."""
    name: str
    args: tuple             # values; lists of values become argument arrays
    node: Node
    store: Store


def trap_calls(st, m1: Machine, graph=None, n: Optional[int] = None) -> list[TrapCall]:
    """Trap invocations the execution monitor performs at state ``st``.

    Mirrors the instrumentation: operand notifications (read/literal) come
    before the operation they feed, decision traps last.
    """
    if type(st) is Ev:
        e = st.e
        if e.meta:
            return []
        t = type(e)
        env, store, kont = st.env, st.store, st.kont
        top = st.iota[-1][0] if st.iota else None
        if t in _NOTIFY_KINDS:
            if top not in _OPERAND_FRAMES:
                return []
            if t is NewObj or t is Fun:
                # the allocated value is in the successor state
                return [TrapCall(trap_for(e), (graph.node(s).value,), e, graph.node(s).store)
                        for s in sorted(graph.successors(n)) if type(graph.node(s)) is Ko]
            return [_notify(e, env, store, kont, m1)]
        if t is Return:
            return [_notify(e.arg, env, store, kont, m1, e)]
        ev = lambda s: m1.eval_simple(s, env, store, kont)
        if t is Call or t is MethodCall or t is New:
            calls = [_notify(a, env, store, kont, m1, e) for a in e.args]
            args = [ev(a) for a in e.args]
            if t is Call:
                calls.append(TrapCall(trap_for(e), (ev(e.callee), args, frozenset([A0])), e, store))
            elif t is New:
                calls.append(TrapCall(trap_for(e), (ev(e.callee), args), e, store))
            else:
                rv = ev(e.receiver)
                fv, _ = m1.get(store, rv, [e.name])
                calls.append(TrapCall(trap_for(e), (fv, args, rv), e, store))
            return calls
        if t is Load:
            return [TrapCall(trap_for(e), (ev(e.receiver), alpha(e.name, "H")), e, store)]
        if t is Index:
            return [TrapCall(trap_for(e), (ev(e.receiver), ev(e.key)), e, store)]
        return []
    if type(st) is Ko and st.iota:
        fr = st.iota[-1]
        node = frame_node(fr)
        if node is None or node.meta:
            return []
        tag = fr[0]
        if tag in ("as", "decl"):
            return [TrapCall(trap_for(node), (alpha(fr[1], "H"), st.value), node, st.store)]
        if tag == "st":
            rv = m1.eval_simple(fr[1], fr[3], st.store, st.kont)
            return [TrapCall(trap_for(node), (rv, alpha(fr[2], "H"), st.value), node, st.store)]
        if tag == "ist":
            env = fr[2]
            rv = m1.eval_simple(node.receiver, env, st.store, st.kont)
            kv = m1.eval_simple(node.key, env, st.store, st.kont)
            return [TrapCall(trap_for(node), (rv, kv, st.value), node, st.store)]
        if tag == "binR":
            return [TrapCall(trap_for(node), (alpha(node.op, "H"), fr[2], st.value), node, st.store)]
    return []


def _notify(s: Node, env, store, kont, m1: Machine, site: Optional[Node] = None) -> TrapCall:
    v = m1.eval_simple(s, env, store, kont)
    node = site if site is not None else s
    if type(s) is Var:
        return TrapCall(operand_trap(s), (alpha(s.name, "H"), v), node, store)
    return TrapCall(operand_trap(s), (v,), node, store)


class Handler:
    """Runs trap methods under the phase-2 configuration."""

    def __init__(self, m1: Machine, m2: Machine):
        self.m1 = m1
        self.m2 = m2
        self.states = 0         # phase-2 states explored, over all invocations
        self.invocations = 0

    def _args_array(self, store: Store, items: list, node: Node) -> tuple[frozenset, Store]:
        a = Addr(("args", node.label, None), store.next_n)
        props = {str(i): v for i, v in enumerate(items)}
        props["length"] = frozenset([num(len(items))])
        return frozenset([a]), store.set(a, Obj(FrozenMap(props)))

    def invoke(self, call: TrapCall, meta: Store) -> tuple[frozenset, Store, list]:
        """Run ``call`` against ``meta``: (joined value, joined result store, errors).

        Returns (BOTTOM, meta, []) when META does not define the trap.
        """
        store = call.store.override(meta)
        cs = trap(None, call.name, self.m1, store)
        if not cs:
            return BOTTOM, meta, []
        args = []
        for x in call.args:
            if isinstance(x, list):
                v, store = self._args_array(store, x, call.node)
                args.append(v)
            else:
                args.append(x)
        m2 = self.m2
        m2.reset()
        kr = Kont(None, None, (), A0, None, tag="trap")
        roots = []
        errors = []
        # the invoking state: an empty local continuation returning to kr
        dummy = Ev(call.node, EMPTY_ENV, store, (), kr)
        try:
            for a in meta_addrs(store, self.m1):
                for c in cs:
                    roots.extend(m2.invoke(c, tuple(args), a, store, call.node, dummy))
            b, complete = explore_states(m2.step, roots, m2.cfg.node_ceiling, woken=m2.take_woken)
        except (MachineError, KeyError, TypeError, RecursionError) as exc:
            return BOTTOM, meta, [f"{call.name}: {exc}"]
        self.invocations += 1
        self.states += len(b.nodes)
        if not complete:
            errors.append(f"{call.name}: trap exceeded {m2.cfg.node_ceiling} states")
        value = BOTTOM
        out = None
        thr = m2.cfg.threshold
        for st in b.nodes:
            if type(st) is Ko and not st.iota and st.kont == kr:
                value = vjoin(value, st.value, thr)
                out = st.store if out is None else join_stores(out, st.store, thr)
            elif type(st) is Halt:
                errors.append(f"{call.name}: trap code halted")
            elif type(st) is ErrorState:
                errors.append(f"{call.name}: {st.message}")
        if out is None:
            if not errors:
                errors.append(f"{call.name}: trap never returned")
            return BOTTOM, meta, errors
        return value, restrict_meta(out, self.m1), errors

    def handle(self, st, meta: Store, graph=None, n: Optional[int] = None) -> HandleResult:
        calls = trap_calls(st, self.m1, graph, n)
        if not calls:
            return HandleResult(BOTTOM, meta)
        value = BOTTOM
        res = HandleResult(BOTTOM, meta)
        cur = meta
        for call in calls:
            v, cur, errs = self.invoke(call, cur)
            res.errors.extend(errs)
            if v or errs:
                res.intercepted = True
            if is_decision(call.name):
                res.trap = call.name
                value = v
        res.value = value
        res.meta = cur
        return res


def restrict_meta(store: Store, m: Machine) -> Store:
    """The part of ``store`` reachable from META."""
    roots = meta_addrs(store, m)
    return store.restrict(reachable(roots, store))
