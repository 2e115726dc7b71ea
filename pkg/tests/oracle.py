"""Trace-replay soundness checker.

Maps every state of a concrete run into the abstract domain (values through
alpha, fresh addresses through the allocator quotient, stack addresses
through the call-string abstraction) and checks that some abstract node
covers it, and that each concrete edge is matched by an abstract edge.

The mapping is written from the state definitions alone; it does not call
the machine's transition function.
"""
from __future__ import annotations

from metaguard.core_lang.syntax import Node
from metaguard.machine.state import Closure, ErrorState, Ev, Halt, Ko, Kont, Native
from metaguard.machine.store import ABSENT, Env, Obj, Store
from metaguard.machine.values import Addr, Num, Str, alpha_atom, leq


class Mapper:
    def __init__(self, precision: str, xi: dict, abstract_root: Kont, kont_depth: int):
        self.prec = precision
        self.xi = xi
        self.root = abstract_root
        self.depth = kont_depth
        self._k: dict[int, Kont] = {}

    def addr(self, a: Addr) -> Addr:
        if a.n is None:
            return a
        return Addr(a.key) if self.prec == "H" else Addr(a.key[:2])

    def atom(self, x):
        if type(x) is Addr:
            return self.addr(x)
        if type(x) in (Num, Str):
            return alpha_atom(x, self.prec)
        return x

    def value(self, v: frozenset) -> frozenset:
        return frozenset(self.atom(x) for x in v)

    def env(self, e: Env) -> Env:
        return Env({k: self.addr(a) for k, a in e.items()})

    def callable(self, c):
        if type(c) is Closure:
            return Closure(c.fun, self.env(c.env))
        return c

    def obj(self, o: Obj) -> Obj:
        from metaguard.machine.store import FrozenMap
        return Obj(FrozenMap({k: self.value(v) for k, v in o.props.items()}), self.value(o.proto),
                   frozenset(self.callable(c) for c in o.call), o.summary)

    def frame(self, fr: tuple) -> tuple:
        return tuple(self.part(x) for x in fr)

    def part(self, x):
        if type(x) is frozenset:
            return self.value(x)
        if isinstance(x, Env):
            return self.env(x)
        if type(x) is Addr:
            return self.addr(x)
        if type(x) is Closure:
            return self.callable(x)
        return x

    def kont(self, k: Kont) -> Kont:
        got = self._k.get(id(k))
        if got is not None:
            return got
        if k.c is None:
            out = self.root
        else:
            entries = self.xi[k]
            caller = entries[0][1]
            ctx = ((caller.site,) + self.kont(caller).ctx)[:self.depth] if self.depth else ()
            out = Kont(k.e, self.callable(k.c), tuple(self.value(a) for a in k.args), self.addr(k.this),
                       None, k.ctor, tag=k.tag, ctx=ctx)
        self._k[id(k)] = out
        return out


def _obj_leq(c: Obj, a: Obj) -> bool:
    if not (c.proto <= a.proto and c.call <= a.call):
        return False
    for k, v in c.props.items():
        w = a.props.get(k)
        if w is None or not leq(v - {ABSENT}, w):
            return False
    for k, w in a.props.items():
        if k not in c.props and ABSENT not in w:
            return False
    return True


def store_covered(m: Mapper, cs: Store, ast: Store) -> bool:
    for a, x in cs.items():
        aa = m.addr(a)
        if not ast.bound(aa):
            return False
        y = ast.lookup(aa)
        if type(x) is Obj:
            if type(y) is not Obj or not _obj_leq(m.obj(x), y):
                return False
        elif type(y) is Obj or not leq(m.value(x), y):
            return False
    return True


def _leq(x, y) -> bool:
    """Order on mapped structures: values by the lattice, the rest exactly."""
    if type(x) is frozenset:
        return type(y) is frozenset and leq(x, y)
    if type(x) is tuple:
        return type(y) is tuple and len(x) == len(y) and all(_leq(a, b) for a, b in zip(x, y))
    if isinstance(x, Node):
        return x is y
    return x == y


def kont_leq(x: Kont, y: Kont) -> bool:
    if x is y:
        return True
    return (x.e is y.e and x.c == y.c and x.this == y.this and x.ctor == y.ctor and x.tag == y.tag
            and x.ctx == y.ctx and len(x.args) == len(y.args)
            and all(leq(a, b) for a, b in zip(x.args, y.args)))


def _iota_leq(m: Mapper, ci: tuple, ai: tuple) -> bool:
    return len(ci) == len(ai) and all(_leq(m.frame(f), g) for f, g in zip(ci, ai))


def covers(m: Mapper, c, a) -> bool:
    """Whether abstract state ``a`` covers concrete state ``c``."""
    if type(c) is not type(a):
        return False
    if type(c) is Ev:
        return (c.e is a.e and m.env(c.env) == a.env and kont_leq(m.kont(c.kont), a.kont)
                and _iota_leq(m, c.iota, a.iota) and store_covered(m, c.store, a.store))
    if type(c) is Ko:
        return (leq(m.value(c.value), a.value) and kont_leq(m.kont(c.kont), a.kont)
                and _iota_leq(m, c.iota, a.iota) and store_covered(m, c.store, a.store))
    if type(c) is Halt:
        return c.site is a.site and store_covered(m, c.store, a.store)
    if type(c) is ErrorState:
        return c.node is a.node
    return False


def _control(st):
    if type(st) is Ev:
        return ("ev", id(st.e), len(st.iota))
    if type(st) is Ko:
        return ("ko", len(st.iota), st.kont.site)
    if type(st) is Halt:
        return ("halt", id(st.site))
    return ("err", id(getattr(st, "node", None)))


class SimulationResult:
    def __init__(self, states: int, edges: int, unmatched_states: list, unmatched_edges: list):
        self.states = states
        self.edges = edges
        self.unmatched_states = unmatched_states
        self.unmatched_edges = unmatched_edges

    @property
    def ok(self) -> bool:
        return not self.unmatched_states and not self.unmatched_edges


def check_simulation(cg, cxi: dict, ag, precision: str, kont_depth: int) -> SimulationResult:
    """Map the concrete graph ``cg`` (whose machine's stack store is ``cxi``)
    into the abstract graph ``ag``."""
    m = Mapper(precision, cxi, ag.nodes[ag.root].kont, kont_depth)
    index: dict[tuple, list[int]] = {}
    for i, st in enumerate(ag.nodes):
        index.setdefault(_control(st), []).append(i)
    matches: dict[int, set] = {}
    bad_states = []
    for i, st in enumerate(cg.nodes):
        ms = {j for j in index.get(_control(st), ()) if covers(m, st, ag.nodes[j])}
        matches[i] = ms
        if not ms:
            bad_states.append(i)
    aedges = set(ag.edges)
    bad_edges = []
    for i, j in cg.edges:
        if not any((a, b) in aedges for a in matches[i] for b in matches[j]):
            bad_edges.append((i, j))
    return SimulationResult(len(cg), len(cg.edges), bad_states, bad_edges)
