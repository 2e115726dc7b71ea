"""Transition relation of the machine.

One :class:`Machine` instance fixes a configuration (abstraction of
literals, allocation policy, update mode).  :meth:`Machine.step` maps a
state to the list of its successors in a deterministic order.
"""
from __future__ import annotations

import re
from typing import Iterable, Optional

from ..core_lang.syntax import (
    Assign, Binary, Call, Fun, If, Index, IndexStore, Lit, Load, MethodCall, New,
    NewObj, Node, Return, Seq, Store as StoreNode, This, Var, VarDecl, While,
)
from .config import MachineConfig
from .host import CONSTRUCTORS, NATIVES, Fail, HaltOut, Invoke, Ret, host_addr, initial_store
from .state import Closure, ErrorState, Ev, Halt, Ko, Kont, Native, State
from .store import EMPTY_ENV, Env, FrozenMap, Obj, Store, join_obj
from .values import (
    A0, ABSENT, Addr, BOTTOM, STR_TOP, NUM_TOP, Str, UNDEF, V_UNDEF, alpha, alpha_atom,
    binary as vbinary, is_exact, join as vjoin, num, prop_key, truthiness, TRUE, FALSE,
)

TEMP_NAME = re.compile(r"\$[a-z]\d+")

# summary property receiving writes through unknown computed keys
ANY_KEY = "*"

def atom_key(a) -> tuple:
    t = type(a)
    if t is Addr:
        return (4, repr(a))
    return (0, repr(a))


def sorted_atoms(v) -> list:
    return sorted(v, key=atom_key)


def canon(x) -> str:
    """Deterministic text key for machine objects (used to order choices)."""
    if isinstance(x, tuple):
        return "(" + ",".join(canon(y) for y in x) + ")"
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(canon(y) for y in x)) + "}"
    if isinstance(x, Store):
        return "S[" + ",".join(sorted(f"{a!r}={canon(v)}" for a, v in x.items())) + "]"
    if isinstance(x, FrozenMap):
        return "M[" + ",".join(sorted(f"{canon(k)}={canon(v)}" for k, v in x.items())) + "]"
    if isinstance(x, Obj):
        return f"O({canon(x.props)},{canon(x.proto)},{canon(x.call)},{x.summary})"
    if isinstance(x, Closure):
        return f"C({x.fun.label},{canon(x.env)})"
    if isinstance(x, Kont):
        if x.is_root:
            return f"K0({x.tag},{x.this!r})"
        return f"K({x.site},{canon(x.c)},{canon(x.args)},{x.this!r},{x.ctor},{x.ctx},{canon(x.store)})"
    if isinstance(x, Node):
        return f"#{x.label}"
    return repr(x)


class MachineError(Exception):
    """An internal invariant of the machine was violated."""


class Machine:
    def __init__(self, cfg: MachineConfig):
        self.cfg = cfg
        self.prec = cfg.precision
        self.thr = cfg.threshold
        self.strong = cfg.strong_updates
        # effects recorded by host stubs, in order (meaningful for concrete runs)
        self.effects: list[tuple] = []
        # the Ev state whose call is being served by a native
        self.cur_state: Optional[Ev] = None
        self.reset()

    def reset(self):
        """Forget the stack store (Xi) of a previous exploration."""
        # Xi: stack address -> return points (local continuation, caller kont)
        self.xi: dict[Kont, list] = {}
        self._xi_sets: dict[Kont, set] = {}
        # states that returned through a stack address, re-stepped whenever
        # a new return point for that address appears
        self.returns: dict[Kont, dict] = {}
        self.woken: list[State] = []

    def push_kont(self, k: Kont, entry: tuple):
        seen = self._xi_sets.setdefault(k, set())
        if entry in seen:
            return
        seen.add(entry)
        self.xi.setdefault(k, []).append(entry)
        self.woken.extend(self.returns.get(k, ()))

    def take_woken(self) -> list[State]:
        w, self.woken = self.woken, []
        return w

    # -- allocation and binding --------------------------------------------

    def alloc(self, key: tuple, store: Store, offset: int = 0) -> Addr:
        """Address for ``key = (kind, site, ctx)``.

        fresh: keeps the full key plus a serial; H: site and call-site
        context; L: site only.
        """
        pol = self.cfg.allocator
        if pol == "fresh":
            return Addr(key, store.next_n + offset)
        if pol == "H":
            return Addr(key)
        return Addr(key[:2])

    def bind_new(self, store: Store, a: Addr, o: Obj) -> Store:
        if self.strong or a not in store:
            return store.set(a, o)
        old = store.lookup(a)
        return store.set(a, join_obj(old, o, self.thr, summary=True))

    def write_addr(self, store: Store, a: Addr, v: frozenset) -> Store:
        if self.strong or a not in store:
            return store.set(a, v)
        return store.set(a, vjoin(store[a], v, self.thr))

    def write_prop(self, store: Store, a: Addr, name: str, v: frozenset, strong: bool) -> Store:
        o = store.obj(a)
        if strong:
            return store.set(a, o.with_prop(name, v))
        return store.set(a, o.write_weak(name, v, self.thr))

    # -- auxiliary evaluation ----------------------------------------------

    def eval_simple(self, s: Node, env: Env, store: Store, kont: Kont) -> frozenset:
        t = type(s)
        if t is Var:
            a = env.get(s.name)
            if a is not None:
                # hoisted variables stay unbound until their first write
                return store.lookup(a) if a in store else V_UNDEF
            return self.lookup_prop(store, A0, s.name)
        if t is Lit:
            # META's literals configure the policy; they keep full precision
            return alpha(s.value, "H" if s.meta and self.prec else self.prec)
        if t is This:
            return frozenset([kont.this])
        raise MachineError(f"not a simple expression: {s!r}")

    def lookup_prop(self, store: Store, a: Addr, name: str) -> frozenset:
        out = set()
        seen = set()
        todo = [a]
        while todo:
            cur = todo.pop()
            if cur in seen:
                out.add(UNDEF)
                continue
            seen.add(cur)
            o = store.obj(cur)
            v = o.props.get(name)
            if v is not None:
                if ABSENT not in v:
                    out |= v
                    continue
                out |= v - {ABSENT}
            if not o.proto:
                out.add(UNDEF)
            else:
                todo.extend(o.proto)
        return frozenset(out)

    def all_props(self, store: Store, a: Addr) -> frozenset:
        """Join of every property along the chain (read through an unknown key)."""
        out = {UNDEF}
        seen = set()
        todo = [a]
        while todo:
            cur = todo.pop()
            if cur in seen:
                continue
            seen.add(cur)
            o = store.obj(cur)
            for v in o.props.values():
                out |= v
            todo.extend(o.proto)
        out.discard(ABSENT)
        return frozenset(out)

    def prim_prop(self, atom, name: Optional[str]) -> Optional[frozenset]:
        """Property of a primitive: only string ``length`` is supported."""
        if name == "length" or name is None:
            if type(atom) is Str:
                return frozenset([alpha_atom(num(len(atom.c)), self.prec)])
            if atom is STR_TOP:
                return frozenset([NUM_TOP])
        return None

    def get(self, store: Store, recv: frozenset, names: list) -> tuple[frozenset, bool]:
        """Read property ``names`` (None for unknown) of every receiver atom.

        Returns the joined value and whether some receiver atom was invalid.
        """
        out = BOTTOM
        bad = False
        for atom in recv:
            for name in names:
                if type(atom) is Addr:
                    v = self.lookup_prop(store, atom, name) if name is not None else self.all_props(store, atom)
                    if name is not None and ANY_KEY in store.obj(atom).props:
                        v = v | (store.obj(atom).props[ANY_KEY] - {ABSENT})
                else:
                    v = self.prim_prop(atom, name)
                    if v is None:
                        bad = True
                        continue
                out = out | v
        return out, bad

    def callables(self, store: Store, fv: frozenset) -> list:
        out = []
        for atom in sorted_atoms(fv):
            if type(atom) is not Addr:
                continue
            o = store.lookup(atom)
            if type(o) is Obj:
                for c in o.call:
                    if c not in out:
                        out.append(c)
        if len(out) > 1:
            out.sort(key=canon)
        return out

    def eval_call(self, c: Closure, args: tuple, store: Store, iota: tuple, kont: Kont,
                  kont2: Kont) -> Ev:
        f = c.fun
        ctx = kont2.site
        env = dict(c.env.items())
        s = store
        for i, name in enumerate(f.params):
            a = self.alloc(("var", f"{f.label}.{name}", ctx), s)
            env[name] = a
            s = self.write_addr(s, a, args[i] if i < len(args) else V_UNDEF)
        for name in f.hoisted:
            a = self.alloc(("var", f"{f.label}.{name}", ctx), s)
            env[name] = a
            # an unbound address reads as undefined; a reused one may also
            # hold values from an earlier activation.  Normalizer temps are
            # always written before they are read, so they skip the reset.
            if a in s and not TEMP_NAME.fullmatch(name):
                s = self.write_addr(s, a, V_UNDEF)
        self.push_kont(kont2, (iota, kont))
        return Ev(f.body, Env(env), s, (), kont2)

    def construct(self, store: Store, f: Addr, args: tuple, node: Node, kont: Kont) -> list:
        """Outcomes of ``new`` on the function object at ``f``."""
        o = store.lookup(f)
        if type(o) is not Obj:
            return []
        out = []
        for c in sorted(o.call, key=canon) if len(o.call) > 1 else o.call:
            if isinstance(c, Native):
                if c.name not in CONSTRUCTORS:
                    out.append(Fail(f"{c.name} is not a constructor"))
                    continue
                proto = self.lookup_prop(store, f, "prototype")
                a = self.alloc(("this", node.label, kont.site), store)
                s2 = self.bind_new(store, a, Obj(proto=frozenset(x for x in proto if type(x) is Addr)))
                out.append(Ret(frozenset([a]), s2, (c.name, tuple(args))))
                continue
            proto = self.lookup_prop(store, f, "prototype")
            a = self.alloc(("this", node.label, kont.site), store)
            s2 = self.bind_new(store, a, Obj(proto=frozenset(x for x in proto if type(x) is Addr)))
            out.append(Invoke(c, tuple(args), a, s2, True))
        return out

    # -- calls -------------------------------------------------------------

    def invoke(self, callee, args: tuple, this: Addr, store: Store, node: Node, st: Ev,
               ctor: bool = False, depth: int = 0) -> list[State]:
        if isinstance(callee, Closure):
            # abstract stack addresses omit the store, which would otherwise
            # multiply contexts by every store variant reaching the call
            if self.cfg.concrete:
                k2 = Kont(node, callee, args, this, store, ctor)
            else:
                k = st.kont
                ctx = ((k.site,) + k.ctx)[:self.cfg.kont_depth] if self.cfg.kont_depth else ()
                k2 = Kont(node, callee, args, this, None, ctor, ctx=ctx)
            return [self.eval_call(callee, args, store, st.iota, st.kont, k2)]
        fn = NATIVES.get(callee.name)
        if fn is None:
            raise MachineError(f"unknown native {callee.name}")
        self.cur_state = st
        return self.outcomes(fn(self, node, this, list(args), store), node, st, depth)

    def outcomes(self, outs, node: Node, st: Ev, depth: int = 0) -> list[State]:
        res = []
        for o in outs:
            if type(o) is Ret:
                if o.effect is not None and self.cfg.concrete:
                    self.effects.append(o.effect)
                res.append(Ko(o.value, o.store, st.iota, st.kont))
            elif type(o) is Invoke:
                if depth > 8:
                    res.append(ErrorState("native call nesting too deep", node))
                else:
                    res.extend(self.invoke(o.callee, o.args, o.this, o.store, node, st, o.ctor, depth + 1))
            elif type(o) is HaltOut:
                res.append(Halt(st.kont.e, o.store))
            elif type(o) is Fail:
                res.append(ErrorState(o.message, node))
        return res

    def not_callable(self, node: Node) -> list[State]:
        if self.cfg.concrete:
            return [ErrorState("value is not a function", node)]
        return []

    # -- the transition relation -------------------------------------------

    def step(self, st: State) -> list[State]:
        if type(st) is Ev:
            return self.step_ev(st)
        if type(st) is Ko:
            return self.step_ko(st)
        return []

    def step_ev(self, st: Ev) -> list[State]:
        e = st.e
        t = type(e)
        env, store, iota, kont = st.env, st.store, st.iota, st.kont
        if t is Var or t is Lit or t is This:
            return [Ko(self.eval_simple(e, env, store, kont), store, iota, kont)]
        if t is Seq:
            return [Ev(e.first, env, store, iota + (("seq", e.second, env),), kont)]
        if t is Assign:
            return [Ev(e.rhs, env, store, iota + (("as", e.name, env, e),), kont)]
        if t is VarDecl:
            return [Ev(e.init, env, store, iota + (("decl", e.name, env, e),), kont)]
        if t is StoreNode:
            return [Ev(e.rhs, env, store, iota + (("st", e.receiver, e.name, env, e),), kont)]
        if t is IndexStore:
            return [Ev(e.rhs, env, store, iota + (("ist", e, env),), kont)]
        if t is Binary:
            return [Ev(e.left, env, store, iota + (("binL", e, env),), kont)]
        if t is Call:
            fv = self.eval_simple(e.callee, env, store, kont)
            args = tuple(self.eval_simple(a, env, store, kont) for a in e.args)
            cs = self.callables(store, fv)
            out = []
            for c in cs:
                out.extend(self.invoke(c, args, A0, store, e, st))
            if not cs or self._has_noncallable(store, fv):
                out.extend(self.not_callable(e))
            return out
        if t is MethodCall:
            rv = self.eval_simple(e.receiver, env, store, kont)
            args = tuple(self.eval_simple(a, env, store, kont) for a in e.args)
            out = []
            bad = False
            for a in sorted_atoms(rv):
                if type(a) is not Addr:
                    bad = True
                    continue
                fv = self.lookup_prop(store, a, e.name)
                cs = self.callables(store, fv)
                if not cs or self._has_noncallable(store, fv):
                    bad = True
                for c in cs:
                    out.extend(self.invoke(c, args, a, store, e, st))
            if bad:
                out.extend(self.not_callable(e))
            return out
        if t is New:
            fv = self.eval_simple(e.callee, env, store, kont)
            args = tuple(self.eval_simple(a, env, store, kont) for a in e.args)
            out = []
            bad = False
            for a in sorted_atoms(fv):
                if type(a) is not Addr:
                    bad = True
                    continue
                outs = self.construct(store, a, args, e, kont)
                if not outs:
                    bad = True
                out.extend(self.outcomes(outs, e, st))
            if bad:
                out.extend(self.not_callable(e))
            return out
        if t is Return:
            return [Ko(self.eval_simple(e.arg, env, store, kont), store, (), kont)]
        if t is Load:
            rv = self.eval_simple(e.receiver, env, store, kont)
            v, bad = self.get(store, rv, [e.name])
            return self._load_result(v, bad, e, store, iota, kont)
        if t is Index:
            rv = self.eval_simple(e.receiver, env, store, kont)
            kv = self.eval_simple(e.key, env, store, kont)
            names = sorted({prop_key(k) for k in kv}, key=lambda n: (n is None, n or ""))
            v, bad = self.get(store, rv, names)
            return self._load_result(v, bad, e, store, iota, kont)
        if t is If:
            tv = truthiness(self.eval_simple(e.test, env, store, kont))
            out = []
            if TRUE in tv:
                out.append(Ev(e.cons, env, store, iota, kont))
            if FALSE in tv:
                out.append(Ev(e.alt, env, store, iota, kont))
            return out
        if t is While:
            tv = truthiness(self.eval_simple(e.test, env, store, kont))
            out = []
            if TRUE in tv:
                out.append(Ev(e.body, env, store, iota + (("loop", e, env),), kont))
            if FALSE in tv:
                out.append(Ko(V_UNDEF, store, iota, kont))
            return out
        if t is Fun:
            ctx = kont.site
            a = self.alloc(("fun", e.label, ctx), store)
            ap = self.alloc(("proto", e.label, ctx), store, 1)
            fo = Obj(FrozenMap({"prototype": frozenset([ap])}), call=frozenset([Closure(e, env)]))
            s = self.bind_new(self.bind_new(store, ap, Obj()), a, fo)
            return [Ko(frozenset([a]), s, iota, kont)]
        if t is NewObj:
            a = self.alloc(("obj", e.label, kont.site), store)
            props = {"length": alpha(0, self.prec)} if e.kind == "array" else {}
            s = self.bind_new(store, a, Obj(FrozenMap(props)))
            return [Ko(frozenset([a]), s, iota, kont)]
        raise MachineError(f"no rule for {e!r}")

    def _has_noncallable(self, store: Store, fv: frozenset) -> bool:
        for atom in fv:
            if type(atom) is not Addr:
                return True
            o = store.lookup(atom)
            if type(o) is not Obj or not o.call:
                return True
        return False

    def _load_result(self, v, bad, e, store, iota, kont) -> list[State]:
        out = []
        if v:
            out.append(Ko(v, store, iota, kont))
        if bad and self.cfg.concrete:
            return [ErrorState("property read on a primitive value", e)]
        return out

    def step_ko(self, st: Ko) -> list[State]:
        v, store, iota, kont = st.value, st.store, st.iota, st.kont
        if not iota:
            if kont.is_root:
                return []
            entries = self.xi.get(kont)
            rs = self.returns.setdefault(kont, {})
            rs.setdefault(st, None)
            if not entries:
                raise MachineError(f"no return point for {kont!r}")
            rv = frozenset([kont.this]) if kont.ctor else v
            if len(entries) > 1:
                entries = sorted(entries, key=canon)
            return [Ko(rv, store, i2, k2) for i2, k2 in entries]
        fr = iota[-1]
        rest = iota[:-1]
        tag = fr[0]
        if tag == "seq":
            return [Ev(fr[1], fr[2], store, rest, kont)]
        if tag == "as" or tag == "decl":
            name, env = fr[1], fr[2]
            a = env.get(name)
            if a is not None:
                s = self.write_addr(store, a, v)
            else:
                s = self.write_prop(store, A0, name, v, self.strong)
            return [Ko(v, s, rest, kont)]
        if tag == "st":
            rv = self.eval_simple(fr[1], fr[3], store, kont)
            return self._store(rv, [fr[2]], v, store, rest, kont, fr[1])
        if tag == "ist":
            node, env = fr[1], fr[2]
            rv = self.eval_simple(node.receiver, env, store, kont)
            kv = self.eval_simple(node.key, env, store, kont)
            names = sorted({prop_key(k) for k in kv}, key=lambda n: (n is None, n or ""))
            return self._store(rv, names, v, store, rest, kont, node)
        if tag == "loop":
            return [Ev(fr[1], fr[2], store, rest, kont)]
        if tag == "binL":
            node = fr[1]
            return [Ev(node.right, fr[2], store, rest + (("binR", node, v),), kont)]
        if tag == "binR":
            node = fr[1]
            r = vbinary(node.op, fr[2], v, self.prec)
            return [Ko(r, store, rest, kont)]
        raise MachineError(f"unknown frame {tag}")

    def _store(self, rv, names, v, store, rest, kont, node) -> list[State]:
        targets = [a for a in sorted_atoms(rv) if type(a) is Addr]
        bad = len(targets) != len(rv)
        if bad and self.cfg.concrete:
            return [ErrorState("property write on a primitive value", node)]
        if not targets:
            return []
        strong = self.strong and len(targets) == 1 and len(names) == 1 and names[0] is not None
        s = store
        for a in targets:
            for name in names:
                if name is None:
                    o = s.obj(a)
                    for k in list(o.props.keys()):
                        s = self.write_prop(s, a, k, v, False)
                    s = self.write_prop(s, a, ANY_KEY, v, False)
                else:
                    s = self.write_prop(s, a, name, v, strong)
        return [Ko(v, s, rest, kont)]

    # -- injection ----------------------------------------------------------

    def initial_store(self) -> Store:
        return initial_store(self.prec)

    def inject(self, body: Node) -> Ev:
        s0 = self.initial_store()
        k0 = Kont(None, None, (), A0, s0)
        self.reset()
        return Ev(body, EMPTY_ENV, s0, (), k0)
