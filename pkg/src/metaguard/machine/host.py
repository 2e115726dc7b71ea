"""Host environment stubs standing in for browser APIs.

Host objects live in a read-only heap shared by all stores; the global
object at ``A0`` is the only binding of the initial store and refers to them.
Stub functions record their invocation as an effect (observable in concrete
runs) and otherwise do nothing.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Optional

from .state import Closure, Native
from .store import FrozenMap, Obj, Store
from .values import (
    A0, Addr, BOTTOM, FALSE, STR_TOP, Str, TRUE, UNDEF, V_BOOL, V_UNDEF, addrs,
    alpha, is_exact, num, to_number, to_str,
)


def host_addr(name: str) -> Addr:
    return Addr(("host", name))


# -- native outcomes ----------------------------------------------------------

class Ret(NamedTuple):
    value: frozenset
    store: Store
    effect: Optional[tuple] = None


class Invoke(NamedTuple):
    """Continue by calling ``callee`` (a closure or a native)."""
    callee: object
    args: tuple
    this: Addr
    store: Store
    ctor: bool = False


class HaltOut(NamedTuple):
    store: Store


class Fail(NamedTuple):
    message: str


# -- natives ----------------------------------------------------------------

def _effect(name):
    def stub(m, node, this, args, store):
        return [Ret(V_UNDEF, store, (name, tuple(args)))]
    stub.__name__ = name
    return stub


def _str_pred(test):
    def pred(m, node, this, args, store):
        s = args[0] if args else V_UNDEF
        p = args[1] if len(args) > 1 else V_UNDEF
        out = set()
        for x in s:
            for y in p:
                if is_exact(x) and is_exact(y) and type(x) is not Addr and type(y) is not Addr:
                    out.add(TRUE if test(to_str(x), to_str(y)) else FALSE)
                else:
                    out |= V_BOOL
        return [Ret(frozenset(out), store)]
    return pred


def _has_digit(s, _):
    return any(c.isdigit() for c in s)


def _has_symbol(s, _):
    return any(not c.isalnum() and not c.isspace() for c in s)


def _prompt(m, node, this, args, store):
    if m.cfg.concrete:
        return [Ret(frozenset([Str(str(m.cfg.input("prompt", "")))]), store, ("prompt", tuple(args)))]
    return [Ret(frozenset([STR_TOP]), store, ("prompt", tuple(args)))]


def _identity(m, node, this, args, store):
    return [Ret(args[0] if args else V_UNDEF, store)]


def _new_element(m, node, store, props: dict, site: str):
    a = m.alloc((site, node.label, None), store)
    o = Obj(FrozenMap(props), proto=frozenset([host_addr("Element.prototype")]))
    return a, m.bind_new(store, a, o)


def _get_element(m, node, this, args, store):
    out = []
    for k in (args[0] if args else V_UNDEF):
        if m.cfg.concrete:
            key = to_str(k)
            val = frozenset([Str(str(m.cfg.input("element:" + key, m.cfg.input("element", ""))))])
        else:
            val = frozenset([STR_TOP])
        a, s2 = _new_element(m, node, store, {"id": frozenset([k]), "value": val}, "getElementById")
        out.append(Ret(frozenset([a]), s2))
    return out


def _create_element(m, node, this, args, store):
    tag = args[0] if args else V_UNDEF
    a, s2 = _new_element(m, node, store, {"tagName": tag}, "createElement")
    return [Ret(frozenset([a]), s2, ("createElement", tuple(args)))]


def _halt(m, node, this, args, store):
    return [HaltOut(store)]


def _array_elements(m, store, arr_value) -> list[tuple]:
    """Possible element sequences of an array value."""
    out = []
    for a in addrs(arr_value):
        length = m.lookup_prop(store, a, "length")
        lengths = set()
        for ln in length:
            n = to_number(ln) if is_exact(ln) else None
            if n is None:
                # unknown length: every index the object may hold
                o = store.lookup(a)
                idx = [int(k) for k in o.props.keys() if k.isdigit()] if type(o) is Obj else []
                lengths.add(max(idx) + 1 if idx else 0)
            elif n >= 0 and n == int(n):
                lengths.add(int(n))
        for n in sorted(lengths):
            seq = tuple(m.lookup_prop(store, a, str(i)) for i in range(n))
            if seq not in out:
                out.append(seq)
    return out


def _apply(m, node, this, args, store):
    fn = args[0] if args else BOTTOM
    ths = args[1] if len(args) > 1 else V_UNDEF
    seqs = _array_elements(m, store, args[2] if len(args) > 2 else BOTTOM)
    this_addrs = addrs(ths) or [A0]
    out = []
    for callee in m.callables(store, fn):
        for seq in seqs:
            for t in this_addrs:
                out.append(Invoke(callee, seq, t, store))
    if not out and m.cfg.concrete:
        out.append(Fail("value is not a function"))
    return out


def _construct(m, node, this, args, store):
    fn = args[0] if args else BOTTOM
    seqs = _array_elements(m, store, args[1] if len(args) > 1 else BOTTOM)
    out = []
    for f in addrs(fn):
        for seq in seqs:
            out.extend(m.construct(store, f, seq, node, m.cur_state.kont))
    if not out and m.cfg.concrete:
        out.append(Fail("value is not a function"))
    return out


def _param(m, node, this, args, store):
    """Name of parameter ``i`` of a function, undefined past the arity."""
    fn = args[0] if args else BOTTOM
    idx = args[1] if len(args) > 1 else V_UNDEF
    out = set()
    for c in m.callables(store, fn):
        for i in idx:
            n = to_number(i) if is_exact(i) else None
            if isinstance(c, Closure) and n is not None and 0 <= n < len(c.fun.params) and n == int(n):
                out |= alpha(c.fun.params[int(n)], m.cfg.precision)
            elif isinstance(c, Closure) and n is not None:
                out.add(UNDEF)
            else:
                out |= {UNDEF, STR_TOP} if isinstance(c, Closure) else {UNDEF}
    return [Ret(frozenset(out) or V_UNDEF, store)]


def _arity(m, node, this, args, store):
    """Parameter count of a closure; -1 for natives."""
    fn = args[0] if args else BOTTOM
    out = set()
    for c in m.callables(store, fn):
        out.add(num(len(c.fun.params)) if isinstance(c, Closure) else num(-1))
    return [Ret(frozenset(out) or V_UNDEF, store)]


NATIVES = {
    "fetch": _effect("fetch"),
    "open": _effect("open"),
    "alert": _effect("alert"),
    "confirm": _effect("confirm"),
    "prompt": _prompt,
    "setInterval": _effect("setInterval"),
    "setTimeout": _effect("setTimeout"),
    "postMessage": _effect("postMessage"),
    "console.log": _effect("console.log"),
    "location.assign": _effect("location.assign"),
    "geolocation.getCurrentPosition": _effect("geolocation.getCurrentPosition"),
    "XMLHttpRequest": _effect("XMLHttpRequest"),
    "XMLHttpRequest.open": _effect("XMLHttpRequest.open"),
    "XMLHttpRequest.send": _effect("XMLHttpRequest.send"),
    "document.createElement": _create_element,
    "document.getElementById": _get_element,
    "hasDigit": _str_pred(_has_digit),
    "hasSymbol": _str_pred(_has_symbol),
    "startsWith": _str_pred(lambda s, p: s.startswith(p)),
    "contains": _str_pred(lambda s, p: p in s),
    "taint": _identity,
    "sink": _effect("sink"),
    "__halt": _halt,
    "__apply": _apply,
    "__construct": _construct,
    "__param": _param,
    "__arity": _arity,
}

# natives that may be invoked with ``new``
CONSTRUCTORS = {"XMLHttpRequest"}

# global name -> native (or host object) name
GLOBAL_FUNCTIONS = [
    "fetch", "open", "alert", "confirm", "prompt", "setInterval", "setTimeout",
    "postMessage", "XMLHttpRequest", "hasDigit", "hasSymbol", "startsWith",
    "contains", "taint", "sink", "__halt", "__apply", "__construct", "__param", "__arity",
]

DEFAULT_COOKIE = "session=4f2a9c"
DEFAULT_HREF = "https://app.example/"


def _fn_obj(name: str, props: Optional[dict] = None) -> Obj:
    return Obj(FrozenMap(props or {}), call=frozenset([Native(name)]))


@lru_cache(maxsize=None)
def host_heap(precision: Optional[str]) -> dict:
    """The host heap for a lattice precision (None: concrete)."""
    h: dict[Addr, Obj] = {}

    def put(name, obj):
        h[host_addr(name)] = obj
        return frozenset([host_addr(name)])

    for name in GLOBAL_FUNCTIONS:
        props = {}
        if name == "XMLHttpRequest":
            proto = put("XMLHttpRequest.prototype", Obj(FrozenMap({
                "open": put("XMLHttpRequest.open", _fn_obj("XMLHttpRequest.open")),
                "send": put("XMLHttpRequest.send", _fn_obj("XMLHttpRequest.send")),
            })))
            props["prototype"] = proto
        put(name, _fn_obj(name, props))
    put("Element.prototype", Obj())
    put("console", Obj(FrozenMap({"log": put("console.log", _fn_obj("console.log"))})))
    put("document", Obj(FrozenMap({
        "createElement": put("document.createElement", _fn_obj("document.createElement")),
        "getElementById": put("document.getElementById", _fn_obj("document.getElementById")),
        "cookie": alpha(DEFAULT_COOKIE, precision),
    })))
    put("location", Obj(FrozenMap({
        "href": alpha(DEFAULT_HREF, precision),
        "assign": put("location.assign", _fn_obj("location.assign")),
    })))
    put("geolocation", Obj(FrozenMap({
        "getCurrentPosition": put("geolocation.getCurrentPosition",
                                  _fn_obj("geolocation.getCurrentPosition")),
    })))
    put("navigator", Obj(FrozenMap({"geolocation": frozenset([host_addr("geolocation")])})))
    return h


GLOBAL_NAMES = GLOBAL_FUNCTIONS + ["console", "document", "location", "navigator"]


def global_object() -> Obj:
    props = {name: frozenset([host_addr(name)]) for name in GLOBAL_NAMES}
    props["window"] = frozenset([A0])
    return Obj(FrozenMap(props))


def initial_store(precision: Optional[str]) -> Store:
    """sigma_0: binds exactly the global object at A0."""
    return Store({A0: global_object()}, host_heap(precision), 0)
