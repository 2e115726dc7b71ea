"""Immutable maps, objects, environments and stores.

Everything here hashes by content and caches the hash, so machine states can
be deduplicated structurally.
"""
from __future__ import annotations

from typing import Iterable, Optional

from .values import ABSENT, Addr, BOTTOM, join as vjoin, leq as vleq


class FrozenMap:
    __slots__ = ("_d", "_h")

    def __init__(self, d: Optional[dict] = None):
        self._d = d if d is not None else {}
        self._h = None

    def __getitem__(self, k):
        return self._d[k]

    def get(self, k, default=None):
        return self._d.get(k, default)

    def __contains__(self, k):
        return k in self._d

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def items(self):
        return self._d.items()

    def keys(self):
        return self._d.keys()

    def values(self):
        return self._d.values()

    def set(self, k, v) -> "FrozenMap":
        if self._d.get(k, _MISSING) is v:
            return self
        d = dict(self._d)
        d[k] = v
        return type(self)(d)

    def update(self, pairs) -> "FrozenMap":
        d = dict(self._d)
        d.update(pairs)
        return type(self)(d)

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._d.items()))
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self):
            return NotImplemented
        if self._h is not None and other._h is not None and self._h != other._h:
            return False
        return self._d == other._d

    def __repr__(self):
        return f"{type(self).__name__}({self._d!r})"


_MISSING = object()


class Env(FrozenMap):
    """Variable name to binding address."""
    __slots__ = ()


EMPTY_ENV = Env()


class Obj:
    """Object: regular properties plus the internal ``proto`` and ``call``.

    ``summary`` is set once the address holding the object has been
    allocated more than once along a path, i.e. it may stand for several
    objects.
    """
    __slots__ = ("props", "proto", "call", "summary", "_h")

    def __init__(self, props: FrozenMap | None = None, proto: frozenset = BOTTOM,
                 call: frozenset = frozenset(), summary: bool = False):
        self.props = props if props is not None else FrozenMap()
        self.proto = proto
        self.call = call
        self.summary = summary
        self._h = None

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.props, self.proto, self.call, self.summary))
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not Obj:
            return NotImplemented
        return (hash(self) == hash(other) and self.props == other.props and self.proto == other.proto
                and self.call == other.call and self.summary == other.summary)

    def __repr__(self):
        extra = " call" if self.call else ""
        return f"Obj({dict(self.props.items())!r}, proto={set(self.proto)!r}{extra})"

    def with_prop(self, name: str, v: frozenset) -> "Obj":
        return Obj(self.props.set(name, v), self.proto, self.call, self.summary)

    def write_weak(self, name: str, v: frozenset, threshold) -> "Obj":
        old = self.props.get(name)
        if old is None:
            # a summarized object may stand for objects lacking the property
            nv = v | {ABSENT} if self.summary else v
        else:
            nv = vjoin(old, v, threshold)
        return self.with_prop(name, nv)


def join_obj(a: Obj, b: Obj, threshold, summary: bool = False) -> Obj:
    """Join of objects from different paths or allocations.

    A property present on one side only may be missing at run time, which
    is recorded with the ``ABSENT`` marker.
    """
    if a == b and not summary:
        return a
    props = {}
    for k, v in a.props.items():
        w = b.props.get(k)
        props[k] = vjoin(v, w, threshold) if w is not None else v | {ABSENT}
    for k, w in b.props.items():
        if k not in props:
            props[k] = w | {ABSENT}
    return Obj(FrozenMap(props), a.proto | b.proto, a.call | b.call,
               summary or a.summary or b.summary)


def obj_leq(a: Obj, b: Obj) -> bool:
    if not (a.proto <= b.proto and a.call <= b.call):
        return False
    for k, v in a.props.items():
        w = b.props.get(k)
        if w is None or not vleq(v - {ABSENT}, w):
            return False
        if ABSENT in v and ABSENT not in w:
            return False
    for k, w in b.props.items():
        if k not in a.props and ABSENT not in w:
            return False
    return True


class Store(FrozenMap):
    """Address to value (variable bindings) or :class:`Obj`.

    Host objects live in a shared read-only heap consulted when an address
    is not bound here; writing one copies it into the store.
    """
    __slots__ = ("host", "next_n")

    def __init__(self, d: Optional[dict] = None, host: Optional[dict] = None, next_n: int = 0):
        super().__init__(d)
        self.host = host if host is not None else {}
        self.next_n = next_n

    def set(self, k, v) -> "Store":
        d = dict(self._d)
        d[k] = v
        n = self.next_n
        if k.n is not None and k.n >= n:
            n = k.n + 1
        return Store(d, self.host, n)

    def update(self, pairs) -> "Store":
        d = dict(self._d)
        n = self.next_n
        for k, v in pairs:
            d[k] = v
            if k.n is not None and k.n >= n:
                n = k.n + 1
        return Store(d, self.host, n)

    def restrict(self, keep: Iterable[Addr]) -> "Store":
        d = {a: self._d[a] for a in keep if a in self._d}
        return Store(d, self.host, _next_n(d))

    def lookup(self, a: Addr):
        v = self._d.get(a)
        if v is None:
            v = self.host.get(a)
            if v is None:
                raise KeyError(f"address {a!r} is not bound in the store")
        return v

    def obj(self, a: Addr) -> Obj:
        v = self.lookup(a)
        if type(v) is not Obj:
            raise TypeError(f"address {a!r} holds a value, not an object")
        return v

    def bound(self, a: Addr) -> bool:
        return a in self._d or a in self.host

    def override(self, other: "Store") -> "Store":
        """This store with every binding of ``other`` taking precedence."""
        if not other._d:
            return self
        d = dict(self._d)
        d.update(other._d)
        return Store(d, self.host, max(self.next_n, other.next_n))

    def __repr__(self):
        return f"Store({len(self._d)} bindings)"


def _next_n(d) -> int:
    ns = [a.n for a in d if a.n is not None]
    return max(ns) + 1 if ns else 0


def join_entry(x, y, threshold):
    if x is None:
        return y
    if y is None:
        return x
    if type(x) is Obj and type(y) is Obj:
        return join_obj(x, y, threshold)
    if type(x) is Obj or type(y) is Obj:
        raise TypeError("cannot join an object with a value")
    return vjoin(x, y, threshold)


def join_stores(a: Store, b: Store, threshold) -> Store:
    if a is b or a == b:
        return a
    d = dict(a._d)
    for k, v in b._d.items():
        d[k] = join_entry(d.get(k), v, threshold)
    return Store(d, a.host, max(a.next_n, b.next_n))


def store_leq(a: Store, b: Store) -> bool:
    for k, v in a._d.items():
        w = b._d.get(k)
        if w is None:
            return False
        if type(v) is Obj:
            if type(w) is not Obj or not obj_leq(v, w):
                return False
        elif type(w) is Obj or not vleq(v, w):
            return False
    return True
