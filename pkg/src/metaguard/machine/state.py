"""Machine states, continuations and closures."""
from __future__ import annotations

from typing import Optional

from ..core_lang.syntax import Fun, Node
from .store import Env, Store
from .values import Addr


class Closure:
    """A callable ``(f, rho)``."""
    __slots__ = ("fun", "env", "_h")

    def __init__(self, fun: Fun, env: Env):
        self.fun = fun
        self.env = env
        self._h = hash((fun.label, id(fun), env))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return type(other) is Closure and self.fun is other.fun and self.env == other.env

    def __repr__(self):
        return f"<closure {self.fun.display_name}>"


class Native:
    """A host function, identified by name."""
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __hash__(self):
        return hash(("native", self.name))

    def __eq__(self, other):
        return type(other) is Native and self.name == other.name

    def __repr__(self):
        return f"<native {self.name}>"


class Kont:
    """Call-site record ``(e, c, args, a_this, sigma)``; also a stack address.

    Return points live in the machine's stack store Xi, shared by all states
    of one exploration.

    ``e`` is None for the root context and for trap invocations made by the
    explorer.  ``ctor`` marks constructor calls, which return ``a_this``.
    """
    __slots__ = ("e", "c", "args", "this", "store", "ctor", "tag", "ctx", "_h")

    def __init__(self, e: Optional[Node], c, args: tuple, this: Addr, store: Store,
                 ctor: bool = False, tag: str = "", ctx: tuple = ()):
        self.e = e
        self.c = c
        self.args = args
        self.this = this
        self.store = store
        self.ctor = ctor
        self.tag = tag
        # call sites of the enclosing activations (abstract stack addresses only)
        self.ctx = ctx
        self._h = hash((id(e), c, args, this, store, ctor, tag, ctx))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Kont and self._h == other._h and self.e is other.e and self.c == other.c
                and self.args == other.args and self.this == other.this and self.ctor == other.ctor
                and self.tag == other.tag and self.ctx == other.ctx and self.store == other.store)

    @property
    def is_root(self) -> bool:
        return self.c is None

    @property
    def site(self) -> Optional[int]:
        return self.e.label if self.e is not None else None

    def __repr__(self):
        if self.c is None:
            return f"<root{':' + self.tag if self.tag else ''}>"
        return f"<kont {self.e!r} {self.c!r}>"


# Frames are plain tuples whose first element names the kind:
#   ("as", name, env, node)      assignment to a variable
#   ("decl", name, env, node)    variable declaration
#   ("st", receiver, name, env, node)  property store, receiver is a Simple node
#   ("ist", node, env)           computed-key store, node is the IndexStore
#   ("seq", second, env)
#   ("loop", while_node, env)
#   ("binL", node, env)          left operand of a Binary is being evaluated
#   ("binR", node, left_value)   right operand; left value kept


class State:
    __slots__ = ()
    terminal = False


class Ev(State):
    __slots__ = ("e", "env", "store", "iota", "kont", "_h")

    def __init__(self, e: Node, env: Env, store: Store, iota: tuple, kont: Kont):
        self.e = e
        self.env = env
        self.store = store
        self.iota = iota
        self.kont = kont
        self._h = None

    def __hash__(self):
        if self._h is None:
            self._h = hash(("ev", id(self.e), self.env, self.store, self.iota, self.kont))
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Ev and hash(self) == hash(other) and self.e is other.e
                and self.env == other.env and self.iota == other.iota and self.kont == other.kont
                and self.store == other.store)

    def __repr__(self):
        return f"Ev({self.e!r})"


class Ko(State):
    __slots__ = ("value", "store", "iota", "kont", "_h")

    def __init__(self, value: frozenset, store: Store, iota: tuple, kont: Kont):
        self.value = value
        self.store = store
        self.iota = iota
        self.kont = kont
        self._h = None

    @property
    def terminal(self):
        return not self.iota and self.kont.is_root

    def __hash__(self):
        if self._h is None:
            self._h = hash(("ko", self.value, self.store, self.iota, self.kont))
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Ko and hash(self) == hash(other) and self.value == other.value
                and self.iota == other.iota and self.kont == other.kont
                and self.store == other.store)

    def __repr__(self):
        return f"Ko({sorted(map(repr, self.value))})"


class Halt(State):
    """The monitor requested a halt.  ``site`` is the call node of the
    execution-monitor method that invoked the halt intrinsic."""
    __slots__ = ("site", "store")
    terminal = True

    def __init__(self, site: Optional[Node], store: Store):
        self.site = site
        self.store = store

    def __hash__(self):
        return hash(("halt", id(self.site), self.store))

    def __eq__(self, other):
        return type(other) is Halt and self.site is other.site and self.store == other.store

    def __repr__(self):
        return f"Halt({self.site!r})"


class ErrorState(State):
    """Run-time error terminal (e.g. calling a non-callable)."""
    __slots__ = ("message", "node")
    terminal = True

    def __init__(self, message: str, node: Optional[Node]):
        self.message = message
        self.node = node

    def __hash__(self):
        return hash(("err", self.message, id(self.node)))

    def __eq__(self, other):
        return type(other) is ErrorState and self.message == other.message and self.node is other.node

    def __repr__(self):
        return f"Error({self.message!r} at {self.node!r})"
