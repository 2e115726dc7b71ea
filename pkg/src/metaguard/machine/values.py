"""Abstract values: finite sets of addresses and primitive lattice elements.

A value is a ``frozenset`` of atoms.  Atoms are :class:`Addr`, the singletons
``UNDEF``, ``TRUE``, ``FALSE``, ``NUM_TOP``, ``STR_TOP`` and the constant
wrappers :class:`Num` and :class:`Str`.  The empty set is bottom.

``ABSENT`` never escapes an object's property table: it marks a property that
may be missing on some of the merged paths, so lookup continues along the
prototype chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


class _Token:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return (_token, (self.name,))


_TOKENS: dict[str, _Token] = {}


def _token(name):
    if name not in _TOKENS:
        _TOKENS[name] = _Token(name)
    return _TOKENS[name]


UNDEF = _token("undef")
TRUE = _token("true")
FALSE = _token("false")
NUM_TOP = _token("NumTop")
STR_TOP = _token("StrTop")
ABSENT = _token("absent")


@dataclass(frozen=True, slots=True)
class Num:
    c: Optional[float]  # None is NaN

    def __repr__(self):
        return f"Num({fmt_num(self.c)})"


@dataclass(frozen=True, slots=True)
class Str:
    c: str

    def __repr__(self):
        return f"Str({self.c!r})"


@dataclass(frozen=True, slots=True)
class Addr:
    # key: abstract identity (kind, site, context); n: serial of a freshly
    # allocated (concrete) address, None for abstract addresses
    key: tuple
    n: Optional[int] = None

    def __repr__(self):
        base = ":".join(str(k) for k in self.key)
        return f"@{base}" if self.n is None else f"@{base}#{self.n}"

    @property
    def is_host(self) -> bool:
        return self.key[0] in ("host", "global")


A0 = Addr(("global",))

BOTTOM: frozenset = frozenset()
V_UNDEF = frozenset([UNDEF])
V_TRUE = frozenset([TRUE])
V_FALSE = frozenset([FALSE])
V_BOOL = frozenset([TRUE, FALSE])


def num(c) -> Num:
    if c is None or (isinstance(c, float) and math.isnan(c)):
        return Num(None)
    if isinstance(c, float) and c.is_integer() and abs(c) < 2 ** 53:
        c = int(c)
    return Num(c)


def fmt_num(c) -> str:
    if c is None:
        return "NaN"
    if c == math.inf:
        return "Infinity"
    if c == -math.inf:
        return "-Infinity"
    if isinstance(c, float) and c.is_integer():
        return str(int(c))
    return repr(c)


def lift(d) -> object:
    """Concrete datum to an exact atom."""
    if d is None:
        return UNDEF
    if d is True:
        return TRUE
    if d is False:
        return FALSE
    if isinstance(d, (int, float)):
        return num(d)
    if isinstance(d, str):
        return Str(d)
    raise TypeError(f"not a literal datum: {d!r}")


def alpha_atom(atom, precision: Optional[str]):
    if precision == "L":
        if isinstance(atom, Num):
            return NUM_TOP
        if isinstance(atom, Str):
            return STR_TOP
    return atom


def alpha(d, precision: Optional[str] = None) -> frozenset:
    """Abstraction of a literal datum; ``precision`` None is the identity."""
    return frozenset([alpha_atom(lift(d), precision)])


def widen(v: frozenset, threshold: Optional[int]) -> frozenset:
    """Collapse constants absorbed by a Top, or too many distinct constants."""
    nums = [a for a in v if type(a) is Num]
    strs = [a for a in v if type(a) is Str]
    if not nums and not strs:
        return v
    out = v
    if nums and (NUM_TOP in v or (threshold is not None and len(nums) > threshold)):
        out = out.difference(nums) | {NUM_TOP}
    if strs and (STR_TOP in v or (threshold is not None and len(strs) > threshold)):
        out = out.difference(strs) | {STR_TOP}
    return out


def join(a: frozenset, b: frozenset, threshold: Optional[int] = None) -> frozenset:
    if not b or a is b:
        return a
    if not a:
        return b
    return widen(a | b, threshold)


def atom_leq(x, y) -> bool:
    if x == y:
        return True
    if y is NUM_TOP:
        return type(x) is Num
    if y is STR_TOP:
        return type(x) is Str
    return False


def leq(a: frozenset, b: frozenset) -> bool:
    """Lattice order on values (constants are below their Top)."""
    if a <= b:
        return True
    for x in a:
        if x in b:
            continue
        if type(x) is Num and NUM_TOP in b:
            continue
        if type(x) is Str and STR_TOP in b:
            continue
        return False
    return True


def addrs(v) -> list:
    return [a for a in v if type(a) is Addr]


def prims(v) -> list:
    return [a for a in v if type(a) is not Addr]


# -- conversions ------------------------------------------------------------

def kind_of(atom) -> str:
    if atom is UNDEF:
        return "undef"
    if atom is TRUE or atom is FALSE:
        return "bool"
    t = type(atom)
    if t is Num or atom is NUM_TOP:
        return "num"
    if t is Str or atom is STR_TOP:
        return "str"
    if t is Addr:
        return "obj"
    raise TypeError(f"unexpected atom {atom!r}")


def is_exact(atom) -> bool:
    return atom is not NUM_TOP and atom is not STR_TOP


def truthy(atom) -> frozenset:
    """Possible boolean outcomes of testing ``atom``."""
    if atom is TRUE:
        return V_TRUE
    if atom is FALSE or atom is UNDEF:
        return V_FALSE
    t = type(atom)
    if t is Addr:
        return V_TRUE
    if t is Num:
        return V_TRUE if (atom.c is not None and atom.c != 0) else V_FALSE
    if t is Str:
        return V_TRUE if atom.c else V_FALSE
    return V_BOOL


def truthiness(v: frozenset) -> frozenset:
    out = set()
    for a in v:
        out |= truthy(a)
        if len(out) == 2:
            break
    return frozenset(out)


def to_number(atom) -> Optional[float]:
    if atom is UNDEF:
        return None
    if atom is TRUE:
        return 1
    if atom is FALSE:
        return 0
    t = type(atom)
    if t is Num:
        return atom.c
    if t is Str:
        s = atom.c.strip()
        if not s:
            return 0
        try:
            return float(s) if any(ch in s for ch in ".eE") else int(s)
        except ValueError:
            if s in ("Infinity", "+Infinity"):
                return math.inf
            if s == "-Infinity":
                return -math.inf
            return None
    return None


def to_str(atom) -> str:
    if atom is UNDEF:
        return "undefined"
    if atom is TRUE:
        return "true"
    if atom is FALSE:
        return "false"
    t = type(atom)
    if t is Num:
        return fmt_num(atom.c)
    if t is Str:
        return atom.c
    return "[object Object]"


def prop_key(atom) -> Optional[str]:
    """Property name for a computed key, None when unknown."""
    if not is_exact(atom):
        return None
    return to_str(atom)


# -- operators --------------------------------------------------------------

BINARY_OPS = ("+", "-", "*", "/", "%", "==", "===", "!=", "!==", "<", "<=", ">", ">=")


def _arith(op, x, y):
    if x is None or y is None:
        return None
    try:
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if op == "*":
            r = x * y
            return None if isinstance(r, float) and math.isnan(r) else r
        if op == "/":
            if y == 0:
                if x == 0:
                    return None
                return math.copysign(math.inf, x) * math.copysign(1, y)
            return x / y
        if op == "%":
            if y == 0 or math.isinf(x):
                return None
            if math.isinf(y):
                return x
            return math.fmod(x, y)
    except (OverflowError, ValueError):
        return None
    raise ValueError(op)


def _loose_eq(x, y) -> bool:
    kx, ky = kind_of(x), kind_of(y)
    if kx == ky:
        return _strict_eq(x, y)
    if kx == "undef" or ky == "undef":
        return False
    if kx == "obj" or ky == "obj":
        other = y if kx == "obj" else x
        if kind_of(other) == "str":
            return other.c == "[object Object]"
        return False
    a, b = to_number(x), to_number(y)
    return a is not None and b is not None and a == b


def _strict_eq(x, y) -> bool:
    if kind_of(x) != kind_of(y):
        return False
    if type(x) is Num:
        return x.c is not None and y.c is not None and x.c == y.c
    return x == y


def _compare(op, x, y) -> bool:
    if type(x) is Str and type(y) is Str:
        a, b = x.c, y.c
    else:
        a, b = to_number(x), to_number(y)
        if a is None or b is None:
            return False
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def exact_binary(op: str, x, y):
    """Operator on two exact atoms; returns an atom."""
    if op == "+":
        if kind_of(x) in ("str", "obj") or kind_of(y) in ("str", "obj"):
            return Str(to_str(x) + to_str(y))
        return num(_arith("+", to_number(x), to_number(y)))
    if op in ("-", "*", "/", "%"):
        return num(_arith(op, to_number(x), to_number(y)))
    if op == "==":
        return TRUE if _loose_eq(x, y) else FALSE
    if op == "!=":
        return FALSE if _loose_eq(x, y) else TRUE
    if op == "===":
        return TRUE if _strict_eq(x, y) else FALSE
    if op == "!==":
        return FALSE if _strict_eq(x, y) else TRUE
    if op in ("<", "<=", ">", ">="):
        return TRUE if _compare(op, x, y) else FALSE
    raise ValueError(f"unknown operator {op}")


def _precise_addr(a: Addr) -> bool:
    return a.n is not None or a.is_host


def atom_binary(op: str, x, y, precision: Optional[str]) -> frozenset:
    """Abstract operator on two atoms."""
    tx, ty = type(x), type(y)
    if tx is Addr and ty is Addr and op in ("==", "===", "!=", "!=="):
        if x != y:
            same = False
        elif precision is None or _precise_addr(x):
            same = True
        else:
            return V_BOOL
        eq = op in ("==", "===")
        return V_TRUE if same == eq else V_FALSE
    if is_exact(x) and is_exact(y):
        return frozenset([alpha_atom(exact_binary(op, x, y), precision)])
    kx, ky = kind_of(x), kind_of(y)
    if op == "+":
        if "str" in (kx, ky) or "obj" in (kx, ky):
            return frozenset([STR_TOP])
        return frozenset([NUM_TOP])
    if op in ("-", "*", "/", "%"):
        return frozenset([NUM_TOP])
    if op in ("===", "!==") and kx != ky:
        return V_FALSE if op == "===" else V_TRUE
    return V_BOOL


def binary(op: str, l: frozenset, r: frozenset, precision: Optional[str] = None) -> frozenset:
    out = set()
    for x in l:
        for y in r:
            out |= atom_binary(op, x, y, precision)
    return frozenset(out)


def summarize(v) -> list[str]:
    """Deterministic token list for display and JSON output."""
    out = []
    for a in v:
        if a is ABSENT:
            continue
        t = type(a)
        if t is Num:
            out.append(f"Num:{fmt_num(a.c)}")
        elif t is Str:
            out.append(f"Str:{a.c!r}")
        elif t is Addr:
            out.append("addr:" + repr(a)[1:])
        else:
            out.append(a.name)
    return sorted(out)
