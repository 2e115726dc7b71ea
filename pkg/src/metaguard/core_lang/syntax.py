"""Labeled abstract syntax for the core language.

Nodes compare by identity: every syntactic occurrence is a distinct object
carrying a unique label, which is what machine states key on.  Use
:func:`shape` for label-free structural comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self):
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self}")

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SourceSpan":
        return cls(d["file"], d["start_line"], d["start_col"], d["end_line"], d["end_col"])


NO_SPAN = SourceSpan("<synthetic>", 1, 1, 1, 1)


@dataclass(frozen=True, eq=False)
class Node:
    label: int
    span: SourceSpan
    # True for nodes that come from linked meta code or from instrumentation;
    # such nodes are never trapped.
    meta: bool

    def children(self) -> tuple["Node", ...]:
        out = []
        for f in fields(self):
            if f.name in ("label", "span", "meta"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                out.append(v)
            elif isinstance(v, tuple):
                out.extend(x for x in v if isinstance(x, Node))
        return tuple(out)

    def __repr__(self):
        return f"<{type(self).__name__}#{self.label}>"


# -- simple expressions -----------------------------------------------------

@dataclass(frozen=True, eq=False, repr=False)
class Lit(Node):
    # None is undef; otherwise bool, int/float or str
    value: Any


@dataclass(frozen=True, eq=False, repr=False)
class Var(Node):
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class This(Node):
    pass


Simple = Union[Lit, Var, This]


# -- JS0 core ---------------------------------------------------------------

@dataclass(frozen=True, eq=False, repr=False)
class Fun(Node):
    params: tuple[str, ...]
    hoisted: tuple[str, ...]
    body: "Expr"
    name: Optional[str] = None

    @property
    def display_name(self) -> str:
        return self.name or f"<fun@{self.label}>"


@dataclass(frozen=True, eq=False, repr=False)
class Call(Node):
    callee: Node  # Simple
    args: tuple[Node, ...]


@dataclass(frozen=True, eq=False, repr=False)
class MethodCall(Node):
    receiver: Node
    name: str
    args: tuple[Node, ...]


@dataclass(frozen=True, eq=False, repr=False)
class New(Node):
    callee: Node
    args: tuple[Node, ...]


@dataclass(frozen=True, eq=False, repr=False)
class Return(Node):
    arg: Node


@dataclass(frozen=True, eq=False, repr=False)
class Assign(Node):
    name: str
    rhs: "Expr"


@dataclass(frozen=True, eq=False, repr=False)
class Load(Node):
    receiver: Node
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class Store(Node):
    receiver: Node
    name: str
    rhs: "Expr"


# -- extensions -------------------------------------------------------------

@dataclass(frozen=True, eq=False, repr=False)
class Index(Node):
    """Computed property read ``s[k]``."""
    receiver: Node
    key: Node


@dataclass(frozen=True, eq=False, repr=False)
class IndexStore(Node):
    receiver: Node
    key: Node
    rhs: "Expr"


@dataclass(frozen=True, eq=False, repr=False)
class NewObj(Node):
    """Empty object (``{}``) or array (``[]``) allocation."""
    kind: str = "object"


@dataclass(frozen=True, eq=False, repr=False)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, eq=False, repr=False)
class If(Node):
    test: "Expr"
    cons: "Expr"
    alt: "Expr"


@dataclass(frozen=True, eq=False, repr=False)
class While(Node):
    test: "Expr"
    body: "Expr"


@dataclass(frozen=True, eq=False, repr=False)
class Seq(Node):
    first: "Expr"
    second: "Expr"


@dataclass(frozen=True, eq=False, repr=False)
class VarDecl(Node):
    name: str
    init: "Expr"


Expr = Node
SIMPLE_TYPES = (Lit, Var, This)
CALL_TYPES = (Call, MethodCall, New)


def is_simple(n: Node) -> bool:
    return isinstance(n, SIMPLE_TYPES)


def walk(n: Node):
    """Pre-order traversal, descending into function bodies."""
    stack = [n]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children()))


def shape(n: Node):
    """Label- and span-free structural form of ``n``."""
    items: list = [type(n).__name__]
    for f in fields(n):
        if f.name in ("label", "span", "meta"):
            continue
        v = getattr(n, f.name)
        if isinstance(v, Node):
            items.append(shape(v))
        elif isinstance(v, tuple):
            items.append(tuple(shape(x) if isinstance(x, Node) else x for x in v))
        else:
            items.append(v)
    return tuple(items)


def seq_items(n: Node) -> list[Node]:
    """Flatten a right-nested Seq chain."""
    out = []
    while isinstance(n, Seq):
        out.append(n.first)
        n = n.second
    out.append(n)
    return out


@dataclass(frozen=True)
class Label:
    """A label qualified by the program it belongs to."""
    program: str
    id: int


@dataclass
class Program:
    body: Node
    label_table: dict[int, SourceSpan]
    file: str = "<input>"
    meta_labels: frozenset = field(default_factory=frozenset)
    linked: bool = False
    instrumented: bool = False
    nodes: dict[int, Node] = field(default_factory=dict)
    # identifies the source text; qualifies labels handed out by label_of
    key: str = ""

    def __post_init__(self):
        if not self.nodes:
            self.nodes = {n.label: n for n in walk(self.body)}

    def node(self, label: int) -> Node:
        return self.nodes[label]


    def label_of(self, node: Node) -> Label:
        return Label(self.key, node.label)


class UnknownLabel(KeyError):
    pass


def span_of(p: Program, label) -> SourceSpan:
    if isinstance(label, Label):
        if label.program != p.key:
            raise UnknownLabel(f"label {label.id} belongs to another program")
        label = label.id
    try:
        return p.label_table[label]
    except KeyError:
        raise UnknownLabel(f"label {label} does not occur in {p.file}") from None
