"""The trap table shared by the instrumenter and the execution explorer.

Operation kinds name the base-program operations a META can intercept.
Decision traps return a verdict (PROCEED/HALT); notification traps only
observe and their result is ignored.
"""
from __future__ import annotations

from types import MappingProxyType

from ..core_lang.syntax import (
    Assign, Binary, Call, Fun, Index, IndexStore, Lit, Load, MethodCall, New,
    NewObj, Node, Store, This, Var, VarDecl,
)

TRAP_TABLE = MappingProxyType({
    "FunCall": "apply",
    "MethodCall": "apply",
    "PropLoad": "get",
    "PropStore": "set",
    "CtorCall": "construct",
    "VarAssign": "write",
    "Binary": "binary",
    "Lit": "literal",
    # variable reads feed the taint library's shadow stack
    "VarRead": "read",
})

DECISION_TRAPS = frozenset({"apply", "get", "set", "construct", "write"})

TRAP_NAMES = tuple(sorted(set(TRAP_TABLE.values())))

# core node class -> operation kind
NODE_KINDS = MappingProxyType({
    Call: "FunCall",
    MethodCall: "MethodCall",
    Load: "PropLoad",
    Index: "PropLoad",
    Store: "PropStore",
    IndexStore: "PropStore",
    New: "CtorCall",
    Assign: "VarAssign",
    VarDecl: "VarAssign",
    Binary: "Binary",
    Lit: "Lit",
    This: "Lit",
    NewObj: "Lit",
    Fun: "Lit",
    Var: "VarRead",
})


def kind_of(node: Node) -> str | None:
    return NODE_KINDS.get(type(node))


def trap_for(node: Node) -> str | None:
    k = NODE_KINDS.get(type(node))
    return TRAP_TABLE[k] if k is not None else None


def is_decision(trap: str) -> bool:
    return trap in DECISION_TRAPS


def operand_trap(node: Node) -> str:
    """Notification trap for a simple operand (or value literal)."""
    return "read" if type(node) is Var else "literal"
