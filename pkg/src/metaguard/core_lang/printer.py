"""Pretty-printer emitting surface text for core forms.

Printing is shape-preserving: parsing the output yields a tree with the same
:func:`~metaguard.core_lang.syntax.shape` as the input (labels and spans
aside).
"""
from __future__ import annotations

import json
import re

from .syntax import (
    Assign, Binary, Call, Fun, If, Index, IndexStore, Lit, Load, MethodCall, New,
    NewObj, Node, Program, Return, Seq, Store, This, Var, VarDecl, While, seq_items,
)

_IDENT = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")


def lit_text(v) -> str:
    if v is None:
        return "undefined"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return repr(v)


def _member(name: str) -> str:
    return f".{name}" if _IDENT.match(name) else f"[{json.dumps(name)}]"


def expr_text(n: Node, indent: int = 0) -> str:
    if isinstance(n, Lit):
        return lit_text(n.value)
    if isinstance(n, Var):
        return n.name
    if isinstance(n, This):
        return "this"
    if isinstance(n, NewObj):
        return "[]" if n.kind == "array" else "{}"
    if isinstance(n, Fun):
        head = f"function {n.name}" if n.name else "function "
        lines = []
        if n.hoisted:
            lines.append("  " * (indent + 1) + "var " + ", ".join(n.hoisted) + ";")
        lines.extend(stmt_lines(n.body, indent + 1))
        inner = "\n".join(lines)
        return f"{head}({', '.join(n.params)}) {{\n{inner}\n{'  ' * indent}}}"
    if isinstance(n, Call):
        return f"{expr_text(n.callee)}({_args(n.args)})"
    if isinstance(n, MethodCall):
        return f"{expr_text(n.receiver)}{_member(n.name)}({_args(n.args)})"
    if isinstance(n, New):
        return f"new {expr_text(n.callee)}({_args(n.args)})"
    if isinstance(n, Load):
        return f"{expr_text(n.receiver)}{_member(n.name)}"
    if isinstance(n, Index):
        return f"{expr_text(n.receiver)}[{expr_text(n.key)}]"
    if isinstance(n, Binary):
        return f"({expr_text(n.left, indent)} {n.op} {expr_text(n.right, indent)})"
    raise TypeError(f"not an expression form: {n!r}")


def _args(args) -> str:
    return ", ".join(expr_text(a) for a in args)


def stmt_lines(n: Node, indent: int = 0) -> list[str]:
    pad = "  " * indent
    out = []
    for it in seq_items(n):
        if isinstance(it, Seq):
            out.extend(stmt_lines(it, indent))
        elif isinstance(it, VarDecl):
            out.append(f"{pad}var {it.name} = {expr_text(it.init, indent)};")
        elif isinstance(it, Assign):
            out.append(f"{pad}{it.name} = {expr_text(it.rhs, indent)};")
        elif isinstance(it, Store):
            out.append(f"{pad}{expr_text(it.receiver)}{_member(it.name)} = {expr_text(it.rhs, indent)};")
        elif isinstance(it, IndexStore):
            out.append(f"{pad}{expr_text(it.receiver)}[{expr_text(it.key)}] = {expr_text(it.rhs, indent)};")
        elif isinstance(it, Return):
            out.append(f"{pad}return {expr_text(it.arg)};")
        elif isinstance(it, If):
            out.append(f"{pad}if ({expr_text(it.test)}) {{")
            out.extend(stmt_lines(it.cons, indent + 1))
            out.append(f"{pad}}} else {{")
            out.extend(stmt_lines(it.alt, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(it, While):
            out.append(f"{pad}while ({expr_text(it.test)}) {{")
            out.extend(stmt_lines(it.body, indent + 1))
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}{expr_text(it, indent)};")
    return out


def pretty(p) -> str:
    body = p.body if isinstance(p, Program) else p
    return "\n".join(stmt_lines(body)) + "\n"
