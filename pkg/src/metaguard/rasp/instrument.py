"""Source-to-source instrumentation inlining the execution monitor (EM).

Works on the normalized core: every trapped operation sits at statement
level with simple operands, so each one is rewritten into a few statements
ending in a call ``EM.<method>(...)``.  That call carries the label (and so
the span) of the original operation, which is how halts map back to source.
"""
from __future__ import annotations

from importlib import resources

from ..core_lang import parse
from ..core_lang.syntax import (
    Assign, Binary, Call, Fun, If, Index, IndexStore, Lit, Load, MethodCall, New,
    NewObj, Node, Program, Return, Seq, SourceSpan, Store, This, Var, VarDecl, While,
    seq_items,
)
from .traps import TRAP_TABLE


class InstrumentError(ValueError):
    pass


# EM method -> trap it consults (None for notification wrappers)
EM_METHODS = {
    "apply": TRAP_TABLE["FunCall"],
    "invoke": TRAP_TABLE["MethodCall"],
    "construct": TRAP_TABLE["CtorCall"],
    "get": TRAP_TABLE["PropLoad"],
    "set": TRAP_TABLE["PropStore"],
    "write": TRAP_TABLE["VarAssign"],
    "read": TRAP_TABLE["VarRead"],
    "literal": TRAP_TABLE["Lit"],
    "binary": TRAP_TABLE["Binary"],
}

EM_FILE = "<em>"


def em_source() -> str:
    return resources.files("metaguard.assets").joinpath("em.js0").read_text(encoding="utf-8")


class _Instrumenter:
    def __init__(self, prog: Program):
        self.table = dict(prog.label_table)
        self.next_label = max(self.table, default=-1) + 1
        self.tmp = 0
        self.scope: list[str] | None = None
        self.added: set[int] = set()

    # -- construction -------------------------------------------------------

    def mk(self, cls, span: SourceSpan, **kw) -> Node:
        label = self.next_label
        self.next_label += 1
        self.table[label] = span
        self.added.add(label)
        return cls(label=label, span=span, meta=True, **kw)

    def keep(self, cls, orig: Node, **kw) -> Node:
        """A node that takes over ``orig``'s label and span."""
        return cls(label=orig.label, span=orig.span, meta=orig.meta, **kw)

    def fresh(self) -> str:
        name = f"$e{self.tmp}"
        self.tmp += 1
        if self.scope is not None:
            self.scope.append(name)
        return name

    def var(self, name: str, span) -> Var:
        return self.mk(Var, span, name=name)

    def copy_simple(self, n: Node) -> Node:
        if type(n) is Var:
            return self.mk(Var, n.span, name=n.name)
        if type(n) is Lit:
            return self.mk(Lit, n.span, value=n.value)
        if type(n) is This:
            return self.mk(This, n.span)
        raise InstrumentError(f"expected a simple operand, got {n!r}")

    def em_call(self, method: str, args: list, span, orig: Node | None = None) -> MethodCall:
        recv = self.mk(Var, span, name="EM")
        if orig is not None:
            return MethodCall(label=orig.label, span=orig.span, meta=False, receiver=recv,
                              name=method, args=tuple(args))
        return self.mk(MethodCall, span, receiver=recv, name=method, args=tuple(args))

    def bind(self, rhs: Node, span) -> tuple[Node, Var]:
        name = self.fresh()
        return self.mk(Assign, span, name=name, rhs=rhs), self.var(name, span)

    def seq(self, items: list[Node], span) -> Node:
        if not items:
            return self.mk(Lit, span, value=None)
        out = items[-1]
        for it in reversed(items[:-1]):
            out = self.mk(Seq, it.span, first=it, second=out)
        return out

    def lit(self, value, span) -> Lit:
        return self.mk(Lit, span, value=value)

    # -- operands -------------------------------------------------------------

    def notify(self, n: Node, orig: Node | None = None) -> tuple[list[Node], Var]:
        """Wrap a simple operand into a read/literal notification."""
        if type(n) is Var:
            call = self.em_call("read", [self.lit(n.name, n.span), self.copy_simple(n)], n.span, orig)
        else:
            call = self.em_call("literal", [self.copy_simple(n)], n.span, orig)
        a, v = self.bind(call, n.span)
        return [a], v

    def arg_array(self, args, span) -> tuple[list[Node], Var]:
        out = []
        arr, av = self.bind(self.mk(NewObj, span, kind="array"), span)
        out.append(arr)
        for i, a in enumerate(args):
            pre, v = self.notify(a)
            out.extend(pre)
            out.append(self.mk(Store, a.span, receiver=self.var(av.name, span), name=str(i), rhs=v))
        out.append(self.mk(Store, span, receiver=self.var(av.name, span), name="length",
                           rhs=self.lit(len(args), span)))
        return out, av

    def value(self, e: Node) -> tuple[list[Node], Node]:
        """Statements computing ``e`` through the EM, and a simple result."""
        t = type(e)
        sp = e.span
        if t in (Var, Lit, This):
            return self.notify(e, e)
        if t is NewObj:
            a0, v0 = self.bind(self.mk(NewObj, sp, kind=e.kind), sp)
            a, v = self.bind(self.em_call("literal", [v0], sp, e), sp)
            return [a0, a], v
        if t is Fun:
            f = self.function(e)
            a0, v0 = self.bind(f, sp)
            a, v = self.bind(self.em_call("literal", [v0], sp), sp)
            return [a0, a], v
        if t is Call:
            pre, av = self.arg_array(e.args, sp)
            call = self.em_call("apply", [self.copy_simple(e.callee), self.var("window", sp), av], sp, e)
        elif t is MethodCall:
            pre, av = self.arg_array(e.args, sp)
            call = self.em_call("invoke", [self.copy_simple(e.receiver), self.lit(e.name, sp), av], sp, e)
        elif t is New:
            pre, av = self.arg_array(e.args, sp)
            call = self.em_call("construct", [self.copy_simple(e.callee), av], sp, e)
        elif t is Load:
            pre = []
            call = self.em_call("get", [self.copy_simple(e.receiver), self.lit(e.name, sp)], sp, e)
        elif t is Index:
            pre = []
            call = self.em_call("get", [self.copy_simple(e.receiver), self.copy_simple(e.key)], sp, e)
        elif t is Binary:
            lp, lv = self.notify(e.left)
            rp, rv = self.notify(e.right)
            op, ov = self.bind(self.mk(Binary, sp, op=e.op, left=lv, right=rv), sp)
            pre = lp + rp + [op]
            call = self.em_call("binary", [self.lit(e.op, sp), self.var(lv.name, sp),
                                           self.var(rv.name, sp), ov], sp, e)
        else:
            raise InstrumentError(f"unexpected right-hand side {e!r}")
        a, v = self.bind(call, sp)
        return pre + [a], v

    # -- statements -----------------------------------------------------------

    def body(self, n: Node) -> Node:
        items = []
        for it in seq_items(n):
            items.extend(self.stmt(it))
        return self.seq(items, n.span)

    def stmt(self, n: Node) -> list[Node]:
        t = type(n)
        if t is Seq:
            return self.stmt(n.first) + self.stmt(n.second)
        if n.meta:
            return [n]
        sp = n.span
        if t is Assign or t is VarDecl:
            rhs = n.rhs if t is Assign else n.init
            pre, v = self.value(rhs)
            w = self.em_call("write", [self.lit(n.name, sp), v], sp, n)
            if t is Assign:
                return pre + [self.mk(Assign, sp, name=n.name, rhs=w)]
            return pre + [self.mk(VarDecl, sp, name=n.name, init=w)]
        if t is Store or t is IndexStore:
            pre, v = self.value(n.rhs)
            key = self.lit(n.name, sp) if t is Store else self.copy_simple(n.key)
            call = self.em_call("set", [self.copy_simple(n.receiver), key, v], sp, n)
            a, _ = self.bind(call, sp)
            return pre + [a]
        if t is Return:
            pre, v = self.notify(n.arg)
            return pre + [self.keep(Return, n, arg=v)]
        if t is If:
            return [self.keep(If, n, test=n.test, cons=self.body(n.cons), alt=self.body(n.alt))]
        if t is While:
            return [self.keep(While, n, test=n.test, body=self.body(n.body))]
        if t in (Var, Lit, This):
            # a discarded simple value is not an operation
            return [n]
        pre, v = self.value(n)
        return pre + [v]

    def function(self, f: Fun) -> Fun:
        outer = self.scope
        self.scope = []
        try:
            b = self.body(f.body)
            hoisted = f.hoisted + tuple(self.scope)
        finally:
            self.scope = outer
        return self.keep(Fun, f, params=f.params, hoisted=hoisted, body=b, name=f.name)


def instrument(p: Program) -> Program:
    """Rewrite every trapped base operation into an EM call and prepend the EM."""
    if p.instrumented:
        raise InstrumentError(f"{p.file} is already instrumented")
    ins = _Instrumenter(p)
    body = ins.body(p.body)
    em = parse(em_source(), EM_FILE, meta=True, label_base=ins.next_label, temp_prefix="$x")
    ins.table.update(em.label_table)
    label = max(ins.table) + 1
    ins.table[label] = p.body.span
    full = Seq(label=label, span=p.body.span, meta=True, first=em.body, second=body)
    meta_labels = frozenset(p.meta_labels) | ins.added | frozenset(em.label_table) | {label}
    return Program(body=full, label_table=ins.table, file=p.file, meta_labels=meta_labels,
                   linked=p.linked, instrumented=True, key=p.key)


def em_trap(node: Node) -> str | None:
    """Trap consulted by an EM call node (the site of a halt)."""
    if type(node) is MethodCall and type(node.receiver) is Var and node.receiver.name == "EM":
        return EM_METHODS.get(node.name)
    return None
