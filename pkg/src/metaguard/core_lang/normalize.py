"""Lowering of the surface tree to labeled core forms.

The core is in A-normal form: call arguments, call receivers, property
receivers, binary operands and ``if``/``while`` tests are simple (variable,
literal or ``this``).  Calls and other compound expressions appear only as
the right-hand side of an assignment, declaration or store; a compound
expression statement is assigned to a temporary.  Everything else is hoisted
into temporaries named ``$tN``.  Short-circuit operators, the conditional operator
and ``!`` become statement-level ``If`` forms writing a temporary.

Labels are handed out in construction order so re-parsing unchanged text
yields identical labels.
"""
from __future__ import annotations

import hashlib

from .lexer import ParseError
from .parser import S, Parser
from .syntax import (
    Assign, Binary, Call, Fun, If, Index, IndexStore, Lit, Load, MethodCall, New,
    NewObj, Node, Program, Return, Seq, SourceSpan, Store, This, Var, VarDecl, While,
    is_simple, walk,
)


class _Scope:
    def __init__(self, params=()):
        self.params = list(params)
        self.hoisted: list[str] = []

    def declare(self, name: str):
        if name not in self.params and name not in self.hoisted:
            self.hoisted.append(name)


class Normalizer:
    def __init__(self, file: str, meta: bool = False, label_base: int = 0, reserved=(),
                 temp_prefix: str | None = None):
        self.file = file
        self.meta = meta
        self.next_label = label_base
        self.table: dict[int, SourceSpan] = {}
        self.reserved = set(reserved)
        self.tmp = 0
        # meta code gets its own temporaries so that top-level ones never
        # share a global binding with the base program's
        self.prefix = temp_prefix or ("$m" if meta else "$t")
        self.scope: _Scope | None = None

    # -- construction -------------------------------------------------------

    def mk(self, cls, span: SourceSpan, **kw) -> Node:
        label = self.next_label
        self.next_label += 1
        self.table[label] = span
        return cls(label=label, span=span, meta=self.meta, **kw)

    def fresh(self) -> str:
        while True:
            name = f"{self.prefix}{self.tmp}"
            self.tmp += 1
            if name not in self.reserved:
                break
        if self.scope is not None:
            self.scope.declare(name)
        return name

    def undef(self, span) -> Node:
        return self.mk(Lit, span, value=None)

    def seq(self, items: list[Node], span) -> Node:
        if not items:
            return self.undef(span)
        out = items[-1]
        for it in reversed(items[:-1]):
            out = self.mk(Seq, it.span, first=it, second=out)
        return out

    # -- statements ---------------------------------------------------------

    def program(self, stmts: list[S], span) -> Node:
        return self.seq(self.body(stmts), span)

    def body(self, stmts: list[S]) -> list[Node]:
        # function declarations are hoisted to the front of their scope
        decls = [s for s in stmts if s.kind == "fundecl"]
        rest = [s for s in stmts if s.kind != "fundecl"]
        out: list[Node] = []
        for d in decls:
            if self.scope is not None:
                self.scope.declare(d.name)
            f = self.function(d.name, d.params, d.body, d.span)
            out.append(self.mk(VarDecl, d.span, name=d.name, init=f))
        for s in rest:
            out.extend(self.stmt(s))
        return out

    def block_items(self, s: S) -> list[Node]:
        items = s.body if s.kind == "block" else [s]
        if any(x.kind == "fundecl" for x in items):
            raise ParseError("function declarations are only allowed at function or program level", s.span)
        return self.body(items)

    def block(self, s: S) -> Node:
        return self.seq(self.block_items(s), s.span)

    def stmt(self, s: S) -> list[Node]:
        k = s.kind
        if k == "empty":
            return []
        if k == "block":
            if any(x.kind == "fundecl" for x in s.body):
                raise ParseError("function declarations are only allowed at function or program level", s.span)
            return self.body(s.body)
        if k == "var":
            out = []
            for d in s.decls:
                if self.scope is not None:
                    self.scope.declare(d.name)
                if d.init is None:
                    continue
                pre, v = self.expr(d.init)
                out.extend(pre)
                out.append(self.mk(VarDecl, d.span, name=d.name, init=v))
            return out
        if k == "expr":
            return self.expr_stmt(s.expr)
        if k == "return":
            if self.scope is None:
                raise ParseError("return outside of a function", s.span)
            if s.arg is None:
                return [self.mk(Return, s.span, arg=self.undef(s.span))]
            pre, v = self.simple(s.arg)
            return pre + [self.mk(Return, s.span, arg=v)]
        if k == "if":
            pre, t = self.simple(s.test)
            cons = self.block(s.cons)
            alt = self.block(s.alt) if s.alt is not None else self.undef(s.span)
            return pre + [self.mk(If, s.span, test=t, cons=cons, alt=alt)]
        if k == "while":
            return self.loop(s.test, [s.body], s.span)
        if k == "for":
            out = self.stmt(s.init) if s.init is not None else []
            tail = [s.body]
            if s.update is not None:
                tail.append(S("expr", s.update.span, expr=s.update))
            test = s.test if s.test is not None else S("lit", s.span, value=True)
            return out + self.loop(test, tail, s.span)
        raise ParseError(f"unexpected statement {k}", s.span)

    def loop(self, test: S, body: list[S], span) -> list[Node]:
        saved = (self.next_label, dict(self.table), self.tmp,
                 list(self.scope.hoisted) if self.scope else None)
        pre, t = self.simple(test)
        if not pre:
            items = []
            for b in body:
                items.extend(self.block_items(b))
            return [self.mk(While, span, test=t, body=self.seq(items, span))]
        # roll back and evaluate the test before the loop and again at the end
        # of every iteration into one temporary
        self.next_label, self.table, self.tmp, hoisted = saved
        if self.scope:
            self.scope.hoisted = hoisted
        name = self.fresh()
        first = self.expr_into(test, name)
        items = []
        for b in body:
            items.extend(self.block_items(b))
        items.extend(self.expr_into(test, name))
        w = self.mk(While, span, test=self.mk(Var, test.span, name=name), body=self.seq(items, span))
        return first + [w]

    def expr_into(self, e: S, name: str) -> list[Node]:
        pre, v = self.expr(e)
        return pre + [self.mk(Assign, e.span, name=name, rhs=v)]

    def expr_stmt(self, e: S) -> list[Node]:
        if e.kind == "assign":
            return self.assign(e, want_value=False)[0]
        if e.kind == "update":
            return self.update(e, want_value=False)[0]
        pre, v = self.expr(e)
        if is_simple(v):
            return pre + [v]
        name = self.fresh()
        return pre + [self.mk(Assign, e.span, name=name, rhs=v)]

    # -- expressions --------------------------------------------------------

    def function(self, name, params, body: list[S], span) -> Fun:
        if len(set(params)) != len(params):
            raise ParseError("duplicate parameter name", span)
        outer = self.scope
        self.scope = _Scope(params)
        try:
            items = self.body(body)
            if not items or not isinstance(items[-1], Return):
                items.append(self.mk(Return, span, arg=self.undef(span)))
            b = self.seq(items, span)
            hoisted = tuple(self.scope.hoisted)
        finally:
            self.scope = outer
        return self.mk(Fun, span, params=tuple(params), hoisted=hoisted, body=b, name=name)

    def simple(self, e: S) -> tuple[list[Node], Node]:
        pre, v = self.expr(e)
        if is_simple(v):
            return pre, v
        name = self.fresh()
        pre.append(self.mk(Assign, e.span, name=name, rhs=v))
        return pre, self.mk(Var, e.span, name=name)

    def simples(self, es: list[S]) -> tuple[list[Node], list[Node]]:
        """Normalize operands left to right, pinning earlier variable reads
        into temporaries when a later operand has side effects."""
        parts = [self.simple(e) for e in es]
        pre: list[Node] = []
        vals: list[Node] = []
        for i, (p, v) in enumerate(parts):
            pre.extend(p)
            if isinstance(v, Var) and not v.name.startswith(self.prefix) and any(
                    _clobbers(q, v.name) for q, _ in parts[i + 1:]):
                name = self.fresh()
                pre.append(self.mk(Assign, v.span, name=name, rhs=v))
                v = self.mk(Var, v.span, name=name)
            vals.append(v)
        return pre, vals

    def expr(self, e: S) -> tuple[list[Node], Node]:
        k = e.kind
        sp = e.span
        if k == "lit":
            return [], self.mk(Lit, sp, value=e.value)
        if k == "ident":
            return [], self.mk(Var, sp, name=e.name)
        if k == "this":
            return [], self.mk(This, sp)
        if k == "fun":
            return [], self.function(e.name, e.params, e.body, sp)
        if k == "member":
            pre, r = self.simple(e.obj)
            return pre, self.mk(Load, sp, receiver=r, name=e.name)
        if k == "index":
            if e.key.kind == "lit" and e.key.value is not None and not isinstance(e.key.value, bool):
                pre, r = self.simple(e.obj)
                return pre, self.mk(Load, sp, receiver=r, name=_key(e.key.value))
            pre, (r, key) = self.simples([e.obj, e.key])
            return pre, self.mk(Index, sp, receiver=r, key=key)
        if k == "call":
            return self.call(e)
        if k == "new":
            pre, vals = self.simples([e.callee] + list(e.args))
            return pre, self.mk(New, sp, callee=vals[0], args=tuple(vals[1:]))
        if k == "binary":
            pre, (l, r) = self.simples([e.left, e.right])
            return pre, self.mk(Binary, sp, op=e.op, left=l, right=r)
        if k == "logical":
            name = self.fresh()
            pre = self.expr_into(e.left, name)
            test = self.mk(Var, e.left.span, name=name)
            rhs = self.seq(self.expr_into(e.right, name), e.right.span)
            skip = self.undef(sp)
            if e.op == "&&":
                node = self.mk(If, sp, test=test, cons=rhs, alt=skip)
            else:
                node = self.mk(If, sp, test=test, cons=skip, alt=rhs)
            return pre + [node], self.mk(Var, sp, name=name)
        if k == "cond":
            pre, t = self.simple(e.test)
            name = self.fresh()
            cons = self.seq(self.expr_into(e.cons, name), e.cons.span)
            alt = self.seq(self.expr_into(e.alt, name), e.alt.span)
            return pre + [self.mk(If, sp, test=t, cons=cons, alt=alt)], self.mk(Var, sp, name=name)
        if k == "unary":
            if e.op == "!":
                pre, t = self.simple(e.arg)
                name = self.fresh()
                cons = self.mk(Assign, sp, name=name, rhs=self.mk(Lit, sp, value=False))
                alt = self.mk(Assign, sp, name=name, rhs=self.mk(Lit, sp, value=True))
                return pre + [self.mk(If, sp, test=t, cons=cons, alt=alt)], self.mk(Var, sp, name=name)
            if e.op == "-":
                if e.arg.kind == "lit" and isinstance(e.arg.value, (int, float)) and not isinstance(e.arg.value, bool):
                    return [], self.mk(Lit, sp, value=-e.arg.value)
                pre, v = self.simple(e.arg)
                return pre, self.mk(Binary, sp, op="-", left=self.mk(Lit, sp, value=0), right=v)
            pre, v = self.simple(e.arg)
            return pre, self.mk(Binary, sp, op="*", left=v, right=self.mk(Lit, sp, value=1))
        if k == "assign":
            return self.assign(e, want_value=True)
        if k == "update":
            return self.update(e, want_value=True)
        if k == "obj":
            if not e.props:
                return [], self.mk(NewObj, sp, kind="object")
            name = self.fresh()
            out = [self.mk(Assign, sp, name=name, rhs=self.mk(NewObj, sp, kind="object"))]
            for key, ve in e.props:
                pre, v = self.expr(ve)
                out.extend(pre)
                out.append(self.mk(Store, ve.span, receiver=self.mk(Var, sp, name=name), name=key, rhs=v))
            return out, self.mk(Var, sp, name=name)
        if k == "arr":
            if not e.elems:
                return [], self.mk(NewObj, sp, kind="array")
            name = self.fresh()
            out = [self.mk(Assign, sp, name=name, rhs=self.mk(NewObj, sp, kind="array"))]
            for i, ve in enumerate(e.elems):
                pre, v = self.expr(ve)
                out.extend(pre)
                out.append(self.mk(Store, ve.span, receiver=self.mk(Var, sp, name=name), name=str(i), rhs=v))
            out.append(self.mk(Store, sp, receiver=self.mk(Var, sp, name=name), name="length",
                               rhs=self.mk(Lit, sp, value=len(e.elems))))
            return out, self.mk(Var, sp, name=name)
        raise ParseError(f"unexpected expression {k}", sp)

    def call(self, e: S) -> tuple[list[Node], Node]:
        c = e.callee
        sp = e.span
        if c.kind == "member" or (c.kind == "index" and c.key.kind == "lit" and isinstance(c.key.value, (str, int, float))
                                  and not isinstance(c.key.value, bool)):
            name = c.name if c.kind == "member" else _key(c.key.value)
            pre, vals = self.simples([c.obj] + list(e.args))
            return pre, self.mk(MethodCall, sp, receiver=vals[0], name=name, args=tuple(vals[1:]))
        pre, vals = self.simples([c] + list(e.args))
        return pre, self.mk(Call, sp, callee=vals[0], args=tuple(vals[1:]))

    def target(self, t: S):
        """Normalize an assignment target to (pre, kind, receiver, key)."""
        if t.kind == "ident":
            return [], "var", None, t.name
        if t.kind == "member":
            pre, r = self.simple(t.obj)
            return pre, "prop", r, t.name
        if t.kind == "index":
            if t.key.kind == "lit" and t.key.value is not None and not isinstance(t.key.value, bool):
                pre, r = self.simple(t.obj)
                return pre, "prop", r, _key(t.key.value)
            pre, (r, key) = self.simples([t.obj, t.key])
            return pre, "index", r, key
        raise ParseError("invalid assignment target", t.span)

    def read_target(self, kind, r, key, sp) -> Node:
        if kind == "var":
            return self.mk(Var, sp, name=key)
        if kind == "prop":
            return self.mk(Load, sp, receiver=r, name=key)
        return self.mk(Index, sp, receiver=r, key=key)

    def write_target(self, kind, r, key, rhs, sp) -> Node:
        if kind == "var":
            return self.mk(Assign, sp, name=key, rhs=rhs)
        if kind == "prop":
            return self.mk(Store, sp, receiver=r, name=key, rhs=rhs)
        return self.mk(IndexStore, sp, receiver=r, key=key, rhs=rhs)

    def assign(self, e: S, want_value: bool):
        sp = e.span
        pre, kind, r, key = self.target(e.target)
        vp, v = self.expr(e.value)
        pre.extend(vp)
        if e.op != "=":
            cur = self.read_target(kind, r, key, e.target.span)
            v = self.mk(Binary, sp, op=e.op[0], left=cur, right=v)
        if not want_value:
            return pre + [self.write_target(kind, r, key, v, sp)], None
        if kind == "var":
            pre.append(self.write_target(kind, r, key, v, sp))
            return pre, self.mk(Var, sp, name=key)
        if not is_simple(v):
            name = self.fresh()
            pre.append(self.mk(Assign, sp, name=name, rhs=v))
            v = self.mk(Var, sp, name=name)
        pre.append(self.write_target(kind, r, key, v, sp))
        return pre, self.copy_simple(v)

    def copy_simple(self, v: Node) -> Node:
        if isinstance(v, Var):
            return self.mk(Var, v.span, name=v.name)
        if isinstance(v, Lit):
            return self.mk(Lit, v.span, value=v.value)
        return self.mk(This, v.span)

    def update(self, e: S, want_value: bool):
        sp = e.span
        pre, kind, r, key = self.target(e.target)
        old = self.fresh()
        pre.append(self.mk(Assign, sp, name=old, rhs=self.read_target(kind, r, key, e.target.span)))
        op = "+" if e.op == "++" else "-"
        new_val = self.mk(Binary, sp, op=op, left=self.mk(Var, sp, name=old), right=self.mk(Lit, sp, value=1))
        if e.prefix and want_value:
            nv = self.fresh()
            pre.append(self.mk(Assign, sp, name=nv, rhs=new_val))
            pre.append(self.write_target(kind, r, key, self.mk(Var, sp, name=nv), sp))
            return pre, self.mk(Var, sp, name=nv)
        pre.append(self.write_target(kind, r, key, new_val, sp))
        return pre, (self.mk(Var, sp, name=old) if want_value else None)


def _clobbers(pre: list[Node], name: str) -> bool:
    """May running ``pre`` change the binding of ``name``?"""
    for item in pre:
        for n in walk(item):
            if isinstance(n, (Call, MethodCall, New)):
                return True
            if isinstance(n, (Assign, VarDecl)) and n.name == name:
                return True
    return False


def _key(v) -> str:
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    return str(v)


def program_key(file: str, text: str) -> str:
    return hashlib.sha1(f"{file}\0{text}".encode()).hexdigest()[:16]


def parse(text: str, file: str = "<input>", *, meta: bool = False, label_base: int = 0,
          temp_prefix: str | None = None) -> Program:
    """Parse surface text into a labeled core :class:`Program`."""
    parser = Parser(text, file)
    reserved = {t.value for t in parser.toks if t.kind == "ident"}
    stmts = parser.program()
    n = Normalizer(file, meta=meta, label_base=label_base, reserved=reserved, temp_prefix=temp_prefix)
    if stmts:
        first, last = stmts[0].span, stmts[-1].span
        whole = SourceSpan(file, first.start_line, first.start_col, last.end_line, last.end_col)
    else:
        whole = SourceSpan(file, 1, 1, 1, 1)
    body = n.program(stmts, whole)
    meta_labels = frozenset(n.table) if meta else frozenset()
    return Program(body=body, label_table=n.table, file=file, meta_labels=meta_labels,
                   key=program_key(file, text))
