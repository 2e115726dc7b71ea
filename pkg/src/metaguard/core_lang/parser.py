"""Recursive-descent parser for the surface syntax.

The surface grammar (documented in ``docs/grammar.md``) is a small subset of
C-family script syntax.  Parsing produces a surface tree which
:mod:`metaguard.core_lang.normalize` lowers to the labeled core AST.
"""
from __future__ import annotations

from .lexer import ParseError, Token, UnsupportedConstruct, UNSUPPORTED_KEYWORDS, tokenize
from .syntax import SourceSpan


class S:
    """Surface syntax node."""

    def __init__(self, kind: str, span: SourceSpan, **kw):
        self.kind = kind
        self.span = span
        self.__dict__.update(kw)

    def __repr__(self):
        kw = {k: v for k, v in self.__dict__.items() if k not in ("kind", "span")}
        return f"S({self.kind}, {kw})"


_BINARY_PREC = [
    ("||",),
    ("&&",),
    ("==", "!=", "===", "!=="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value, kind=None) -> bool:
        t = self.tok
        if kind is not None and t.kind != kind:
            return False
        return t.value == value and t.kind in ("punct", "kw", "ident")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def tspan(self, t: Token) -> SourceSpan:
        return SourceSpan(self.file, t.line, t.col, t.end_line, t.end_col)

    def span_from(self, start: Token) -> SourceSpan:
        last = self.toks[max(self.i - 1, 0)]
        return SourceSpan(self.file, start.line, start.col, last.end_line, last.end_col)

    def error(self, msg: str, t: Token | None = None):
        raise ParseError(msg, self.tspan(t or self.tok))

    def expect(self, value: str) -> Token:
        if not (self.tok.kind in ("punct", "kw") and self.tok.value == value):
            got = "end of input" if self.tok.kind == "eof" else repr(self.tok.value)
            self.error(f"expected {value!r}, got {got}")
        return self.advance()

    def check_unsupported(self):
        t = self.tok
        if t.kind == "ident" and t.value in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(t.value, self.tspan(t))
        if t.kind == "ident" and t.value == "eval":
            raise UnsupportedConstruct("eval", self.tspan(t))

    def ident(self) -> str:
        self.check_unsupported()
        if self.tok.kind != "ident":
            self.error(f"expected identifier, got {self.tok.value!r}")
        return self.advance().value

    # -- statements ---------------------------------------------------------

    def program(self) -> list[S]:
        body = []
        while self.tok.kind != "eof":
            body.append(self.statement())
        return body

    def statement(self) -> S:
        self.check_unsupported()
        t = self.tok
        if t.kind == "kw" and t.value in ("var", "let", "const"):
            s = self.var_decl()
            self.end_stmt()
            return s
        if self.at("function", "kw"):
            if self.peek().kind == "ident":
                return self.fun_decl()
        if self.at("if", "kw"):
            self.advance()
            self.expect("(")
            test = self.expression()
            self.expect(")")
            cons = self.statement()
            alt = None
            if self.at("else", "kw"):
                self.advance()
                alt = self.statement()
            return S("if", self.span_from(t), test=test, cons=cons, alt=alt)
        if self.at("while", "kw"):
            self.advance()
            self.expect("(")
            test = self.expression()
            self.expect(")")
            body = self.statement()
            return S("while", self.span_from(t), test=test, body=body)
        if self.at("for", "kw"):
            return self.for_stmt()
        if self.at("return", "kw"):
            self.advance()
            arg = None
            if not self.at(";") and not self.at("}"):
                arg = self.expression()
            self.end_stmt()
            return S("return", self.span_from(t), arg=arg)
        if self.at("{"):
            return self.block()
        if self.at(";"):
            self.advance()
            return S("empty", self.span_from(t))
        e = self.expression()
        self.end_stmt()
        return S("expr", self.span_from(t), expr=e)

    def end_stmt(self):
        # a semicolon may be omitted before '}' and at end of input
        if self.at(";"):
            self.advance()
        elif not (self.at("}") or self.tok.kind == "eof"):
            self.expect(";")

    def block(self) -> S:
        t = self.expect("{")
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            body.append(self.statement())
        self.advance()
        return S("block", self.span_from(t), body=body)

    def var_decl(self) -> S:
        t = self.advance()
        decls = []
        while True:
            nt = self.tok
            name = self.ident()
            init = None
            if self.at("="):
                self.advance()
                init = self.assignment()
            decls.append(S("decl", self.span_from(nt), name=name, init=init))
            if not self.at(","):
                break
            self.advance()
        return S("var", self.span_from(t), decls=decls)

    def fun_decl(self) -> S:
        t = self.advance()
        if self.at("*"):
            raise UnsupportedConstruct("generator function", self.tspan(self.tok))
        name = self.ident()
        params = self.params()
        body = self.block()
        return S("fundecl", self.span_from(t), name=name, params=params, body=body.body)

    def params(self) -> list[str]:
        self.expect("(")
        out = []
        while not self.at(")"):
            out.append(self.ident())
            if not self.at(")"):
                self.expect(",")
        self.advance()
        return out

    def for_stmt(self) -> S:
        t = self.advance()
        self.expect("(")
        init = None
        if not self.at(";"):
            if self.tok.kind == "kw" and self.tok.value in ("var", "let", "const"):
                init = self.var_decl()
            else:
                it = self.tok
                init = S("expr", self.span_from(it), expr=self.expression())
            if self.tok.kind == "ident" and self.tok.value in ("of", "in"):
                raise UnsupportedConstruct(f"for-{self.tok.value} loop", self.tspan(self.tok))
        self.expect(";")
        test = None if self.at(";") else self.expression()
        self.expect(";")
        update = None if self.at(")") else self.expression()
        self.expect(")")
        body = self.statement()
        return S("for", self.span_from(t), init=init, test=test, update=update, body=body)

    # -- expressions --------------------------------------------------------

    def expression(self) -> S:
        return self.assignment()

    def assignment(self) -> S:
        t = self.tok
        if self.is_arrow():
            return self.arrow()
        lhs = self.conditional()
        if self.tok.kind == "punct" and self.tok.value in ("=", "+=", "-=", "*="):
            op = self.advance().value
            if lhs.kind not in ("ident", "member", "index"):
                self.error("invalid assignment target", t)
            rhs = self.assignment()
            return S("assign", self.span_from(t), op=op, target=lhs, value=rhs)
        return lhs

    def is_arrow(self) -> bool:
        if self.tok.kind == "ident" and self.peek().value == "=>" and self.peek().kind == "punct":
            return True
        if not self.at("("):
            return False
        depth, j = 0, self.i
        while j < len(self.toks):
            v = self.toks[j]
            if v.kind == "punct" and v.value == "(":
                depth += 1
            elif v.kind == "punct" and v.value == ")":
                depth -= 1
                if depth == 0:
                    nxt = self.toks[j + 1]
                    return nxt.kind == "punct" and nxt.value == "=>"
            elif v.kind == "eof":
                return False
            j += 1
        return False

    def arrow(self) -> S:
        t = self.tok
        if self.tok.kind == "ident":
            params = [self.ident()]
        else:
            params = self.params()
        self.expect("=>")
        if self.at("{"):
            body = self.block().body
        else:
            et = self.tok
            e = self.assignment()
            body = [S("return", self.span_from(et), arg=e)]
        return S("fun", self.span_from(t), name=None, params=params, body=body)

    def conditional(self) -> S:
        t = self.tok
        test = self.binary(0)
        if self.at("?"):
            self.advance()
            cons = self.assignment()
            self.expect(":")
            alt = self.assignment()
            return S("cond", self.span_from(t), test=test, cons=cons, alt=alt)
        return test

    def binary(self, level: int) -> S:
        if level == len(_BINARY_PREC):
            return self.unary()
        t = self.tok
        left = self.binary(level + 1)
        ops = _BINARY_PREC[level]
        while self.tok.kind == "punct" and self.tok.value in ops:
            op = self.advance().value
            right = self.binary(level + 1)
            kind = "logical" if op in ("&&", "||") else "binary"
            left = S(kind, self.span_from(t), op=op, left=left, right=right)
        if self.tok.kind == "ident" and self.tok.value in ("in", "instanceof"):
            raise UnsupportedConstruct(self.tok.value, self.tspan(self.tok))
        return left

    def unary(self) -> S:
        t = self.tok
        self.check_unsupported()
        if self.tok.kind == "punct" and self.tok.value in ("!", "-", "+"):
            op = self.advance().value
            arg = self.unary()
            return S("unary", self.span_from(t), op=op, arg=arg)
        if self.tok.kind == "punct" and self.tok.value in ("++", "--"):
            op = self.advance().value
            target = self.unary()
            if target.kind not in ("ident", "member", "index"):
                self.error("invalid update target", t)
            return S("update", self.span_from(t), op=op, prefix=True, target=target)
        e = self.postfix()
        if self.tok.kind == "punct" and self.tok.value in ("++", "--"):
            op = self.advance().value
            if e.kind not in ("ident", "member", "index"):
                self.error("invalid update target", t)
            return S("update", self.span_from(t), op=op, prefix=False, target=e)
        return e

    def postfix(self) -> S:
        t = self.tok
        if self.at("new", "kw"):
            self.advance()
            callee = self.member_only()
            args = self.arguments() if self.at("(") else []
            e = S("new", self.span_from(t), callee=callee, args=args)
        else:
            e = self.primary()
        return self.suffixes(e, t, allow_calls=True)

    def member_only(self) -> S:
        t = self.tok
        return self.suffixes(self.primary(), t, allow_calls=False)

    def suffixes(self, e: S, t: Token, allow_calls: bool) -> S:
        while True:
            if self.at("."):
                self.advance()
                nt = self.tok
                if nt.kind not in ("ident", "kw"):
                    self.error("expected property name")
                self.advance()
                e = S("member", self.span_from(t), obj=e, name=nt.value)
            elif self.at("["):
                self.advance()
                key = self.expression()
                self.expect("]")
                e = S("index", self.span_from(t), obj=e, key=key)
            elif allow_calls and self.at("("):
                args = self.arguments()
                e = S("call", self.span_from(t), callee=e, args=args)
            else:
                return e

    def arguments(self) -> list[S]:
        self.expect("(")
        out = []
        while not self.at(")"):
            out.append(self.assignment())
            if not self.at(")"):
                self.expect(",")
        self.advance()
        return out

    def primary(self) -> S:
        t = self.tok
        self.check_unsupported()
        if t.kind == "num":
            self.advance()
            return S("lit", self.tspan(t), value=t.value)
        if t.kind == "str":
            self.advance()
            return S("lit", self.tspan(t), value=t.value)
        if t.kind == "kw":
            if t.value in ("true", "false"):
                self.advance()
                return S("lit", self.tspan(t), value=(t.value == "true"))
            if t.value in ("undefined", "null"):
                self.advance()
                return S("lit", self.tspan(t), value=None)
            if t.value == "this":
                self.advance()
                return S("this", self.tspan(t))
            if t.value == "function":
                self.advance()
                if self.at("*"):
                    raise UnsupportedConstruct("generator function", self.tspan(self.tok))
                name = self.ident() if self.tok.kind == "ident" else None
                params = self.params()
                body = self.block().body
                return S("fun", self.span_from(t), name=name, params=params, body=body)
        if t.kind == "ident":
            self.advance()
            return S("ident", self.tspan(t), name=t.value)
        if self.at("("):
            self.advance()
            e = self.expression()
            self.expect(")")
            return e
        if self.at("{"):
            return self.object_literal()
        if self.at("["):
            self.advance()
            elems = []
            while not self.at("]"):
                elems.append(self.assignment())
                if not self.at("]"):
                    self.expect(",")
            self.advance()
            return S("arr", self.span_from(t), elems=elems)
        if self.at("/"):
            raise UnsupportedConstruct("regular expression literal", self.tspan(t))
        if t.kind == "eof":
            self.error("unexpected end of input")
        self.error(f"unexpected token {t.value!r}")

    def object_literal(self) -> S:
        t = self.expect("{")
        props = []
        while not self.at("}"):
            kt = self.tok
            if kt.kind in ("ident", "kw", "str"):
                key = kt.value
            elif kt.kind == "num":
                key = _num_key(kt.value)
            else:
                self.error("expected property key")
            self.advance()
            self.expect(":")
            props.append((key, self.assignment()))
            # Listing-style ';' separators are tolerated
            if self.at(",") or self.at(";"):
                self.advance()
            elif not self.at("}"):
                self.expect(",")
        self.advance()
        return S("obj", self.span_from(t), props=props)


def _num_key(v) -> str:
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    return str(v)


def parse_surface(text: str, file: str = "<input>") -> list[S]:
    return Parser(text, file).program()
