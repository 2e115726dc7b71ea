"""A small access-control policy builder compiled to META trap code.

Policy files (``.pol``) hold one builder chain per statement::

    // at most three fetch calls
    fetch3: GG.onCall(fetch).moreThan(3).deny();
    iframe: onCall(document.createElement).with(arg(equals(0, 'iframe'))).deny();

The ``GG.`` prefix is optional.  See docs/grammar.md for the full grammar.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional, Union


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class ArgMatch:
    kind: str                     # equals | notStartsWith | isString
    index: int
    value: Union[str, float, bool, None] = None


@dataclass(frozen=True)
class PolicySpec:
    id: str
    target: str                   # dotted global path, e.g. document.createElement
    matchers: tuple = ()
    more_than: Optional[int] = None

    def __post_init__(self):
        if self.more_than is not None and self.more_than < 0:
            raise PolicyError("moreThan count must be non-negative")
        for m in self.matchers:
            if m.index < 0:
                raise PolicyError("argument index must be non-negative")


MATCHERS = {"equals": 2, "notStartsWith": 2, "isString": 1}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|\#[^\n]*)
  | (?P<str>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<num>-?\d+(?:\.\d+)?)
  | (?P<id>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<p>[().,:;])
""", re.VERBOSE)


def _tokens(text: str, file: str):
    pos = 0
    line = 1
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolicyError(f"{file}:{line}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), line))
        line += m.group().count("\n")
        pos = m.end()
    out.append(("eof", "", line))
    return out


def _unquote(s: str) -> str:
    body = s[1:-1]
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body)


class _Parser:
    def __init__(self, text: str, file: str):
        self.toks = _tokens(text, file)
        self.i = 0
        self.file = file

    def error(self, msg):
        return PolicyError(f"{self.file}:{self.toks[self.i][2]}: {msg}")

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        k, v, _ = self.tok
        if (kind is not None and k != kind) or (value is not None and v != value):
            raise self.error(f"expected {value or kind}, found {v or 'end of file'!r}")
        self.i += 1
        return v

    def at(self, value) -> bool:
        return self.tok[1] == value and self.tok[0] in ("p", "id")

    def name(self) -> str:
        # combinator name with the optional GG. prefix
        n = self.take("id")
        if n == "GG" and self.at("."):
            self.take("p", ".")
            n = self.take("id")
        return n

    def specs(self) -> list[PolicySpec]:
        out = []
        while self.tok[0] != "eof":
            out.append(self.stmt(len(out)))
        return out

    def stmt(self, n: int) -> PolicySpec:
        pid = f"p{n}"
        if self.tok[0] == "id" and self.toks[self.i + 1][1] == ":":
            pid = self.take("id")
            self.take("p", ":")
        head = self.name()
        if head != "onCall":
            raise self.error(f"unknown builder combinator {head!r}")
        self.take("p", "(")
        target = self.dotted()
        self.take("p", ")")
        matchers = []
        more = None
        denied = False
        while self.at("."):
            self.take("p", ".")
            comb = self.take("id")
            self.take("p", "(")
            if comb == "with":
                if self.name() != "arg":
                    raise self.error("with() expects arg(...)")
                self.take("p", "(")
                matchers.append(self.matcher())
                self.take("p", ")")
            elif comb == "moreThan":
                if more is not None:
                    raise self.error("moreThan given twice")
                more = int(self.number())
            elif comb == "deny":
                denied = True
            else:
                raise self.error(f"unknown builder combinator {comb!r}")
            self.take("p", ")")
            if denied:
                break
        if not denied:
            raise self.error("a policy must end with deny()")
        self.take("p", ";")
        return PolicySpec(pid, target, tuple(matchers), more)

    def dotted(self) -> str:
        parts = [self.take("id")]
        while self.at("."):
            self.take("p", ".")
            parts.append(self.take("id"))
        return ".".join(parts)

    def number(self) -> float:
        v = float(self.take("num"))
        return int(v) if v == int(v) else v

    def literal(self):
        k, v, _ = self.tok
        if k == "str":
            self.i += 1
            return _unquote(v)
        if k == "num":
            return self.number()
        if k == "id" and v in ("true", "false", "null"):
            self.i += 1
            return {"true": True, "false": False, "null": None}[v]
        raise self.error(f"expected a literal, found {v!r}")

    def matcher(self) -> ArgMatch:
        kind = self.name()
        if kind not in MATCHERS:
            raise self.error(f"unknown builder combinator {kind!r}")
        self.take("p", "(")
        idx = self.number()
        if not isinstance(idx, int) or idx < 0:
            raise self.error("argument index must be a non-negative integer")
        value = None
        if MATCHERS[kind] == 2:
            self.take("p", ",")
            value = self.literal()
            if kind == "notStartsWith" and not isinstance(value, str):
                raise self.error("notStartsWith expects a string prefix")
        self.take("p", ")")
        return ArgMatch(kind, idx, value)


def parse_policy(text: str, file: str = "<policy>") -> list[PolicySpec]:
    specs = _Parser(text, file).specs()
    seen = set()
    for s in specs:
        if s.id in seen:
            raise PolicyError(f"{file}: duplicate policy id {s.id!r}")
        seen.add(s.id)
    return specs


def _lit(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    return repr(v)


def _condition(i: int, s: PolicySpec) -> str:
    parts = [f"fn === this.t{i}"]
    for m in s.matchers:
        a = f"args[{m.index}]"
        if m.kind == "equals":
            parts.append(f"{a} === {_lit(m.value)}")
        elif m.kind == "notStartsWith":
            parts.append(f"!startsWith({a}, {_lit(m.value)})")
        else:
            parts.append(f'{a} + "" === {a}')
    if s.more_than is not None:
        parts.append(f"this.c{i}++ >= {s.more_than}")
    return " && ".join(parts)


def compile_policy(specs: list[PolicySpec]) -> str:
    """META object enforcing ``specs`` through an apply trap."""
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids):
        raise PolicyError("duplicate policy ids")
    lines = ["var META = {", "  PROCEED: true,", "  HALT: false,"]
    for i, s in enumerate(specs):
        lines.append(f"  // {s.id}")
        lines.append(f"  t{i}: {s.target},")
        if s.more_than is not None:
            lines.append(f"  c{i}: 0,")
    lines.append("  apply: function (fn, args, recv) {")
    for i, s in enumerate(specs):
        lines.append(f"    if ({_condition(i, s)}) {{")
        lines.append("      return this.HALT;")
        lines.append("    }")
    lines.append("    return this.PROCEED;")
    lines.append("  }")
    lines.append("};")
    return "\n".join(lines) + "\n"
