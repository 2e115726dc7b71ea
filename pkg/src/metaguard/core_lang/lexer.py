from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import SourceSpan


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self):
        return f"{self.span.file}:{self.span.start_line}:{self.span.start_col}: {self.message}"


class UnsupportedConstruct(ParseError):
    def __init__(self, what: str, span: SourceSpan):
        super().__init__(f"unsupported construct: {what}", span)


@dataclass
class Token:
    kind: str  # num, str, ident, kw, punct, eof
    value: object
    line: int
    col: int
    end_line: int
    end_col: int


KEYWORDS = {
    "var", "let", "const", "function", "return", "if", "else", "while", "for",
    "new", "this", "true", "false", "undefined", "null",
}
UNSUPPORTED_KEYWORDS = {
    "class", "async", "await", "yield", "import", "export", "try", "catch",
    "finally", "throw", "switch", "case", "do", "break", "continue", "delete",
    "typeof", "instanceof", "in", "of", "with", "debugger", "super", "extends",
}

PUNCT = [
    "===", "!==", "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
    "-=", "*=", "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "+", "-",
    "*", "/", "%", "<", ">", "!", "?", ":",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<str>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<punct>"""
    + "|".join(re.escape(p) for p in PUNCT)
    + r""")
  | (?P<backtick>`)
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "0": "\0"}


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(file, line, col, line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        lexeme = m.group(kind)
        nl = lexeme.count("\n")
        if nl:
            end_line = line + nl
            end_col = len(lexeme) - lexeme.rfind("\n")
        else:
            end_line, end_col = line, col + len(lexeme)
        if kind == "backtick":
            raise UnsupportedConstruct("template string", SourceSpan(file, line, col, line, col + 1))
        if kind == "num":
            f = float(lexeme)
            tokens.append(Token("num", int(f) if f.is_integer() else f, line, col, end_line, end_col))
        elif kind == "str":
            tokens.append(Token("str", _unescape(lexeme[1:-1]), line, col, end_line, end_col))
        elif kind == "ident":
            k = "kw" if lexeme in KEYWORDS else "ident"
            tokens.append(Token(k, lexeme, line, col, end_line, end_col))
        elif kind == "punct":
            tokens.append(Token("punct", lexeme, line, col, end_line, end_col))
        pos = m.end()
        line, col = end_line, end_col
    tokens.append(Token("eof", None, line, col, line, col))
    return tokens
