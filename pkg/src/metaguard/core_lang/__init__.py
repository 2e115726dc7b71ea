from .lexer import ParseError, UnsupportedConstruct
from .normalize import parse
from .syntax import Label, Program, SourceSpan, UnknownLabel, shape, span_of, walk

__all__ = [
    "Label", "ParseError", "Program", "SourceSpan", "UnknownLabel",
    "UnsupportedConstruct", "parse", "shape", "span_of", "walk",
]
