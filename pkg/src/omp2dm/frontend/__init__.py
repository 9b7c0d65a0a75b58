"""Lexing, parsing and printing of the supported C subset."""

from .ast import OmpDirective, PragmaBlock, Program
from .lexer import SourceSpan, Token, tokenize
from .parser import parse_source, parse_translation_unit
from .pragma import OmpClauseWarning, parse_omp_pragma
from .printer import print_program

__all__ = [
    "OmpClauseWarning", "OmpDirective", "PragmaBlock", "Program", "SourceSpan", "Token",
    "parse_omp_pragma", "parse_source", "parse_translation_unit", "print_program", "tokenize",
]
