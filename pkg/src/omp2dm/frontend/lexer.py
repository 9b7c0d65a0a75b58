"""Tokenizer for the supported C subset.

``#pragma omp`` lines survive as single ``pragma`` tokens and ``#define``
lines as ``define`` tokens; every other preprocessor line and all comments
are dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset(
    {
        "int", "long", "float", "double", "void",
        "if", "else", "for", "while", "return",
        # recognized only so the parser can reject them by name
        "goto", "switch", "case", "default", "struct", "union", "typedef",
        "do", "break", "continue", "sizeof", "char", "unsigned", "signed",
        "short", "const", "static", "extern", "enum", "auto", "register",
        "volatile",
    }
)

# longest operators first
OPERATORS = [
    "<<=", ">>=", "...",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "->",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~", "?", ":",
]
PUNCT = set("(){}[],.")

_FLOAT_RE = re.compile(r"(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fFlL]?|\d+[eE][+-]?\d+[fFlL]?")
_HEX_RE = re.compile(r"0[xX][0-9a-fA-F]+[uUlL]*")
_INT_RE = re.compile(r"\d+[uUlL]*")
_IDENT_RE = re.compile(r"[A-Za-z_]\w*")


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError(f"invalid span {self!r}")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: str  # kw ident int float string op punct semi pragma define eof
    text: str
    span: SourceSpan

    def __repr__(self):
        return f"{self.kind}:{self.text}"


def _join_continuations(line: str, lines: list[str], idx: int) -> tuple[str, int]:
    while line.rstrip().endswith("\\") and idx + 1 < len(lines):
        idx += 1
        line = line.rstrip()[:-1] + " " + lines[idx]
    return line, idx


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens; the list always ends with an ``eof`` token."""
    tokens: list[Token] = []
    lines = source.split("\n")
    in_comment = False
    idx = 0
    while idx < len(lines):
        line = lines[idx]
        lineno = idx + 1
        col = 0
        if not in_comment:
            stripped = line.lstrip()
            if stripped.startswith("#"):
                start_col = len(line) - len(stripped) + 1
                full, idx = _join_continuations(stripped, lines, idx)
                directive = full[1:].strip()
                # strip trailing line comments from the directive
                directive = re.sub(r"//.*$", "", directive)
                directive = re.sub(r"/\*.*?\*/", " ", directive).strip()
                span = SourceSpan(file, lineno, start_col, max(1, len(stripped)))
                if re.match(r"pragma\s+omp\b", directive):
                    text = re.sub(r"\s+", " ", directive[len("pragma"):].strip())
                    tokens.append(Token("pragma", text, span))
                elif re.match(r"define\b", directive):
                    tokens.append(Token("define", directive[len("define"):].strip(), span))
                idx += 1
                continue
        n = len(line)
        while col < n:
            if in_comment:
                end = line.find("*/", col)
                if end < 0:
                    col = n
                    break
                in_comment = False
                col = end + 2
                continue
            ch = line[col]
            if ch in " \t\r\f\v":
                col += 1
                continue
            if line.startswith("//", col):
                break
            if line.startswith("/*", col):
                in_comment = True
                col += 2
                continue
            start = col
            span_of = lambda length: SourceSpan(file, lineno, start + 1, max(1, length))  # noqa: E731
            if ch == '"':
                j = col + 1
                buf = []
                while j < n and line[j] != '"':
                    if line[j] == "\\" and j + 1 < n:
                        buf.append(line[j : j + 2])
                        j += 2
                    else:
                        buf.append(line[j])
                        j += 1
                if j >= n:
                    raise LexError("unterminated string literal", span_of(n - col))
                tokens.append(Token("string", "".join(buf), span_of(j + 1 - col)))
                col = j + 1
                continue
            if ch == "'":
                raise LexError("character literals are not supported", span_of(1))
            m = _FLOAT_RE.match(line, col)
            if m and (ch.isdigit() or ch == "."):
                tokens.append(Token("float", m.group(0), span_of(len(m.group(0)))))
                col = m.end()
                continue
            m = _HEX_RE.match(line, col) or _INT_RE.match(line, col)
            if m:
                tokens.append(Token("int", m.group(0), span_of(len(m.group(0)))))
                col = m.end()
                continue
            m = _IDENT_RE.match(line, col)
            if m:
                word = m.group(0)
                kind = "kw" if word in KEYWORDS else "ident"
                tokens.append(Token(kind, word, span_of(len(word))))
                col = m.end()
                continue
            if ch == ";":
                tokens.append(Token("semi", ";", span_of(1)))
                col += 1
                continue
            for op in OPERATORS:
                if line.startswith(op, col):
                    tokens.append(Token("op", op, span_of(len(op))))
                    col += len(op)
                    break
            else:
                if ch in PUNCT:
                    tokens.append(Token("punct", ch, span_of(1)))
                    col += 1
                else:
                    raise LexError(f"illegal character {ch!r}", span_of(1))
        idx += 1
    if in_comment:
        raise LexError("unterminated comment", SourceSpan(file, max(1, len(lines)), 1, 1))
    last_line = max(1, len(lines))
    tokens.append(Token("eof", "", SourceSpan(file, last_line, 1, 1)))
    return tokens
