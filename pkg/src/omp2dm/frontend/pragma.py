"""Sub-parser for the text of ``#pragma omp ...`` lines."""

from __future__ import annotations

import re
import warnings

from ..errors import PragmaError, UnsupportedConstruct
from .ast import OmpDirective

_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_]\w*)|(\d+)|(.))")
SCHEDULE_KINDS = ("static", "dynamic", "guided")
REDUCTION_OPS = ("+", "-", "*", "/")


class OmpClauseWarning(UserWarning):
    pass


def _lex(raw: str, span) -> list[str]:
    out = []
    pos = 0
    raw = raw.rstrip()
    while pos < len(raw):
        m = _TOKEN_RE.match(raw, pos)
        if not m or m.end() == pos:
            raise PragmaError(f"cannot read pragma text at {raw[pos:]!r}", span)
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    return out


class _Cursor:
    def __init__(self, toks, span):
        self.toks = toks
        self.pos = 0
        self.span = span

    def peek(self, k=0):
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise PragmaError("unexpected end of pragma", self.span)
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok != text:
            raise PragmaError(f"expected {text!r} in pragma, found {tok!r}", self.span)
        return tok

    def ident_list(self) -> list[str]:
        self.expect("(")
        names = [self._ident()]
        while self.peek() == ",":
            self.next()
            names.append(self._ident())
        self.expect(")")
        return names

    def _ident(self):
        tok = self.next()
        if not re.fullmatch(r"[A-Za-z_]\w*", tok):
            raise PragmaError(f"expected identifier in clause, found {tok!r}", self.span)
        return tok

    def skip_parens(self):
        if self.peek() != "(":
            return
        depth = 0
        while True:
            tok = self.next()
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
                if depth == 0:
                    return


def parse_omp_pragma(raw: str, span=None) -> OmpDirective:
    """Parse pragma text (without the leading ``#pragma``) into an OmpDirective.

    Unknown clauses are skipped with an :class:`OmpClauseWarning`; a clause
    given twice raises :class:`PragmaError`.
    """
    toks = _lex(raw, span)
    if not toks or toks[0] != "omp":
        raise PragmaError("pragma text must begin with 'omp'", span)
    if toks[1:3] != ["parallel", "for"]:
        raise UnsupportedConstruct(span, "omp " + " ".join(toks[1:3]))
    cur = _Cursor(toks[3:], span)
    d = OmpDirective(span=span)
    seen: set[str] = set()

    def once(name):
        if name in seen:
            raise PragmaError(f"duplicate {name} clause", span)
        seen.add(name)

    while cur.peek() is not None:
        tok = cur.next()
        if tok == ",":
            continue
        if tok == "schedule":
            once(tok)
            cur.expect("(")
            kind = cur.next()
            if kind not in SCHEDULE_KINDS:
                raise PragmaError(f"unknown schedule kind {kind!r}", span)
            d.schedule = kind
            if cur.peek() == ",":
                cur.next()
                chunk = cur.next()
                if not chunk.isdigit() or int(chunk) <= 0:
                    raise PragmaError(f"schedule chunk must be a positive constant, got {chunk!r}", span)
                d.chunk = int(chunk)
            cur.expect(")")
        elif tok == "reduction":
            once(tok)
            cur.expect("(")
            op = cur.next()
            if op not in REDUCTION_OPS:
                raise PragmaError(f"unsupported reduction operator {op!r}", span)
            cur.expect(":")
            names = [cur._ident()]
            while cur.peek() == ",":
                cur.next()
                names.append(cur._ident())
            cur.expect(")")
            d.reduction_op = op
            d.reduction_vars = names
        elif tok in ("private", "shared"):
            once(tok)
            setattr(d, tok, cur.ident_list())
        elif tok == "target":
            once(tok)
            cur.expect("device")
            cur.expect("(")
            d.target_device = cur._ident()
            cur.expect(")")
        elif re.fullmatch(r"[A-Za-z_]\w*", tok):
            msg = f"ignoring unsupported clause {tok!r}"
            d.warnings.append(msg)
            warnings.warn(msg, OmpClauseWarning, stacklevel=2)
            cur.skip_parens()
        else:
            raise PragmaError(f"malformed clause near {tok!r}", span)
    return d


def format_directive(d: OmpDirective) -> str:
    """Inverse of :func:`parse_omp_pragma` (without the ``#pragma`` prefix)."""
    parts = ["omp parallel for"]
    if d.schedule != "unspecified":
        parts.append(f"schedule({d.schedule}" + (f", {d.chunk})" if d.chunk else ")"))
    if d.reduction_op:
        parts.append(f"reduction({d.reduction_op}:{', '.join(d.reduction_vars)})")
    if d.private:
        parts.append(f"private({', '.join(d.private)})")
    if d.shared:
        parts.append(f"shared({', '.join(d.shared)})")
    if d.target_device:
        parts.append(f"target device({d.target_device})")
    return " ".join(parts)
