"""Syntactic scan of a pragma-block body.

One walk records every variable reference (read or write, with its
subscripts), the declarations local to the block, and how reduction
variables are updated.  Classification, access patterns and the
transformability check are all computed from that record.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import AnalysisError
from ..frontend.ast import (
    Assign, Binary, Block, CallStmt, DeclStmt, Empty, Expr, For, If, Index,
    PragmaBlock, Return, Unary, Var, VarDecl, While, children, const_value,
)
from .types import (
    IN, INOUT, OUT, PRIVATE, REDUCTION, AccessPattern, FallbackReason, LoopDescriptor,
    VariableClass,
)

# Update forms accepted for each reduction operator, as (assign op, rhs shape).
# The rhs shape 'e' means ``s op= e``; 'se' means ``s = s op e``; 'es' means
# ``s = e op s`` (commutative operators only).
_REDUCTION_FORMS = {
    "+": {("+=", "e"), ("-=", "e"), ("++", ""), ("--", ""), ("=", "s+e"), ("=", "s-e"), ("=", "e+s")},
    "-": {("+=", "e"), ("-=", "e"), ("++", ""), ("--", ""), ("=", "s+e"), ("=", "s-e"), ("=", "e+s")},
    "*": {("*=", "e"), ("=", "s*e"), ("=", "e*s")},
    "/": {("/=", "e"), ("=", "s/e")},
}


def affine_form(e: Expr) -> Optional[dict]:
    """Coefficients of ``e`` as a linear form over variable names.

    The constant term uses the key 1.  Returns None when ``e`` is not affine
    with integer coefficients.
    """
    c = const_value(e)
    if c is not None:
        return {1: c} if isinstance(c, int) else None
    if isinstance(e, Var):
        return {e.name: 1}
    if isinstance(e, Unary) and e.op in "+-":
        f = affine_form(e.operand)
        if f is None:
            return None
        return f if e.op == "+" else {k: -v for k, v in f.items()}
    if isinstance(e, Binary) and e.op in ("+", "-", "*"):
        lf, rf = affine_form(e.left), affine_form(e.right)
        if lf is None or rf is None:
            return None
        if e.op == "*":
            if set(lf) == {1}:
                k, f = lf[1], rf
            elif set(rf) == {1}:
                k, f = rf[1], lf
            else:
                return None
            return {n: k * v for n, v in f.items()}
        sign = 1 if e.op == "+" else -1
        out = dict(lf)
        for n, v in rf.items():
            out[n] = out.get(n, 0) + sign * v
        return out
    return None


@dataclass
class Ref:
    name: str
    decl: Optional[VarDecl]  # None for block-local declarations
    write: bool
    indices: Optional[list[Expr]]
    span: object = None


@dataclass
class FirstSubscript:
    """Shape of one reference's first subscript relative to the iterator."""

    form: Optional[tuple[int, int]]  # (a, b) when exactly a*iterator + b, a != 0
    has_iterator: bool
    affine: bool


def first_subscript(ref: Ref, iterator: str) -> Optional[FirstSubscript]:
    if not ref.indices:
        return None
    f = affine_form(ref.indices[0])
    if f is None:
        return FirstSubscript(None, iterator in _names(ref.indices[0]), False)
    a = f.get(iterator, 0)
    others = [n for n, v in f.items() if n not in (1, iterator) and v != 0]
    form = (a, f.get(1, 0)) if a != 0 and not others else None
    return FirstSubscript(form, a != 0, True)


def _names(e: Expr) -> set[str]:
    out = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, (Var, Index)):
            out.add(n.name)
        stack.extend(children(n))
    return out


@dataclass
class BlockScan:
    block: PragmaBlock
    loop: LoopDescriptor
    refs: list[Ref] = field(default_factory=list)
    locals: dict[str, VarDecl] = field(default_factory=dict)
    outer: dict[str, Optional[VarDecl]] = field(default_factory=dict)  # name -> declaration
    reduction_updates: dict[str, list[tuple[Assign, Expr]]] = field(default_factory=dict)
    problem: Optional[FallbackReason] = None

    @property
    def reduction_vars(self) -> list[str]:
        return list(self.block.directive.reduction_vars)

    @property
    def private_names(self) -> set[str]:
        return {self.loop.iterator} | set(self.block.directive.private) | set(self.locals)

    def refs_to(self, name: str) -> list[Ref]:
        return [r for r in self.refs if r.name == name and r.decl is not None]

    def flag(self, code: str, span, message: str):
        if self.problem is None:
            self.problem = FallbackReason(code, span, message)


class _Scanner:
    def __init__(self, scan: BlockScan, scope: dict[str, VarDecl]):
        self.scan = scan
        self.outer_scope = scope
        self.scopes: list[dict[str, VarDecl]] = [{}]
        reds = scan.block.directive.reduction_vars
        self.reductions = set(reds)
        self.red_op = scan.block.directive.reduction_op

    # -- name resolution ---------------------------------------------------
    def local(self, name) -> Optional[VarDecl]:
        for sc in reversed(self.scopes):
            if name in sc:
                return sc[name]
        return None

    def declare(self, d: VarDecl):
        if d.name in self.scan.outer:
            self.scan.flag("UnsupportedBody", d.span, f"declaration of {d.name} shadows another variable used in the block")
        self.scopes[-1][d.name] = d
        self.scan.locals[d.name] = d

    def ref(self, name, write, indices, span):
        if self.local(name) is not None:
            self.scan.refs.append(Ref(name, None, write, indices, span))
            return
        if name in self.scan.locals:
            self.scan.flag("UnsupportedBody", span, f"{name} is used both as a block-local and an outer variable")
        decl = self.outer_scope.get(name)
        if decl is None and self.outer_scope:
            raise AnalysisError(f"variable {name} has no declaration in scope", span)
        self.scan.outer[name] = decl
        self.scan.refs.append(Ref(name, decl if decl is not None else _UNKNOWN, write, indices, span))

    # -- expressions -----------------------------------------------------
    def expr(self, e: Optional[Expr]):
        if e is None:
            return
        if isinstance(e, Var):
            if e.name in self.reductions:
                self.scan.flag("UnsupportedBody", e.span, f"reduction variable {e.name} is read outside its update")
            self.ref(e.name, False, None, e.span)
        elif isinstance(e, Index):
            for i in e.indices:
                self.expr(i)
            self.ref(e.name, False, e.indices, e.span)
        else:
            for c in children(e):
                self.expr(c)

    # -- statements ------------------------------------------------------
    def stmts(self, s, new_scope=True):
        if new_scope:
            self.scopes.append({})
        self.stmt(s)
        if new_scope:
            self.scopes.pop()

    def stmt(self, s):
        if isinstance(s, DeclStmt):
            for d in s.decls:
                self.expr(d.init)
                self.declare(d)
        elif isinstance(s, Assign):
            self.assign(s)
        elif isinstance(s, Block):
            self.scopes.append({})
            for c in s.stmts:
                self.stmt(c)
            self.scopes.pop()
        elif isinstance(s, If):
            self.expr(s.cond)
            self.stmts(s.then)
            if s.orelse is not None:
                self.stmts(s.orelse)
        elif isinstance(s, While):
            self.expr(s.cond)
            self.stmts(s.body)
        elif isinstance(s, For):
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init)
            self.expr(s.cond)
            if s.step is not None:
                self.stmt(s.step)
            self.stmts(s.body)
            self.scopes.pop()
        elif isinstance(s, Empty):
            pass
        elif isinstance(s, CallStmt):
            self.scan.flag("UnsupportedBody", s.span, f"call to {s.name} inside a parallel loop")
            for a in s.args:
                self.expr(a)
        elif isinstance(s, Return):
            self.scan.flag("UnsupportedBody", s.span, "return inside a parallel loop")
            self.expr(s.value)
        elif isinstance(s, PragmaBlock):
            self.scan.flag("UnsupportedBody", s.span, "nested parallel loop")
            self.stmts(s.loop)
        else:  # pragma: no cover - the parser produces no other statements
            raise AnalysisError(f"unexpected statement {type(s).__name__}", s.span)

    def assign(self, s: Assign):
        tgt = s.target
        if isinstance(tgt, Var) and tgt.name in self.reductions and self.local(tgt.name) is None:
            self.reduction_update(s)
            return
        if isinstance(tgt, Index):
            for i in tgt.indices:
                self.expr(i)
        if s.op != "=":
            self.expr(tgt) if isinstance(tgt, Var) else self.ref(tgt.name, False, tgt.indices, tgt.span)
        self.expr(s.value)
        self.ref(tgt.name, True, tgt.indices if isinstance(tgt, Index) else None, tgt.span)

    def reduction_update(self, s: Assign):
        name = s.target.name
        shape, operand = _update_shape(s, name)
        if (s.op, shape) not in _REDUCTION_FORMS.get(self.red_op, ()):
            self.scan.flag("UnsupportedBody", s.span,
                           f"update of reduction variable {name} is not of the form {name} {self.red_op}= expr")
            operand = s.value
        self.expr(operand)
        self.scan.outer[name] = self.outer_scope.get(name)
        self.scan.refs.append(Ref(name, self.outer_scope.get(name) or _UNKNOWN, True, None, s.span))
        self.scan.reduction_updates.setdefault(name, []).append((s, operand))


_UNKNOWN = VarDecl("?", "int")


def _update_shape(s: Assign, name: str) -> tuple[str, Optional[Expr]]:
    if s.op in ("++", "--"):
        return "", None
    if s.op != "=":
        return "e", s.value
    v = s.value
    if isinstance(v, Binary) and v.op in "+-*/":
        if isinstance(v.left, Var) and v.left.name == name and name not in _names(v.right):
            return "s" + v.op + "e", v.right
        if isinstance(v.right, Var) and v.right.name == name and name not in _names(v.left):
            return "e" + v.op + "s", v.left
    return "?", v


def scan_block(block: PragmaBlock, loop: LoopDescriptor, scope: Optional[dict] = None) -> BlockScan:
    """Walk the block body; ``scope`` maps names visible at the pragma to
    declarations (omit it to skip declaration checks)."""
    scan = BlockScan(block, loop)
    sc = _Scanner(scan, scope or {})
    # Loop control expressions are evaluated where the block starts.
    sc.expr(loop.initial)
    sc.expr(loop.bound)
    if loop.declared_in_init:
        sc.declare(block.loop.init.decls[0])
    else:
        sc.ref(loop.iterator, True, None, block.loop.span)
    sc.stmts(block.loop.body)
    for r in block.directive.reduction_vars:
        d = (scope or {}).get(r)
        if d is not None and d.is_array:
            scan.flag("UnsupportedBody", block.span, f"reduction variable {r} is an array")
        if d is not None:
            # listed in the clause but possibly never touched by the body
            scan.outer.setdefault(r, d)
    return scan


# ---------------------------------------------------------------------------
# classification


def classify_scan(scan: BlockScan) -> dict[str, VariableClass]:
    """Classes for every variable referenced in the block.

    Written shared variables are OUT (or INOUT when also read inside); the
    liveness scan is reported separately and never demotes a class.
    """
    d = scan.block.directive
    privates = scan.private_names
    classes: dict[str, VariableClass] = {}
    for name in scan.locals:
        classes[name] = VariableClass(PRIVATE)
    for name in scan.outer:
        if name in d.reduction_vars:
            classes[name] = VariableClass(REDUCTION, d.reduction_op)
        elif name in privates:
            classes[name] = VariableClass(PRIVATE)
        else:
            refs = scan.refs_to(name)
            read = any(not r.write for r in refs)
            written = any(r.write for r in refs)
            classes[name] = VariableClass(INOUT if read and written else OUT if written else IN)
    for name in d.reduction_vars:
        classes.setdefault(name, VariableClass(REDUCTION, d.reduction_op))
    classes[scan.loop.iterator] = VariableClass(PRIVATE)
    return classes


def access_patterns(scan: BlockScan) -> list[AccessPattern]:
    it = scan.loop.iterator
    out = []
    for name in scan.outer:
        refs = scan.refs_to(name)
        if not refs:
            continue
        is_array = any(r.indices for r in refs)
        ap = AccessPattern(
            variable=name,
            kind="array" if is_array else "scalar",
            written=any(r.write for r in refs),
            read=any(not r.write for r in refs),
            reduction_update=name in scan.reduction_updates,
            span=refs[0].span,
        )
        if is_array:
            firsts = [first_subscript(r, it) for r in refs]
            focus = [f for r, f in zip(refs, firsts) if r.write] if ap.written else firsts
            ap.first_subscript_linear_in_iterator = all(f.form is not None for f in focus)
            ap.iterator_in_first_subscript = any(f.has_iterator for f in firsts)
            ap.iterator_in_other_subscript = any(
                it in _names(ix) for r in refs for ix in r.indices[1:]
            )
            forms = {f.form for f in firsts}
            ap.first_affine = forms.pop() if len(forms) == 1 else None
            ap.affine = all(affine_form(ix) is not None for r in refs for ix in r.indices)
        out.append(ap)
    return out

