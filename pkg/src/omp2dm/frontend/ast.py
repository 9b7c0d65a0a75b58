"""AST node types for the supported C subset.

Nodes are plain dataclasses.  Source spans never take part in equality, so
two trees built from differently formatted text compare equal when their
structure matches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lexer import SourceSpan

SCALAR_KINDS = ("int", "long", "float", "double")
INT_KINDS = ("int", "long")


def is_int_kind(base: str) -> bool:
    return base in INT_KINDS


@dataclass
class Node:
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False, kw_only=True)
    # Label attached by the code generator so later passes can find a node.
    role: str = field(default="", compare=False, repr=False, kw_only=True)


# ---------------------------------------------------------------------------
# expressions


@dataclass
class Expr(Node):
    pass


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class FloatLit(Expr):
    value: float
    text: Optional[str] = field(default=None, compare=False)


@dataclass
class StringLit(Expr):
    value: str  # raw (still escaped) body, as written between the quotes


@dataclass
class Const(Expr):
    """Use of a ``#define``d constant; prints as its name, evaluates as its value."""

    name: str
    value: object


@dataclass
class Var(Expr):
    name: str


@dataclass
class Index(Expr):
    name: str
    indices: list[Expr]


@dataclass
class Unary(Expr):
    op: str  # '-', '+', '!'
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Call(Expr):
    name: str
    args: list[Expr]


ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")
INTRINSICS = ("sqrt", "fabs", "min", "max")

# ---------------------------------------------------------------------------
# declarations and statements


@dataclass
class VarDecl(Node):
    name: str
    base: str
    dims: list[Expr] = field(default_factory=list)
    init: Optional[Expr] = None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(const_int(d) for d in self.dims)

    @property
    def is_array(self) -> bool:
        return bool(self.dims)


@dataclass
class Stmt(Node):
    pass


@dataclass
class DeclStmt(Stmt):
    decls: list[VarDecl]


@dataclass
class Assign(Stmt):
    """``target op value``; op is '=', a compound operator, '++' or '--'."""

    target: Expr  # Var or Index
    op: str
    value: Optional[Expr] = None


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt] = None


@dataclass
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    step: Optional[Stmt]
    body: Stmt


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class Block(Stmt):
    stmts: list[Stmt]


@dataclass
class CallStmt(Stmt):
    name: str
    args: list[Expr]


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class Empty(Stmt):
    pass


@dataclass
class OmpDirective(Node):
    kind: str = "parallel_for"
    schedule: str = "unspecified"
    chunk: Optional[int] = None
    reduction_op: Optional[str] = None
    reduction_vars: list[str] = field(default_factory=list)
    private: list[str] = field(default_factory=list)
    shared: list[str] = field(default_factory=list)
    target_device: Optional[str] = None
    warnings: list[str] = field(default_factory=list, compare=False)


@dataclass
class PragmaBlock(Stmt):
    directive: OmpDirective
    loop: For
    block_id: int = field(default=-1, compare=False)


@dataclass
class FunctionDef(Node):
    name: str
    ret: str
    body: Block


@dataclass
class Program(Node):
    defines: dict[str, object]
    globals: list[VarDecl]
    functions: list[FunctionDef]
    file: str = field(default="<input>", compare=False)

    @property
    def main(self) -> FunctionDef:
        for f in self.functions:
            if f.name == "main":
                return f
        raise LookupError("program has no main function")

    def pragma_blocks(self) -> list[PragmaBlock]:
        return [n for n in walk(self.main.body) if isinstance(n, PragmaBlock)]


def const_int(e: Expr) -> int:
    v = const_value(e)
    if not isinstance(v, int):
        raise ValueError(f"not an integer constant: {e!r}")
    return v


def const_value(e: Expr):
    """Fold a literal-only expression; return None when it is not constant."""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, FloatLit):
        return e.value
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Unary) and e.op in "+-":
        v = const_value(e.operand)
        if v is None:
            return None
        return -v if e.op == "-" else v
    if isinstance(e, Binary) and e.op in ARITH_OPS:
        a, b = const_value(e.left), const_value(e.right)
        if a is None or b is None:
            return None
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            return None
        if isinstance(a, int) and isinstance(b, int):
            q = abs(a) // abs(b)
            q = q if (a >= 0) == (b >= 0) else -q
            return q if e.op == "/" else a - b * q
        if e.op == "/":
            return a / b
        return None
    return None


# ---------------------------------------------------------------------------
# traversal helpers


def children(node) -> list:
    out = []
    for name in getattr(node, "__dataclass_fields__", {}):
        if name in ("span", "role"):
            continue
        val = getattr(node, name)
        if isinstance(val, Node):
            out.append(val)
        elif isinstance(val, list):
            out.extend(v for v in val if isinstance(v, Node))
    return out


def walk(node):
    """Pre-order traversal over ``node`` and all its descendants."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def expr_vars(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, (Var, Index))}
