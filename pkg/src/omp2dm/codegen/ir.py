"""Message-passing statement nodes and the lowered program container.

The nodes extend the source AST, so a lowered program is an ordinary
statement tree with a few extra node kinds.  The C printer and the
simulator both walk this one tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend.ast import Block, Expr, If, Node, Program, Stmt, VarDecl
from ..frontend.ast import Binary, IntLit, Var

HELPER_PREFIX = "_omp2dm_"

# MPI datatype names by declared scalar kind.
MPI_TYPES = {"int": "MPI_INT", "long": "MPI_LONG", "float": "MPI_FLOAT", "double": "MPI_DOUBLE"}


# -- expressions -------------------------------------------------------------


@dataclass
class AnySource(Expr):
    pass


@dataclass
class AnyTag(Expr):
    pass


@dataclass
class TagRef(Expr):
    """A message tag; printed as its macro name, evaluated as ``value``."""

    macro: str
    value: int


@dataclass
class StatusField(Expr):
    name: str  # 'MPI_SOURCE' or 'MPI_TAG'


@dataclass
class Buf(Node):
    """Start address of a message buffer: ``&x`` or ``&A[r][c]``."""

    name: str
    indices: Optional[list[Expr]] = None


# -- statements --------------------------------------------------------------


@dataclass
class MpiInit(Stmt):
    pass


@dataclass
class MpiFinalize(Stmt):
    pass


@dataclass
class CommRank(Stmt):
    target: str


@dataclass
class CommSize(Stmt):
    target: str


@dataclass
class MpiSend(Stmt):
    buf: Buf
    count: Expr
    dtype: str
    dest: Expr
    tag: Expr


@dataclass
class MpiRecv(Stmt):
    buf: Buf
    count: Expr
    dtype: str
    source: Expr
    tag: Expr


@dataclass
class StatusDecl(Stmt):
    name: str


@dataclass
class Comment(Stmt):
    text: str


@dataclass
class ProtocolFail(Stmt):
    """Unexpected tag on a worker: report it and stop the process."""

    tag: Expr


@dataclass
class OmpPragma(Stmt):
    """A kept ``#pragma omp`` line in front of a fallback loop (hybrid output)."""

    text: str


# -- program container -------------------------------------------------------


@dataclass
class MpiProgram:
    """Lowered program: per-rank code plus the tables it was built from.

    ``main_body`` assembles the emitted main function: helper declarations,
    the MPI setup, the worker branch (``rank != 0``) running the service
    loop, then the rewritten original body for rank 0 and the epilogue.
    """

    defines: dict
    globals: list[VarDecl]
    helpers: list[Stmt]
    setup: list[Stmt]
    worker_service: list[Stmt]
    master_code: list[Stmt]
    epilogue: list[Stmt]
    tags: dict[str, int]
    capture: list[str]
    plans: dict = field(default_factory=dict)
    fallbacks: dict = field(default_factory=dict)
    fallback_mode: str = "seq"
    file: str = "<input>"
    source: Optional[Program] = field(default=None, repr=False, compare=False)

    @property
    def rank_var(self) -> str:
        return HELPER_PREFIX + "rank"

    def worker_branch(self) -> Stmt:
        cond = Binary("!=", Var(self.rank_var), IntLit(0))
        return If(cond, Block(list(self.worker_service)), role="worker_branch")

    def main_body(self) -> Block:
        stmts = list(self.helpers) + list(self.setup)
        if self.worker_service:
            stmts.append(self.worker_branch())
        stmts += list(self.master_code) + list(self.epilogue)
        return Block(stmts)
