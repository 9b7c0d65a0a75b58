"""Result types produced by the block analyses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend.ast import Expr, OmpDirective, VarDecl
from ..frontend.lexer import SourceSpan

IN, OUT, INOUT, PRIVATE, REDUCTION = "IN", "OUT", "INOUT", "PRIVATE", "REDUCTION"

FALLBACK_CODES = (
    "NonLinearIncrement",
    "ComplexCondition",
    "IteratorNotFirstSubscriptUnsafe",
    "ConcurrentSharedWrite",
    "NonLinearAccess",
    "UnsupportedBody",
)

REDUCTION_IDENTITY = {"+": 0, "-": 0, "*": 1, "/": 1}


@dataclass(frozen=True)
class VariableClass:
    tag: str
    op: Optional[str] = None

    def __str__(self):
        return f"{self.tag}({self.op})" if self.tag == REDUCTION else self.tag


@dataclass(frozen=True)
class FallbackReason:
    code: str
    span: Optional[SourceSpan]
    message: str

    def __post_init__(self):
        if self.code not in FALLBACK_CODES:
            raise ValueError(f"unknown fallback code {self.code}")

    def __str__(self):
        where = f" at {self.span}" if self.span else ""
        return f"{self.code}{where}: {self.message}"


def trip_count(initial: int, bound: int, stride: int, cmp: str) -> int:
    """Number of iterations of ``for (i = initial; i cmp bound; i += stride)``."""
    if stride > 0:
        if cmp == "<":
            return max(0, -((initial - bound) // stride))
        if cmp == "<=":
            return max(0, (bound - initial) // stride + 1)
    elif stride < 0:
        s = -stride
        if cmp == ">":
            return max(0, -((bound - initial) // s))
        if cmp == ">=":
            return max(0, (initial - bound) // s + 1)
    raise ValueError(f"inconsistent loop: stride {stride} with {cmp}")


@dataclass
class LoopDescriptor:
    iterator: str
    initial: Expr
    bound: Expr
    stride: int
    cmp: str
    iterator_base: str = "int"
    declared_in_init: bool = False

    def __post_init__(self):
        if self.stride == 0:
            raise ValueError("stride must be nonzero")
        if (self.stride > 0) != (self.cmp in ("<", "<=")):
            raise ValueError(f"stride {self.stride} inconsistent with comparison {self.cmp}")

    def trip_count_for(self, initial: int, bound: int) -> int:
        return trip_count(initial, bound, self.stride, self.cmp)

    @property
    def trip_count(self) -> Optional[int]:
        """Trip count when both ends are compile-time constants, else None."""
        from ..frontend.ast import const_value

        lo, hi = const_value(self.initial), const_value(self.bound)
        if not isinstance(lo, int) or not isinstance(hi, int):
            return None
        return self.trip_count_for(lo, hi)

    def iterations(self, initial: int, bound: int) -> list[int]:
        return [initial + k * self.stride for k in range(self.trip_count_for(initial, bound))]


@dataclass
class AccessPattern:
    variable: str
    kind: str  # 'scalar' or 'array'
    written: bool
    read: bool
    first_subscript_linear_in_iterator: bool = False
    iterator_in_other_subscript: bool = False
    first_affine: Optional[tuple[int, int]] = None  # (a, b) for a*iterator + b
    iterator_in_first_subscript: bool = False
    affine: bool = True  # every subscript is affine in loop-scope variables
    local: bool = False  # resolves to a declaration inside the block
    reduction_update: bool = False
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True)
class TransferRule:
    """How an array crosses between master and worker for one chunk.

    ``slice_rows`` moves the rows ``a*i + b`` touched by the chunk's
    iterations; ``whole`` moves every element; ``full_array_last_worker``
    moves the whole array back only from the worker that ran the final chunk.
    """

    kind: str
    a: int = 0
    b: int = 0


@dataclass
class ReductionInfo:
    op: str
    variable: str
    initial: int
    base: str


@dataclass
class TransformPlan:
    block_id: int
    loop: LoopDescriptor
    classes: dict[str, VariableClass]
    schedule: str
    transfers: dict[str, TransferRule]
    inputs: dict[str, TransferRule]  # read-side transfers, IN scalars use kind 'scalar'
    reductions: list[ReductionInfo]
    enclosing_loop: bool
    decls: dict[str, VarDecl] = field(default_factory=dict, repr=False)
    var_ids: dict[str, int] = field(default_factory=dict, repr=False)
    global_names: frozenset = frozenset()
    directive: Optional[OmpDirective] = field(default=None, repr=False)
    warnings: list[str] = field(default_factory=list)
    loop_body: Optional[object] = field(default=None, repr=False, compare=False)

    @property
    def reduction(self) -> Optional[tuple[str, str, int]]:
        if not self.reductions:
            return None
        r = self.reductions[0]
        return (r.op, r.variable, r.initial)

    def data_in_order(self) -> list[str]:
        """Variables shipped with every WORK message: scalars first, then
        arrays, each group in declaration order."""
        names = list(self.inputs)
        for name in self.transfers:
            if name not in self.inputs:
                names.append(name)

        def key(n):
            decl = self.decls.get(n)
            return (1 if decl is not None and decl.is_array else 0, self.var_ids[n])

        return sorted(names, key=key)
