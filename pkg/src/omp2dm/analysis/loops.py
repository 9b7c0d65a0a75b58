"""Canonical form of the loop under a pragma: iterator, start, bound, stride
and comparison."""

from __future__ import annotations

from typing import Optional, Union

from ..frontend.ast import (
    Assign, Binary, Call, DeclStmt, Expr, For, Index, Var, VarDecl,
    const_value, is_int_kind, walk,
)
from ..frontend.parser import expr_kind
from .types import FallbackReason, LoopDescriptor

_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}


def _written_names(stmt) -> set[str]:
    out = set()
    for n in walk(stmt):
        if isinstance(n, Assign):
            out.add(n.target.name)
        elif isinstance(n, DeclStmt):
            out.update(d.name for d in n.decls)
    return out


def _stride_of(step, it: str) -> Optional[int]:
    """Constant stride of a recognised increment form, else None."""
    if not isinstance(step, Assign) or not isinstance(step.target, Var) or step.target.name != it:
        return None
    if step.op == "++":
        return 1
    if step.op == "--":
        return -1
    if step.op in ("+=", "-="):
        c = const_value(step.value)
        if not isinstance(c, int):
            return None
        return c if step.op == "+=" else -c
    if step.op == "=" and isinstance(step.value, Binary) and step.value.op in "+-":
        v = step.value
        if isinstance(v.left, Var) and v.left.name == it:
            c = const_value(v.right)
            if isinstance(c, int):
                return c if v.op == "+" else -c
        if v.op == "+" and isinstance(v.right, Var) and v.right.name == it:
            c = const_value(v.left)
            if isinstance(c, int):
                return c
    return None


def _iterator_of(loop: For) -> Optional[tuple[str, Expr, bool]]:
    init = loop.init
    if isinstance(init, Assign) and init.op == "=" and isinstance(init.target, Var):
        return init.target.name, init.value, False
    if isinstance(init, DeclStmt) and len(init.decls) == 1 and init.decls[0].init is not None:
        d = init.decls[0]
        if not d.is_array:
            return d.name, d.init, True
    return None


def _kind(e: Expr, scope: dict) -> str:
    try:
        return expr_kind(e, lambda ref: scope[ref.name])
    except KeyError:
        return "int"


def loop_iterator_name(loop: For) -> Optional[str]:
    """Name of the variable a pragma loop iterates, canonical or not."""
    head = _iterator_of(loop)
    if head is not None:
        return head[0]
    if isinstance(loop.step, Assign) and isinstance(loop.step.target, Var):
        return loop.step.target.name
    return None


def _mentions(e: Expr, names: set[str]) -> bool:
    return any(isinstance(n, (Var, Index)) and n.name in names for n in walk(e))


def canonicalize_loop(
    loop: For, scope: Optional[dict[str, VarDecl]] = None
) -> Union[LoopDescriptor, FallbackReason]:
    """Extract the canonical descriptor or explain why the loop has none.

    The increment is examined first, then the initialisation, then the
    condition.  ``scope`` maps visible names to declarations and is used to
    check that the iterator is an integer.
    """
    span = loop.span
    step_span = getattr(loop.step, "span", None) or span

    # The iterator is named by the increment when the init is unusable, so
    # a bad increment is reported before anything else.
    head = _iterator_of(loop)
    it_name = loop_iterator_name(loop)
    stride = _stride_of(loop.step, it_name) if it_name else None
    if stride is None or stride == 0:
        return FallbackReason("NonLinearIncrement", step_span, "increment is not a constant step of the iterator")
    if head is None:
        return FallbackReason("UnsupportedBody", span, "loop initialisation does not assign the iterator")
    it, initial, declared = head

    base = "int"
    if declared:
        base = loop.init.decls[0].base
    elif scope is not None and it in scope:
        base = scope[it].base
        if scope[it].is_array:
            return FallbackReason("UnsupportedBody", span, f"iterator {it} is an array")
    if not is_int_kind(base):
        return FallbackReason("UnsupportedBody", span, f"iterator {it} is not an integer")

    cond = loop.cond
    if not isinstance(cond, Binary) or cond.op not in _FLIP:
        return FallbackReason("ComplexCondition", getattr(cond, "span", None) or span,
                              "condition is not a single ordered comparison")
    if isinstance(cond.left, Var) and cond.left.name == it:
        cmp, bound = cond.op, cond.right
    elif isinstance(cond.right, Var) and cond.right.name == it:
        cmp, bound = _FLIP[cond.op], cond.left
    else:
        return FallbackReason("ComplexCondition", cond.span or span,
                              f"condition does not compare the iterator {it} directly")

    written = _written_names(loop.body)
    if it in written:
        return FallbackReason("NonLinearIncrement", span, f"iterator {it} is modified inside the body")
    if _mentions(bound, {it} | written) or any(isinstance(n, Call) for n in walk(bound)):
        return FallbackReason("ComplexCondition", cond.span or span,
                              "loop bound depends on the iterator or on values changed in the body")
    if _mentions(initial, {it}):
        return FallbackReason("UnsupportedBody", span, "initial value refers to the iterator")
    if scope is not None and "double" in (_kind(initial, scope), _kind(bound, scope)):
        return FallbackReason("ComplexCondition", cond.span or span,
                              "loop start and bound must be integer expressions")
    if (stride > 0) != (cmp in ("<", "<=")):
        return FallbackReason("ComplexCondition", cond.span or span,
                              f"stride {stride} moves away from the bound under {cmp}")
    return LoopDescriptor(it, initial, bound, stride, cmp, iterator_base=base, declared_in_init=declared)

