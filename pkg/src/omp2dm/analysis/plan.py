"""Per-block transformability decision and the whole-program analysis pass."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..frontend.ast import DeclStmt, PragmaBlock, Program
from .context import BlockContext, VarTable, build_contexts, live_after
from .loops import canonicalize_loop, loop_iterator_name
from .scan import BlockScan, access_patterns, affine_form, classify_scan, first_subscript, scan_block
from .types import (
    IN, INOUT, OUT, PRIVATE, REDUCTION, REDUCTION_IDENTITY, AccessPattern, FallbackReason,
    LoopDescriptor, ReductionInfo, TransferRule, TransformPlan, VariableClass,
)

EFFECTIVE_SCHEDULE = {"unspecified": "dynamic", "dynamic": "dynamic", "static": "static", "guided": "static"}


def effective_schedule(kind: str, override: Optional[str] = None) -> str:
    if override is not None:
        if override not in ("static", "dynamic"):
            raise ValueError(f"schedule override must be static or dynamic, not {override!r}")
        return override
    return EFFECTIVE_SCHEDULE[kind]


def _write_rule(scan: BlockScan, name: str, strict: bool) -> Union[TransferRule, FallbackReason]:
    it = scan.loop.iterator
    refs = scan.refs_to(name)
    writes = [r for r in refs if r.write]
    reads = [r for r in refs if not r.write]
    forms = set()
    iterless = False
    for r in writes:
        if any(affine_form(ix) is None for ix in r.indices):
            return FallbackReason("NonLinearAccess", r.span, f"write to {name} uses a non-affine subscript")
        fs = first_subscript(r, it)
        if fs.form is not None:
            forms.add(fs.form)
        elif fs.has_iterator:
            return FallbackReason("NonLinearAccess", r.span,
                                  f"first subscript of {name} mixes the iterator {it} with other variables")
        else:
            iterless = True
    if iterless and forms:
        return FallbackReason("ConcurrentSharedWrite", writes[0].span,
                              f"{name} is written both per-iteration and at iteration-independent rows")
    if iterless:
        if strict:
            return FallbackReason("IteratorNotFirstSubscriptUnsafe", writes[0].span,
                                  f"writes to {name} do not index rows by {it}; strict mode forbids whole-array return")
        return TransferRule("full_array_last_worker")
    if len(forms) > 1:
        return FallbackReason("ConcurrentSharedWrite", writes[0].span,
                              f"{name} is written at more than one row offset per iteration")
    (a, b), = forms
    for r in reads:
        if first_subscript(r, it).form != (a, b):
            return FallbackReason("ConcurrentSharedWrite", r.span,
                                  f"{name} is read at rows written by other iterations")
    return TransferRule("slice_rows", a, b)


def _read_rule(scan: BlockScan, name: str) -> TransferRule:
    refs = scan.refs_to(name)
    if not any(r.indices for r in refs):
        return TransferRule("scalar")
    forms = {first_subscript(r, scan.loop.iterator).form for r in refs}
    if len(forms) == 1 and None not in forms:
        (a, b), = forms
        return TransferRule("slice_rows", a, b)
    return TransferRule("whole")


def check_transformability(
    block: PragmaBlock,
    classes: dict[str, VariableClass],
    loop: LoopDescriptor,
    accesses: list[AccessPattern],
    *,
    scan: BlockScan,
    strict: bool = False,
    schedule_override: Optional[str] = None,
    enclosing_loop: bool = False,
    var_ids: Optional[dict[str, int]] = None,
    global_names: frozenset = frozenset(),
) -> Union[TransformPlan, FallbackReason]:
    """Decide how the block is distributed, or why it cannot be."""
    if scan.problem is not None:
        return scan.problem
    d = block.directive
    warnings = list(d.warnings)
    if loop.iterator in d.shared:
        warnings.append(f"iterator {loop.iterator} listed shared; treated as private")
    for name in d.shared:
        if classes.get(name) == VariableClass(PRIVATE) and name != loop.iterator:
            warnings.append(f"{name} listed shared but is private to the block")
    for name in d.private:
        if name in d.reduction_vars:
            warnings.append(f"{name} listed both private and reduction; reduction wins")

    transfers: dict[str, TransferRule] = {}
    inputs: dict[str, TransferRule] = {}
    by_name = {a.variable: a for a in accesses}
    for name, cls in classes.items():
        if cls.tag in (PRIVATE, REDUCTION):
            continue
        ap = by_name.get(name)
        if ap is None:
            continue
        if cls.tag in (OUT, INOUT):
            if ap.kind == "scalar":
                return FallbackReason("ConcurrentSharedWrite", ap.span,
                                      f"shared scalar {name} is written without a reduction clause")
            rule = _write_rule(scan, name, strict)
            if isinstance(rule, FallbackReason):
                return rule
            transfers[name] = rule
        elif cls.tag == IN:
            inputs[name] = _read_rule(scan, name)

    reductions = []
    for name in d.reduction_vars:
        decl = scan.outer.get(name)
        base = decl.base if decl is not None else "int"
        if d.reduction_op not in REDUCTION_IDENTITY:  # pragma: no cover - the pragma parser rejects these
            return FallbackReason("UnsupportedBody", d.span, f"unsupported reduction {d.reduction_op}")
        reductions.append(ReductionInfo(d.reduction_op, name, REDUCTION_IDENTITY[d.reduction_op], base))

    decls = {n: dcl for n, dcl in scan.outer.items() if dcl is not None}
    return TransformPlan(
        block_id=block.block_id,
        loop=loop,
        classes=classes,
        schedule=effective_schedule(d.schedule, schedule_override),
        transfers=transfers,
        inputs=inputs,
        reductions=reductions,
        enclosing_loop=enclosing_loop,
        decls=decls,
        var_ids=dict(var_ids) if var_ids is not None else {n: i for i, n in enumerate(decls)},
        global_names=global_names,
        directive=d,
        warnings=warnings,
        loop_body=block.loop.body,
    )


@dataclass
class BlockAnalysis:
    block: PragmaBlock
    context: BlockContext
    loop: Optional[LoopDescriptor]
    classes: dict[str, VariableClass] = field(default_factory=dict)
    accesses: list[AccessPattern] = field(default_factory=list)
    live_after: dict[str, bool] = field(default_factory=dict)
    outcome: Union[TransformPlan, FallbackReason, None] = None

    @property
    def block_id(self) -> int:
        return self.block.block_id

    @property
    def plan(self) -> Optional[TransformPlan]:
        return self.outcome if isinstance(self.outcome, TransformPlan) else None

    @property
    def fallback(self) -> Optional[FallbackReason]:
        return self.outcome if isinstance(self.outcome, FallbackReason) else None


@dataclass
class ProgramAnalysis:
    program: Program
    blocks: list[BlockAnalysis]
    table: VarTable
    strict: bool = False
    schedule_override: Optional[str] = None

    def plans(self) -> list[TransformPlan]:
        return [b.plan for b in self.blocks if b.plan is not None]

    def fallbacks(self) -> list[tuple[PragmaBlock, FallbackReason]]:
        return [(b.block, b.fallback) for b in self.blocks if b.fallback is not None]

    def by_id(self, block_id: int) -> BlockAnalysis:
        return self.blocks[block_id]


def analyze_block(ctx: BlockContext, table: VarTable, strict=False, schedule_override=None) -> BlockAnalysis:
    block = ctx.block
    loop = canonicalize_loop(block.loop, ctx.scope)
    if isinstance(loop, FallbackReason):
        return BlockAnalysis(block, ctx, None, outcome=loop)
    scan = scan_block(block, loop, ctx.scope)
    classes = classify_scan(scan)
    accesses = access_patterns(scan)
    live = {
        n: live_after(ctx, dcl)
        for n, dcl in scan.outer.items()
        if dcl is not None and classes[n].tag in (OUT, INOUT, REDUCTION)
    }
    var_ids = {n: table.id_of(dcl) for n, dcl in scan.outer.items() if dcl is not None}
    outcome = check_transformability(
        block, classes, loop, accesses, scan=scan, strict=strict,
        schedule_override=schedule_override, enclosing_loop=ctx.enclosing_loop,
        var_ids=var_ids, global_names=ctx.global_names,
    )
    return BlockAnalysis(block, ctx, loop, classes, accesses, live, outcome)


def analyze_program(program: Program, strict: bool = False, schedule_override: Optional[str] = None) -> ProgramAnalysis:
    """Analyse every pragma-block; each yields exactly one plan or fallback."""
    contexts, table = build_contexts(program)
    blocks = [analyze_block(c, table, strict, schedule_override) for c in contexts]
    # A block nested inside another pragma-block is only reachable through
    # the outer loop's sequential execution, which is fine; the outer one has
    # already been rejected by the body scan.
    return ProgramAnalysis(program, blocks, table, strict, schedule_override)


def _find_context(block: PragmaBlock, program: Program) -> tuple[BlockContext, VarTable]:
    contexts, table = build_contexts(program)
    for c in contexts:
        if c.block is block:
            return c, table
    raise LookupError("pragma-block does not belong to the program")


def classify_variables(block: PragmaBlock, program: Program) -> dict[str, VariableClass]:
    """IN / OUT / INOUT / PRIVATE / REDUCTION class of each variable used in ``block``."""
    ctx, _ = _find_context(block, program)
    loop = canonicalize_loop(block.loop, ctx.scope)
    if isinstance(loop, FallbackReason):
        # Classification does not depend on the loop being canonical; a
        # minimal descriptor naming the iterator is enough.
        loop = _iterator_only(block)
    return classify_scan(scan_block(block, loop, ctx.scope))


def analyze_accesses(block: PragmaBlock, loop: LoopDescriptor, scope: Optional[dict] = None) -> list[AccessPattern]:
    return access_patterns(scan_block(block, loop, scope))


def _iterator_only(block: PragmaBlock) -> LoopDescriptor:
    from ..frontend.ast import IntLit

    name = loop_iterator_name(block.loop)
    if name is None:
        raise LookupError("cannot find the loop iterator")
    init = block.loop.init
    declared = isinstance(init, DeclStmt) and init.decls[0].name == name
    return LoopDescriptor(name, IntLit(0), IntLit(0), 1, "<", declared_in_init=declared)
