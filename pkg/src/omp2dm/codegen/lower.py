"""Lowering of analysed programs into master/worker message-passing code.

Rank 0 runs the original program; each transformed pragma-block becomes a
distribution loop that hands out chunks of the iteration space.  Every
other rank runs a service loop that waits for work, computes the chunk and
replies.  All generated names start with ``_omp2dm_``.

Per chunk the protocol is:

  master -> worker  WORK(block)        header (offset, count)
  master -> worker  DATA_IN(var) ...   IN scalars, then arrays, each in
                                       declaration order
  worker -> master  WORK(block)        header echo (offset, count)
  worker -> master  RESULT(var) ...    written arrays, declaration order
  worker -> master  REDUCE(var) ...    one partial per reduction variable

The header echo lets a dynamic master learn which chunk a reply belongs to
before it receives the rows.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

from ..analysis.loops import loop_iterator_name
from ..analysis.plan import ProgramAnalysis
from ..analysis.types import OUT, INOUT, IN, REDUCTION, FallbackReason, TransferRule, TransformPlan
from ..errors import PlanViolation, UnsupportedReductionOp
from ..frontend.ast import (
    Assign, Binary, Block, Call, DeclStmt, Expr, For, If, Index, IntLit, PragmaBlock,
    Program, Return, Stmt, StringLit, Unary, Var, VarDecl, While, CallStmt,
)
from ..frontend.pragma import format_directive
from .chunks import CHUNK_DIVISOR, ChunkAssignment, encode_tag
from .ir import (
    HELPER_PREFIX, MPI_TYPES, AnySource, AnyTag, Buf, Comment, CommRank, CommSize, MpiFinalize,
    MpiInit, MpiProgram, MpiRecv, MpiSend, OmpPragma, ProtocolFail, StatusDecl, StatusField, TagRef,
)

INT_HELPERS = ("rank", "size", "w", "src", "tag", "running", "released", "open")
LONG_HELPERS = (
    "trip", "chunk", "nw", "next", "active", "sent", "off", "cnt", "k",
    "init", "bound", "lo", "hi", "v0", "v1",
)
STATUS = HELPER_PREFIX + "status"
HDR = HELPER_PREFIX + "hdr"


# -- small builders ----------------------------------------------------------


def H(name: str) -> Var:
    return Var(HELPER_PREFIX + name)


def L(v: int) -> IntLit:
    return IntLit(v)


def B(op: str, left: Expr, right: Expr) -> Binary:
    return Binary(op, left, right)


def put(target, value: Expr, role: str = "", op: str = "=") -> Assign:
    if isinstance(target, str):
        target = H(target)
    return Assign(target, op, value, role=role)


def hdr(i: int) -> Index:
    return Index(HDR, [L(i)])


def _inc(name: str, role: str = "") -> Assign:
    return put(name, B("+", H(name), L(1)), role)


def _dec(name: str, role: str = "") -> Assign:
    return put(name, B("-", H(name), L(1)), role)


def _hdr_buf() -> Buf:
    return Buf(HDR, [L(0)])


REDUCTION_COMBINE = {"+": "+", "-": "+", "*": "*", "/": "*"}
WORKER_IDENTITY = {"+": 0, "-": 0, "*": 1, "/": 1}


class TagTable:
    """Assigns each (kind, id) its integer tag and a macro name for C."""

    def __init__(self, var_names: Optional[dict[int, str]] = None):
        self.var_names = var_names or {}
        counts: dict[str, int] = {}
        for n in self.var_names.values():
            counts[n] = counts.get(n, 0) + 1
        self._dup = {n for n, c in counts.items() if c > 1}
        self.macros: dict[str, int] = {}

    def ref(self, kind: str, ident: int = 0, role: str = "") -> TagRef:
        if kind == "TERMINATE_ALL":
            macro = "OMP2DM_TAG_TERMINATE_ALL"
        elif kind in ("WORK", "TERMINATE"):
            macro = f"OMP2DM_TAG_{kind}_B{ident}"
        else:
            name = self.var_names.get(ident, f"V{ident}")
            suffix = f"_{ident}" if name in self._dup else ""
            macro = f"OMP2DM_TAG_{kind}_{name}{suffix}"
        value = encode_tag(kind, ident)
        self.macros[macro] = value
        return TagRef(macro, value, role=role)


def _tags_for(plan: TransformPlan) -> TagTable:
    return TagTable({i: n for n, i in plan.var_ids.items()})


# -- loop bookkeeping --------------------------------------------------------


def trip_stmts(plan: TransformPlan, role_prefix: str = "") -> list[Stmt]:
    """Compute ``_omp2dm_init``, ``_omp2dm_bound`` and ``_omp2dm_trip`` at run time."""
    lp = plan.loop
    s = abs(lp.stride)
    init, bound = H("init"), H("bound")
    if lp.cmp in ("<", "<="):
        lo, hi = init, bound
    else:
        lo, hi = bound, init
    span = B("-", hi, lo)
    if lp.cmp in ("<", ">"):
        cond = B(">", hi, lo)
        value = B("/", B("+", span, L(s - 1)), L(s)) if s != 1 else span
    else:
        cond = B(">=", hi, lo)
        value = B("+", B("/", span, L(s)), L(1)) if s != 1 else B("+", span, L(1))
    return [
        put("init", copy.deepcopy(lp.initial), role_prefix + "init"),
        put("bound", copy.deepcopy(lp.bound), role_prefix + "bound"),
        put("trip", L(0), role_prefix + "trip_zero"),
        If(cond, put("trip", value, role_prefix + "trip")),
    ]


def chunk_stmts() -> list[Stmt]:
    per = B("*", H("nw"), L(CHUNK_DIVISOR))
    return [
        put("nw", B("-", H("size"), L(1)), "workers"),
        put("chunk", Call("max", [L(1), B("/", B("-", B("+", H("trip"), per), L(1)), copy.deepcopy(per))]),
            "chunk_size"),
    ]


# -- transfers ---------------------------------------------------------------


@dataclass
class TransferPair:
    """Matching send (one rank) and receive (other rank) code for one variable."""

    direction: str  # 'to_worker' or 'to_master'
    variable: str
    tag: TagRef
    send: list[Stmt]
    recv: list[Stmt]


def _row_stmts(plan: TransformPlan, rule: TransferRule, decl: VarDecl, off: Expr, cnt: Expr, side: str) -> list[Stmt]:
    """Set ``_omp2dm_lo``/``_omp2dm_hi`` to the rows a chunk touches."""
    stride = plan.loop.stride
    a, b = rule.a, rule.b

    def row(v):
        e = v if a == 1 else B("*", L(a), v)
        return e if b == 0 else B("+", e, L(b)) if b > 0 else B("-", e, L(-b))

    last = copy.deepcopy(decl.dims[0])
    return [
        put("v0", B("+", H("init"), B("*", copy.deepcopy(off), L(stride))), f"{side}_v0"),
        put("v1", B("+", H("init"), B("*", B("-", B("+", copy.deepcopy(off), copy.deepcopy(cnt)), L(1)), L(stride))),
            f"{side}_v1"),
        put("lo", Call("min", [row(H("v0")), row(H("v1"))]), f"{side}_row_lo"),
        put("hi", Call("max", [row(H("v0")), row(H("v1"))]), f"{side}_row_hi"),
        put("lo", Call("max", [H("lo"), L(0)]), f"{side}_clamp_lo"),
        put("hi", Call("min", [H("hi"), B("-", last, L(1))]), f"{side}_clamp_hi"),
    ]


def _elems_per_row(decl: VarDecl) -> Optional[Expr]:
    return copy.deepcopy(decl.dims[1]) if len(decl.dims) == 2 else None


def _slice_buf(decl: VarDecl) -> Buf:
    idx = [H("lo")] + ([L(0)] if len(decl.dims) == 2 else [])
    return Buf(decl.name, idx)


def _slice_count(decl: VarDecl) -> Expr:
    rows = B("+", B("-", H("hi"), H("lo")), L(1))
    per = _elems_per_row(decl)
    return rows if per is None else B("*", rows, per)


def _whole_buf(decl: VarDecl) -> Buf:
    return Buf(decl.name, [L(0) for _ in decl.dims])


def _whole_count(decl: VarDecl) -> Expr:
    count: Expr = copy.deepcopy(decl.dims[0])
    for d in decl.dims[1:]:
        count = B("*", count, copy.deepcopy(d))
    return count


def _array_pair(plan, name, rule, decl, tag, direction, peer_send, peer_recv, roles, guard=None) -> TransferPair:
    dtype = MPI_TYPES[decl.base]
    off, cnt = H("off"), H("cnt")
    send_role, recv_role = roles
    if rule.kind == "slice_rows":
        def side(peer, role, cls, prefix):
            op = cls(_slice_buf(decl), _slice_count(decl), dtype, peer, copy.deepcopy(tag), role=role)
            return _row_stmts(plan, rule, decl, off, cnt, prefix) + [If(B(">=", H("hi"), H("lo")), op)]

        send = side(peer_send, send_role, MpiSend, send_role)
        recv = side(peer_recv, recv_role, MpiRecv, recv_role)
    else:
        send = [MpiSend(_whole_buf(decl), _whole_count(decl), dtype, peer_send, copy.deepcopy(tag), role=send_role)]
        recv = [MpiRecv(_whole_buf(decl), _whole_count(decl), dtype, peer_recv, copy.deepcopy(tag), role=recv_role)]
    if guard is not None:
        send = [If(copy.deepcopy(guard), Block(send), role=send_role + "_guard")]
        recv = [If(copy.deepcopy(guard), Block(recv), role=recv_role + "_guard")]
    return TransferPair(direction, name, tag, send, recv)


def _check_classes(plan: TransformPlan):
    for name in list(plan.inputs) + list(plan.transfers):
        if name not in plan.classes:
            raise PlanViolation(f"transfer of {name} which has no class in block {plan.block_id}")
        if name not in plan.decls:
            raise PlanViolation(f"transfer of {name} which has no declaration in block {plan.block_id}")
    for name, rule in plan.transfers.items():
        if plan.classes[name].tag not in (OUT, INOUT):
            raise PlanViolation(f"{name} returns results but is classed {plan.classes[name]}")
        if rule.kind not in ("slice_rows", "full_array_last_worker"):
            raise PlanViolation(f"unknown write transfer {rule.kind} for {name}")
    for name in plan.inputs:
        if plan.classes[name].tag != IN:
            raise PlanViolation(f"{name} is sent as input but is classed {plan.classes[name]}")
    for r in plan.reductions:
        if plan.classes.get(r.variable, None) is None or plan.classes[r.variable].tag != REDUCTION:
            raise PlanViolation(f"reduction variable {r.variable} lacks a REDUCTION class")


def data_in_order(plan: TransformPlan) -> tuple[list[str], list[str]]:
    """Variables shipped with each chunk: scalars first, then arrays, each by id."""
    names = plan.data_in_order()
    scalars = [n for n in names if not plan.decls[n].is_array]
    arrays = [n for n in names if plan.decls[n].is_array]
    return scalars, arrays


def _in_rule(plan: TransformPlan, name: str) -> TransferRule:
    if name in plan.transfers:
        rule = plan.transfers[name]
        return rule if rule.kind == "slice_rows" else TransferRule("whole")
    return plan.inputs[name]


def _last_chunk_guard() -> Expr:
    return B("==", B("+", H("off"), H("cnt")), H("trip"))


def transfer_pairs(plan: TransformPlan, tags: TagTable, master_peer: Expr, worker_peer: Optional[Expr] = None):
    """All per-chunk transfers of a block as matched send/receive code.

    ``master_peer`` is the worker rank expression used on the master side;
    workers always talk to rank 0.
    """
    _check_classes(plan)
    worker_peer = worker_peer or L(0)
    scalars, arrays = data_in_order(plan)
    pairs: list[TransferPair] = []
    for name in scalars:
        decl = plan.decls[name]
        tag = tags.ref("DATA_IN", plan.var_ids[name])
        pairs.append(TransferPair(
            "to_worker", name, tag,
            [MpiSend(Buf(name), L(1), MPI_TYPES[decl.base], copy.deepcopy(master_peer), copy.deepcopy(tag),
                     role="send_data_in")],
            [MpiRecv(Buf(name), L(1), MPI_TYPES[decl.base], copy.deepcopy(worker_peer), copy.deepcopy(tag),
                     role="w_recv_data_in")],
        ))
    for name in arrays:
        decl = plan.decls[name]
        tag = tags.ref("DATA_IN", plan.var_ids[name])
        pairs.append(_array_pair(plan, name, _in_rule(plan, name), decl, tag, "to_worker",
                                 copy.deepcopy(master_peer), copy.deepcopy(worker_peer),
                                 ("send_data_in", "w_recv_data_in")))
    for name in sorted(plan.transfers, key=lambda n: plan.var_ids[n]):
        rule = plan.transfers[name]
        decl = plan.decls[name]
        tag = tags.ref("RESULT", plan.var_ids[name])
        guard = _last_chunk_guard() if rule.kind == "full_array_last_worker" else None
        pairs.append(_array_pair(plan, name, rule, decl, tag, "to_master",
                                 copy.deepcopy(worker_peer), copy.deepcopy(master_peer),
                                 ("w_send_result", "recv_result"), guard))
    for r in plan.reductions:
        decl = plan.decls.get(r.variable)
        base = decl.base if decl is not None else r.base
        tag = tags.ref("REDUCE", plan.var_ids[r.variable])
        part = HELPER_PREFIX + "part_" + r.variable
        pairs.append(TransferPair(
            "to_master", r.variable, tag,
            [MpiSend(Buf(part), L(1), MPI_TYPES[base], copy.deepcopy(worker_peer), copy.deepcopy(tag),
                     role="w_send_reduce")],
            [MpiRecv(Buf(part), L(1), MPI_TYPES[base], copy.deepcopy(master_peer), copy.deepcopy(tag),
                     role="recv_reduce"),
             put(Var(HELPER_PREFIX + "acc_" + r.variable),
                 B(REDUCTION_COMBINE[r.op], Var(HELPER_PREFIX + "acc_" + r.variable), Var(part)),
                 "acc_combine")],
        ))
    return pairs


def emit_transfers(plan: TransformPlan, chunk: ChunkAssignment, tags: Optional[TagTable] = None) -> list[TransferPair]:
    """Transfers for one concrete chunk: offsets and counts become constants."""
    tags = tags or _tags_for(plan)
    dest = L(chunk.worker if chunk.worker is not None else 1)
    pairs = transfer_pairs(plan, tags, dest)
    prelude = [put("off", L(chunk.offset)), put("cnt", L(chunk.count))]
    for p in pairs:
        p.send = copy.deepcopy(prelude) + p.send
        p.recv = copy.deepcopy(prelude) + p.recv
    return pairs


# -- master side -------------------------------------------------------------


def _dispatch(plan: TransformPlan, tags: TagTable, dest: Expr, role: str) -> list[Stmt]:
    """Send the next chunk (starting at ``_omp2dm_next``) to ``dest``."""
    out: list[Stmt] = [
        put("off", H("next"), "take_offset"),
        put("cnt", Call("min", [H("chunk"), B("-", H("trip"), H("next"))]), "take_count"),
        put(hdr(0), H("off"), "work_hdr_offset"),
        put(hdr(1), H("cnt"), "work_hdr_count"),
        MpiSend(_hdr_buf(), L(2), "MPI_LONG", copy.deepcopy(dest), tags.ref("WORK", plan.block_id), role=role),
    ]
    for p in transfer_pairs(plan, tags, dest):
        if p.direction == "to_worker":
            out += p.send
    out.append(put("next", B("+", H("next"), H("cnt")), "next_advance"))
    return out


def _collect(plan: TransformPlan, tags: TagTable, source: Expr, dynamic: bool) -> list[Stmt]:
    """Receive one chunk's reply: header, result rows, reduction partials."""
    out: list[Stmt] = [
        MpiRecv(_hdr_buf(), L(2), "MPI_LONG", source, tags.ref("WORK", plan.block_id), role="recv_header"),
    ]
    if dynamic:
        out.append(put("src", StatusField("MPI_SOURCE"), "src"))
    out += [put("off", hdr(0), "reply_offset"), put("cnt", hdr(1), "reply_count")]
    peer = H("src") if dynamic else H("w")
    for p in transfer_pairs(plan, tags, peer):
        if p.direction == "to_master":
            out += p.recv
    return out


def _terminate(plan: TransformPlan, tags: TagTable, dest: Expr, role="send_terminate") -> MpiSend:
    return MpiSend(_hdr_buf(), L(0), "MPI_LONG", dest, tags.ref("TERMINATE", plan.block_id), role=role)


def _acc_decls(plan: TransformPlan) -> list[Stmt]:
    out = []
    for r in plan.reductions:
        if r.op not in REDUCTION_COMBINE:
            raise UnsupportedReductionOp(f"reduction operator {r.op!r} is not supported")
        base = plan.decls[r.variable].base if r.variable in plan.decls else r.base
        out.append(DeclStmt([
            VarDecl(HELPER_PREFIX + "acc_" + r.variable, base),
            VarDecl(HELPER_PREFIX + "part_" + r.variable, base),
        ]))
    return out


def emit_reduction_combine(plan: TransformPlan) -> dict[str, list[Stmt]]:
    """Accumulator setup, per-partial combine and final fold for the master.

    Returns the pieces keyed by 'init', 'combine' and 'fold'.
    """
    if not plan.reductions:
        return {"init": [], "combine": [], "fold": []}
    init, combine, fold = [], [], []
    for r in plan.reductions:
        if r.op not in REDUCTION_COMBINE:
            raise UnsupportedReductionOp(f"reduction operator {r.op!r} is not supported")
        acc = Var(HELPER_PREFIX + "acc_" + r.variable)
        part = Var(HELPER_PREFIX + "part_" + r.variable)
        init.append(put(acc, L(r.initial), "acc_init"))
        combine.append(put(copy.deepcopy(acc), B(REDUCTION_COMBINE[r.op], copy.deepcopy(acc), part), "acc_combine"))
        fold.append(put(Var(r.variable), B(r.op, Var(r.variable), copy.deepcopy(acc)), "reduce_fold"))
    return {"init": init, "combine": combine, "fold": fold}


def _master_frame(plan: TransformPlan, body: list[Stmt]) -> list[Stmt]:
    red = emit_reduction_combine(plan)
    head = [Comment(f"block {plan.block_id}: {plan.schedule} schedule over {plan.loop.iterator}")]
    head += _acc_decls(plan)
    head += trip_stmts(plan)
    inner = chunk_stmts() + red["init"] + body + red["fold"]
    return head + [If(B(">", H("trip"), L(0)), Block(inner), role="trip_guard")]


def emit_master_static(plan: TransformPlan, tags: Optional[TagTable] = None) -> list[Stmt]:
    """Round-robin rounds: one chunk per worker in rank order, then collect
    replies from each rank in the same order."""
    tags = tags or _tags_for(plan)
    send_round = For(
        put("w", L(1)),
        B("&&", B("<", H("w"), H("size")), B("<", H("next"), H("trip"))),
        _inc("w"),
        Block(_dispatch(plan, tags, H("w"), "send_work") + [_inc("sent")]),
        role="static_send_round",
    )
    recv_round = For(
        put("w", L(1)),
        B("<=", H("w"), H("sent")),
        _inc("w"),
        Block(_collect(plan, tags, H("w"), dynamic=False)),
        role="static_recv_round",
    )
    body = [
        put("next", L(0), "next_init"),
        While(B("<", H("next"), H("trip")), Block([put("sent", L(0)), send_round, recv_round])),
        For(put("w", L(1)), B("<", H("w"), H("size")), _inc("w"), _terminate(plan, tags, H("w")),
            role="terminate_loop"),
    ]
    return _master_frame(plan, body)


def emit_master_dynamic(plan: TransformPlan, tags: Optional[TagTable] = None) -> list[Stmt]:
    """Seed each worker with one chunk, then answer whichever worker replies."""
    tags = tags or _tags_for(plan)
    seed = For(
        put("w", L(1)),
        B("<", H("w"), H("size")),
        _inc("w"),
        Block([If(
            B("<", H("next"), H("trip")),
            Block(_dispatch(plan, tags, H("w"), "send_work") + [_inc("active")]),
            _terminate(plan, tags, H("w"), "send_terminate_seed"),
        )]),
        role="seed_loop",
    )
    serve = While(
        B(">", H("active"), L(0)),
        Block(
            _collect(plan, tags, AnySource(), dynamic=True)
            + [_dec("active", "active_done")]
            + [If(
                B("<", H("next"), H("trip")),
                Block(_dispatch(plan, tags, H("src"), "send_work_next") + [_inc("active")]),
                _terminate(plan, tags, H("src")),
            )]
        ),
        role="serve_loop",
    )
    body = [put("next", L(0), "next_init"), put("active", L(0)), seed, serve]
    return _master_frame(plan, body)


# -- worker side -------------------------------------------------------------


def _rewrite_reduction(s: Assign, var: str, op: str) -> Assign:
    """Turn an update of the reduction variable into an update of the partial.

    For '+' and '*' the partial takes the update verbatim.  For '-' the
    partial sums the subtracted quantities and for '/' it multiplies the
    divisors; the master then applies the original operator once.
    """
    part = Var(HELPER_PREFIX + "part_" + var)
    flip = op in ("-", "/")
    if s.op in ("++", "--"):
        up = s.op == "++"
        if flip:
            up = not up
        return Assign(part, "+=" if up else "-=", L(1), span=s.span, role="w_partial_update")
    if s.op != "=":
        sym = s.op[0]
        operand = s.value
    else:
        v = s.value
        if isinstance(v.left, Var) and v.left.name == var:
            sym, operand = v.op, v.right
        else:
            sym, operand = v.op, v.left
    if flip:
        sym = {"-": "+", "+": "-", "/": "*", "*": "/"}[sym]
    return Assign(part, sym + "=", copy.deepcopy(operand), span=s.span, role="w_partial_update")


def _rewrite_body(stmt: Stmt, reductions: dict[str, str]) -> Stmt:
    stmt = copy.deepcopy(stmt)

    def visit(s):
        if isinstance(s, Assign):
            if isinstance(s.target, Var) and s.target.name in reductions:
                return _rewrite_reduction(s, s.target.name, reductions[s.target.name])
            return s
        if isinstance(s, Block):
            s.stmts = [visit(c) for c in s.stmts]
        elif isinstance(s, If):
            s.then = visit(s.then)
            if s.orelse is not None:
                s.orelse = visit(s.orelse)
        elif isinstance(s, (For, While)):
            s.body = visit(s.body)
        return s

    return visit(stmt)


def _shadow(decl: VarDecl) -> VarDecl:
    return VarDecl(decl.name, decl.base, [copy.deepcopy(d) for d in decl.dims])


def worker_handler(plan: TransformPlan, tags: TagTable, global_decls: set[int]) -> list[Stmt]:
    lp = plan.loop
    out: list[Stmt] = [Comment(f"block {plan.block_id}: compute one chunk of {lp.iterator}")]
    shadows = [_shadow(d) for n, d in plan.decls.items() if id(d) not in global_decls]
    if lp.declared_in_init:
        shadows.append(VarDecl(lp.iterator, lp.iterator_base))
    for d in shadows:
        out.append(DeclStmt([d], role="w_shadow"))
    for r in plan.reductions:
        base = plan.decls[r.variable].base if r.variable in plan.decls else r.base
        out.append(DeclStmt([VarDecl(HELPER_PREFIX + "part_" + r.variable, base, init=L(WORKER_IDENTITY[r.op]))],
                            role="w_partial_init"))
    out += [put("off", hdr(0), "w_off"), put("cnt", hdr(1), "w_cnt")]
    pairs = transfer_pairs(plan, tags, L(0))
    to_worker = [p for p in pairs if p.direction == "to_worker"]
    to_master = [p for p in pairs if p.direction == "to_master"]
    for p in to_worker:
        if not plan.decls[p.variable].is_array:
            out += p.recv
    needs_trip = any(r.kind == "full_array_last_worker" for r in plan.transfers.values())
    if needs_trip:
        out += trip_stmts(plan, "w_")
    else:
        out.append(put("init", copy.deepcopy(lp.initial), "w_init"))
    for p in to_worker:
        if plan.decls[p.variable].is_array:
            out += p.recv
    iterate = put(Var(lp.iterator), B("+", H("init"), B("*", B("+", H("off"), H("k")), L(lp.stride))), "w_iter")
    reductions = {r.variable: r.op for r in plan.reductions}
    body = _rewrite_body(plan.loop_body, reductions)
    body_stmts = body.stmts if isinstance(body, Block) else [body]
    out.append(For(put("k", L(0)), B("<", H("k"), H("cnt")), _inc("k"), Block([iterate] + body_stmts), role="w_loop"))
    out += [
        put(hdr(0), H("off"), "w_hdr_offset"),
        put(hdr(1), H("cnt"), "w_hdr_count"),
        MpiSend(_hdr_buf(), L(2), "MPI_LONG", L(0), tags.ref("WORK", plan.block_id), role="w_send_header"),
    ]
    for p in to_master:
        out += p.send
    return out


def _protocol_fail() -> Block:
    return Block([ProtocolFail(H("tag"))])


def _open_check(expected: int) -> If:
    bad = B("&&", B("!=", H("open"), L(0)), B("!=", H("open"), L(expected)))
    return If(bad, _protocol_fail(), role="open_check")


def emit_worker_service(plans: list[TransformPlan], tags: Optional[TagTable] = None,
                        global_decls: Optional[set[int]] = None) -> list[Stmt]:
    """The loop every worker rank runs until TERMINATE_ALL arrives."""
    if not plans:
        return [MpiFinalize(role="w_finalize"), Return(L(0))]
    tags = tags or TagTable({i: n for p in plans for n, i in p.var_ids.items()})
    global_decls = global_decls or set()
    term_all = tags.ref("TERMINATE_ALL")
    chain: Stmt = _protocol_fail()
    for plan in reversed(plans):
        b = plan.block_id
        on_term = If(B("==", H("tag"), tags.ref("TERMINATE", b)),
                     Block([_open_check(b + 1), put("open", L(0), "w_close")]), chain)
        on_work = If(B("==", H("tag"), tags.ref("WORK", b)),
                     Block([_open_check(b + 1), put("open", L(b + 1), "w_mark_open"),
                            Block(worker_handler(plan, tags, global_decls))]),
                     on_term)
        chain = on_work
    on_all = If(B("==", H("tag"), term_all),
                Block([If(B("!=", H("open"), L(0)), _protocol_fail(), role="open_check_all"),
                       put("running", L(0), "w_stop")]),
                chain)
    loop = While(H("running"), Block([
        MpiRecv(_hdr_buf(), L(2), "MPI_LONG", L(0), AnyTag(), role="w_recv"),
        put("tag", StatusField("MPI_TAG"), "w_tag"),
        on_all,
    ]), role="service_loop")
    return [put("running", L(1)), put("open", L(0)), loop, MpiFinalize(role="w_finalize"), Return(L(0))]


# -- whole program -----------------------------------------------------------


def release_stmts(tags: TagTable) -> list[Stmt]:
    """Send TERMINATE_ALL to every worker exactly once."""
    loop = For(put("w", L(1)), B("<", H("w"), H("size")), _inc("w"),
               MpiSend(_hdr_buf(), L(0), "MPI_LONG", H("w"), tags.ref("TERMINATE_ALL"), role="send_terminate_all"),
               role="release_loop")
    return [If(Unary("!", H("released")), Block([loop, put("released", L(1), "released_set")]), role="release")]


def emit_epilogue(program: Program, plans: list[TransformPlan], tags: Optional[TagTable] = None) -> list[Stmt]:
    """Finalisation at the end of main for rank 0."""
    main = program.main.body.stmts
    if main and isinstance(main[-1], Return):
        return []
    out: list[Stmt] = []
    if plans:
        out += release_stmts(tags or TagTable())
    out.append(MpiFinalize(role="m_finalize"))
    return out


def _contains_plan(stmt, planned: set[int]) -> bool:
    from ..frontend.ast import walk

    return any(isinstance(n, PragmaBlock) and n.block_id in planned for n in walk(stmt))


def _private_shadows(block: PragmaBlock, scope: dict) -> list[Stmt]:
    names = []
    it = loop_iterator_name(block.loop)
    init = block.loop.init
    if it is not None and not (isinstance(init, DeclStmt) and init.decls[0].name == it):
        names.append(it)
    names += [n for n in block.directive.private if n not in names]
    out = []
    for n in names:
        if n in scope:
            out.append(DeclStmt([_shadow(scope[n])], role="privatize"))
    return out


class _Lowerer:
    def __init__(self, analysis: ProgramAnalysis, fallback_mode: str):
        if fallback_mode not in ("seq", "keep-omp"):
            raise ValueError(f"fallback mode must be 'seq' or 'keep-omp', not {fallback_mode!r}")
        self.analysis = analysis
        self.program = analysis.program
        self.fallback_mode = fallback_mode
        table = analysis.table
        self.tags = TagTable({i: d.name for i, d in enumerate(table.decls)})
        self.by_id = {b.block_id: b for b in analysis.blocks}
        self.plans = {b.block_id: b.plan for b in analysis.blocks if b.plan is not None}

    def master_block(self, block: PragmaBlock) -> Stmt:
        info = self.by_id[block.block_id]
        if info.plan is not None:
            plan = info.plan
            emit = emit_master_static if plan.schedule == "static" else emit_master_dynamic
            return Block(emit(plan, self.tags), role=f"master_block_{plan.block_id}")
        return self.fallback_block(block, info.fallback, info.context.scope)

    def fallback_block(self, block: PragmaBlock, reason: FallbackReason, scope) -> Stmt:
        loop = copy.deepcopy(block.loop)
        loop.body = self.rewrite(loop.body)
        nested = _contains_plan(block.loop.body, set(self.plans))
        out: list[Stmt] = [Comment(f"block {block.block_id} not transformed: {reason}")]
        out += _private_shadows(block, scope)
        if self.fallback_mode == "keep-omp" and not nested:
            out.append(OmpPragma(format_directive(block.directive)))
        out.append(loop)
        return Block(out, role=f"fallback_block_{block.block_id}")

    def rewrite(self, s: Stmt) -> Stmt:
        if isinstance(s, PragmaBlock):
            return self.master_block(s)
        if isinstance(s, Return):
            return Block(self.return_prelude() + [copy.deepcopy(s)], role="master_return")
        if isinstance(s, Block):
            return Block([self.rewrite(c) for c in s.stmts], span=s.span)
        if isinstance(s, If):
            return If(copy.deepcopy(s.cond), self.rewrite(s.then),
                      self.rewrite(s.orelse) if s.orelse is not None else None, span=s.span)
        if isinstance(s, For):
            return For(copy.deepcopy(s.init), copy.deepcopy(s.cond), copy.deepcopy(s.step),
                       self.rewrite(s.body), span=s.span)
        if isinstance(s, While):
            return While(copy.deepcopy(s.cond), self.rewrite(s.body), span=s.span)
        return copy.deepcopy(s)

    def return_prelude(self) -> list[Stmt]:
        pre = release_stmts(self.tags) if self.plans else []
        return pre + [MpiFinalize(role="m_finalize")]

    def master_code(self) -> list[Stmt]:
        stmts = self.program.main.body.stmts
        out: list[Stmt] = []
        last = max((i for i, s in enumerate(stmts) if _contains_plan(s, set(self.plans))), default=None)
        for i, s in enumerate(stmts):
            out.append(self.rewrite(s))
            if i == last:
                out += release_stmts(self.tags)
        return out

    def helpers(self) -> list[Stmt]:
        return [
            DeclStmt([VarDecl(HELPER_PREFIX + n, "int") for n in INT_HELPERS]),
            DeclStmt([VarDecl(HDR, "long", [L(2)])] + [VarDecl(HELPER_PREFIX + n, "long") for n in LONG_HELPERS]),
            StatusDecl(STATUS),
        ]

    def setup(self) -> list[Stmt]:
        need_two = If(
            B("<", H("size"), L(2)),
            Block([
                CallStmt("printf", [StringLit("omp2dm: at least 2 processes are required\\n")]),
                MpiFinalize(),
                Return(L(1)),
            ]),
            role="size_check",
        )
        return [
            MpiInit(), CommRank(HELPER_PREFIX + "rank"), CommSize(HELPER_PREFIX + "size"),
            put("released", L(0)), need_two,
        ]

    def lower(self) -> MpiProgram:
        program = self.program
        plans = [self.plans[k] for k in sorted(self.plans)]
        global_ids = {id(g) for g in program.globals}
        worker = emit_worker_service(plans, self.tags, global_ids)
        master = self.master_code()
        epilogue = emit_epilogue(program, plans, self.tags)
        capture = [g.name for g in program.globals] + [
            d.name for s in program.main.body.stmts if isinstance(s, DeclStmt) for d in s.decls
        ]
        return MpiProgram(
            defines=dict(program.defines),
            globals=copy.deepcopy(program.globals),
            helpers=self.helpers(),
            setup=self.setup(),
            worker_service=worker,
            master_code=master,
            epilogue=epilogue,
            tags=dict(sorted(self.tags.macros.items(), key=lambda kv: kv[1])),
            capture=capture,
            plans=dict(self.plans),
            fallbacks={b.block_id: b.fallback for b in self.analysis.blocks if b.fallback is not None},
            fallback_mode=self.fallback_mode,
            file=str(program.file),
            source=program,
        )


def lower_program(analysis: ProgramAnalysis, fallback_mode: str = "seq") -> MpiProgram:
    """Build the master/worker program for an analysed source program."""
    return _Lowerer(analysis, fallback_mode).lower()
