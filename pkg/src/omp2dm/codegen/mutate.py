"""Seeded faults for mutation testing of the code generator.

Each mutation copies a lowered program and breaks one protocol or
arithmetic detail, found through the ``role`` labels the lowering attaches.
A sound verification harness must notice every one of them, either as a
state mismatch or as a protocol failure (deadlock, leftover messages,
protocol error).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable

from ..frontend.ast import Binary, Block, Empty, For, If, IntLit, Node, Var, While, walk
from .chunks import encode_tag
from .ir import MpiProgram, MpiSend, TagRef

_SECTIONS = ("helpers", "setup", "worker_service", "master_code", "epilogue")


def _nodes(prog: MpiProgram, role: str):
    for sec in _SECTIONS:
        for s in getattr(prog, sec):
            for n in walk(s):
                if isinstance(n, Node) and n.role == role:
                    yield n


def _bump(role: str, delta: int):
    def apply(prog):
        hit = False
        for n in _nodes(prog, role):
            n.value = Binary("+", n.value, IntLit(delta))
            hit = True
        return hit
    return apply


def _remove(role: str):
    def strip(s):
        if isinstance(s, Node) and s.role == role:
            return Empty(), True
        hit = False
        if isinstance(s, Block):
            kept = []
            for c in s.stmts:
                c2, h = strip(c)
                hit |= h
                if not isinstance(c2, Empty) or not h:
                    kept.append(c2)
            s.stmts = kept
        elif isinstance(s, If):
            s.then, h1 = strip(s.then)
            h2 = False
            if s.orelse is not None:
                s.orelse, h2 = strip(s.orelse)
            hit = h1 or h2
        elif isinstance(s, (For, While)):
            s.body, hit = strip(s.body)
        return s, hit

    def apply(prog):
        hit = False
        for sec in _SECTIONS:
            out = []
            for s in getattr(prog, sec):
                s2, h = strip(s)
                hit |= h
                out.append(s2)
            setattr(prog, sec, out)
        return hit
    return apply


def _retag(role: str, kind: str):
    def apply(prog):
        hit = False
        for n in _nodes(prog, role):
            if isinstance(n.tag, TagRef):
                ident = (n.tag.value // 6) if n.tag.value else 0
                n.tag = TagRef(f"OMP2DM_TAG_{kind}_MUT", encode_tag(kind, ident))
                hit = True
        return hit
    return apply


def _set_peer(role: str, value: int, attr: str):
    def apply(prog):
        hit = False
        for n in _nodes(prog, role):
            setattr(n, attr, IntLit(value))
            hit = True
        return hit
    return apply


def _loop_le(prog):
    hit = False
    for n in _nodes(prog, "w_loop"):
        n.cond = Binary("<=", n.cond.left, n.cond.right)
        hit = True
    return hit


def _flip_combine(prog):
    hit = False
    for n in _nodes(prog, "acc_combine"):
        n.value = Binary({"+": "-", "*": "/"}[n.value.op], n.value.left, n.value.right)
        hit = True
    return hit


def _fold_to_assign(prog):
    hit = False
    for n in _nodes(prog, "reduce_fold"):
        n.value = n.value.right
        hit = True
    return hit


def _partial_init(prog):
    hit = False
    for n in _nodes(prog, "w_partial_init"):
        d = n.decls[0]
        d.init = Binary("+", d.init, IntLit(1))
        hit = True
    return hit


def _drop_first_data_in(prog):
    for sec in ("master_code",):
        for s in getattr(prog, sec):
            for n in walk(s):
                if isinstance(n, Block):
                    for k, c in enumerate(n.stmts):
                        if isinstance(c, MpiSend) and c.role == "send_data_in":
                            del n.stmts[k]
                            return True
                        if isinstance(c, If) and isinstance(c.then, MpiSend) and c.then.role == "send_data_in":
                            del n.stmts[k]
                            return True
    return False


def _static_recv_rank1(prog):
    hit = False
    for n in _nodes(prog, "recv_header"):
        if isinstance(n.source, Var):
            n.source = IntLit(1)
            hit = True
    return hit


def _terminate_short(prog):
    hit = False
    for n in _nodes(prog, "terminate_loop"):
        n.cond = Binary("<", n.cond.left, Binary("-", n.cond.right, IntLit(1)))
        hit = True
    return hit


@dataclass(frozen=True)
class Mutation:
    name: str
    description: str
    apply: Callable[[MpiProgram], bool]

    def __call__(self, prog: MpiProgram) -> MpiProgram:
        """A mutated copy of ``prog``; raises LookupError if nothing matched."""
        out = copy.deepcopy(prog)
        if hasattr(out, "_compiled"):
            del out._compiled
        if not self.apply(out):
            raise LookupError(f"mutation {self.name} does not apply to this program")
        return out


MUTATIONS = [
    Mutation("work_offset_plus1", "WORK header offset off by one", _bump("work_hdr_offset", 1)),
    Mutation("work_count_minus1", "WORK header count one short", _bump("work_hdr_count", -1)),
    Mutation("next_advance_plus1", "master skips an iteration after each chunk", _bump("next_advance", 1)),
    Mutation("worker_iter_plus1", "worker computes the iterator one stride late", _bump("w_iter", 1)),
    Mutation("worker_loop_inclusive", "worker chunk loop runs count+1 iterations", _loop_le),
    Mutation("result_row_lo_plus1", "worker returns result rows from one row too late",
             _bump("w_send_result_row_lo", 1)),
    Mutation("master_result_row_plus1", "master stores result rows one row too late",
             _bump("recv_result_row_lo", 1)),
    Mutation("data_in_rows_shifted", "master ships input rows one row too late",
             _bump("send_data_in_row_lo", 1)),
    Mutation("work_sent_as_terminate", "WORK header carries the TERMINATE tag", _retag("send_work", "TERMINATE")),
    Mutation("result_wrong_tag", "worker sends results under a DATA_IN tag", _retag("w_send_result", "DATA_IN")),
    Mutation("drop_terminate_all", "epilogue never releases the workers", _remove("send_terminate_all")),
    Mutation("drop_terminate_block", "final TERMINATE of a block is not sent", _remove("send_terminate")),
    Mutation("acc_init_wrong", "reduction accumulator starts one above the identity", _bump("acc_init", 1)),
    Mutation("combine_op_wrong", "master combines partials with the inverse operator", _flip_combine),
    Mutation("fold_overwrites", "master overwrites the reduction variable instead of folding", _fold_to_assign),
    Mutation("partial_init_wrong", "worker partial starts one above the identity", _partial_init),
    Mutation("drop_data_in", "first DATA_IN send is dropped", _drop_first_data_in),
    Mutation("static_recv_wrong_rank", "static master collects every reply from rank 1", _static_recv_rank1),
    Mutation("dynamic_next_to_rank1", "dynamic master sends follow-up WORK to rank 1",
             _set_peer("send_work_next", 1, "dest")),
    Mutation("worker_hdr_offset_plus1", "worker echoes a wrong chunk offset", _bump("w_hdr_offset", 1)),
]

ALTERNATES = [
    Mutation("trip_plus1", "master computes one iteration too many", _bump("trip", 1)),
    Mutation("terminate_loop_short", "static master skips TERMINATE for the last worker", _terminate_short),
]


def mutation_by_name(name: str) -> Mutation:
    for m in MUTATIONS + ALTERNATES:
        if m.name == name:
            return m
    raise KeyError(name)
