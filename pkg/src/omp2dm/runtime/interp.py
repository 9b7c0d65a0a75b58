"""Sequential interpreter for source programs: the semantic oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ExecError
from ..frontend.ast import Program, VarDecl
from .compile import CompiledProgram, compile_main
from .values import as_array

DEFAULT_BUDGET = 50_000_000


class Runtime:
    """What compiled code sees of its environment."""

    def __init__(self, budget: int = DEFAULT_BUDGET, mpi=None, trace: bool = False):
        self.budget = budget
        self.mpi = mpi
        self.printed: list[tuple[str, tuple]] = []
        self.events: Optional[list] = [] if trace else None

    def printf(self, fmt: str, values: tuple):
        self.printed.append((fmt, tuple(values)))


@dataclass
class BlockAccess:
    """Storage touched by one execution of a pragma-block.

    Names are the compiled storage names, so a private copy and the outer
    variable it shadows are distinct; ``decls`` maps them back.
    """

    block_id: int
    instance: int
    reads: set[str] = field(default_factory=set)
    writes: set[str] = field(default_factory=set)
    read_after: set[str] = field(default_factory=set)  # written here, next touched by a read


@dataclass
class AccessTrace:
    blocks: list[BlockAccess]
    decls: dict[str, VarDecl]

    def for_block(self, block_id: int) -> list[BlockAccess]:
        return [b for b in self.blocks if b.block_id == block_id]


def build_access_trace(events: list, compiled: CompiledProgram) -> AccessTrace:
    blocks: list[BlockAccess] = []
    exits: dict[int, BlockAccess] = {}
    open_: list[BlockAccess] = []
    counts: dict[int, int] = {}
    for pos, ev in enumerate(events):
        a, b = ev
        if a == "enter":
            counts[b] = counts.get(b, 0) + 1
            acc = BlockAccess(b, counts[b] - 1)
            open_.append(acc)
            blocks.append(acc)
        elif a == "exit":
            exits[pos] = open_.pop()
        else:
            for acc in open_:
                acc.reads.update(a)
                acc.writes.update(b)
    # Walk backwards remembering whether each name is next read or written.
    nxt: dict[str, str] = {}
    for pos in range(len(events) - 1, -1, -1):
        a, b = events[pos]
        if a == "exit":
            acc = exits[pos]
            acc.read_after = {n for n in acc.writes if nxt.get(n) == "r"}
        elif a != "enter":
            for n in b:
                nxt[n] = "w"
            for n in a:
                nxt[n] = "r"
    return AccessTrace(blocks, {p: s.decl for p, s in compiled.slots.items()})


@dataclass
class ExecResult:
    state: dict  # name -> int | float | ndarray
    printed: list[tuple[str, tuple]]
    ops: int
    trace: Optional[AccessTrace] = None


def export_state(compiled: CompiledProgram, raw: dict) -> dict:
    out = {}
    for name, value in raw.items():
        slot = compiled.state_slots[name]
        out[name] = as_array(slot.decl.base, slot.shape, value) if slot.shape else value
    return out


def check_inputs(program_globals: list[VarDecl], inputs: dict):
    known = {g.name: g for g in program_globals}
    for name, value in inputs.items():
        if name not in known:
            raise ValueError(f"input '{name}' is not a global variable")
        shape = np.shape(value)
        if shape != known[name].shape:
            raise ValueError(f"input '{name}' has shape {shape}, declared {known[name].shape}")


def run_compiled(compiled: CompiledProgram, rt: Runtime, inputs: dict):
    try:
        return compiled.fn(rt, inputs)
    except ZeroDivisionError as exc:
        raise ExecError("floating division by zero") from exc
    except (OverflowError, ValueError) as exc:
        raise ExecError(f"arithmetic fault: {exc}") from exc


_CACHE: dict = {}
_CACHE_SIZE = 64


def _compiled_for(program: Program, trace: bool) -> CompiledProgram:
    key = (id(program), trace)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is program:
        return hit[1]
    compiled = compile_main(program.globals, program.main.body, trace=trace)
    if len(_CACHE) >= _CACHE_SIZE:
        del _CACHE[next(iter(_CACHE))]
    _CACHE[key] = (program, compiled)
    return compiled


def interpret_sequential(program: Program, inputs: Optional[dict] = None, *, trace: bool = False,
                         budget: int = DEFAULT_BUDGET) -> ExecResult:
    """Run ``program`` on one thread; pragma-blocks execute as plain loops.

    Loop iterators and private-list variables of a pragma-block get private
    copies, as under OpenMP, so the outer variables keep their values.
    Returns the final globals and top-level locals of ``main``.
    """
    inputs = dict(inputs or {})
    check_inputs(program.globals, inputs)
    compiled = _compiled_for(program, trace)
    rt = Runtime(budget, trace=trace)
    raw, ops = run_compiled(compiled, rt, inputs)
    access = build_access_trace(rt.events, compiled) if trace else None
    return ExecResult(export_state(compiled, raw), rt.printed, ops, access)


def states_equal(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    for k in a:
        x, y = a[k], b[k]
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            if not np.array_equal(np.asarray(x), np.asarray(y)):
                return False
        elif x != y:
            return False
    return True
