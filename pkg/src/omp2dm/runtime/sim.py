"""Deterministic multi-process simulator for lowered programs.

Each rank runs the compiled program as a generator that yields at every
receive.  Sends are buffered and never block.  Messages wait in per-rank
mailboxes keyed by (source, tag), first in first out.

Two scheduling modes exist:

* untimed (default): ranks are stepped round-robin.  A receive from
  ``MPI_ANY_SOURCE`` is resolved only once no other rank can make progress,
  so every message that could compete for it is already queued; the winner
  is then drawn from the seeded generator or from a ``chooser`` callback.
* timed: each rank has a clock advanced by the loop iterations it executes.
  Events are processed in time order (a conservative discrete-event
  simulation); an any-source receive takes the earliest arrival, with the
  seed breaking ties.  This gives per-worker load figures for schedules.
"""

from __future__ import annotations

import json
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from ..codegen.chunks import decode_tag
from ..codegen.ir import MpiProgram
from ..errors import DeadlockDetected, ExecError, SimulationError, UnreceivedMessages
from .compile import CompiledProgram, compile_main
from .interp import DEFAULT_BUDGET, Runtime, check_inputs, export_state

ANY = -1
LATENCY = 1  # time units between a send and its earliest delivery (timed mode)


@dataclass
class Message:
    source: int
    dest: int
    tag: int
    payload: list
    seq: int
    sent_at: float = 0.0

    @property
    def arrival(self) -> float:
        return self.sent_at + LATENCY


@dataclass
class ProcessState:
    rank: int
    mailbox: dict = field(default_factory=dict)  # (source, tag) -> deque[Message]
    status: str = "running"  # running | blocked_on_recv | finished
    pending: Optional[tuple[int, int]] = None  # (source spec, tag spec)
    clock: float = 0.0
    c_base: int = 0
    busy: float = 0.0
    finalized: bool = False
    result: Optional[dict] = None
    gen: object = None

    def queued(self) -> int:
        return sum(len(q) for q in self.mailbox.values())


def candidates(state: ProcessState, source_spec: int, tag: int) -> list[Message]:
    """Messages that could satisfy a receive, one per (source, tag) queue head."""
    out = []
    for (src, tg), q in state.mailbox.items():
        if not q:
            continue
        if source_spec != ANY and src != source_spec:
            continue
        if tag != ANY and tg != tag:
            continue
        out.append(q[0])
    if source_spec != ANY:
        # One sender: its messages are taken in the order they were sent.
        out = sorted(out, key=lambda m: m.seq)[:1]
    return sorted(out, key=lambda m: (m.source, m.seq))


def match_recv(state: ProcessState, source_spec: int, tag: int,
               choose: Optional[Callable[[list[Message]], int]] = None) -> Optional[Message]:
    """Remove and return the message a receive gets, or None if it blocks.

    A specific source yields the head of its queue.  ``ANY`` picks among the
    queue heads of every source with ``choose`` (default: lowest rank).
    """
    cands = candidates(state, source_spec, tag)
    if not cands:
        return None
    k = choose(cands) if (choose is not None and len(cands) > 1) else 0
    msg = cands[k]
    state.mailbox[(msg.source, msg.tag)].popleft()
    return msg


@dataclass
class SimTrace:
    events: list[dict] = field(default_factory=list)

    def add(self, **ev):
        ev["step"] = len(self.events)
        self.events.append(ev)

    def of_kind(self, kind: str) -> list[dict]:
        return [e for e in self.events if e["event"] == kind]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "SimTrace":
        return cls([json.loads(line) for line in text.splitlines() if line.strip()])

    def chunk_counts(self, nprocs: Optional[int] = None) -> dict[int, int]:
        counts = Counter(e["rank"] for e in self.of_kind("compute-chunk"))
        if nprocs is not None:
            for r in range(1, nprocs):
                counts.setdefault(r, 0)
        return dict(sorted(counts.items()))

    def message_balance(self) -> tuple[Counter, Counter]:
        sends = Counter((e["tag"], e["size"]) for e in self.of_kind("send"))
        recvs = Counter((e["tag"], e["size"]) for e in self.of_kind("recv"))
        return sends, recvs

    def audit(self) -> list[str]:
        """Problems found in the trace: unmatched sends/receives, FIFO breaks."""
        problems = []
        sends, recvs = self.message_balance()
        for key in sorted(set(sends) | set(recvs)):
            if sends[key] != recvs[key]:
                problems.append(f"tag {key[0]} size {key[1]}: {sends[key]} sent, {recvs[key]} received")
        sent_seq = {e["seq"]: e for e in self.of_kind("send")}
        last: dict = {}
        for e in self.of_kind("recv"):
            s = sent_seq.get(e["seq"])
            if s is None or s["step"] > e["step"]:
                problems.append(f"receive at step {e['step']} has no earlier send")
                continue
            key = (s["rank"], s["dest"], s["tag"])
            if last.get(key, -1) > e["seq"]:
                problems.append(f"FIFO order broken for {key} at step {e['step']}")
            last[key] = e["seq"]
        return problems


@dataclass
class SimResult:
    state: dict
    printed: list[tuple[str, tuple]]
    trace: SimTrace
    nprocs: int
    seed: int
    busy: dict[int, float] = field(default_factory=dict)
    finish_time: float = 0.0
    choices: list[int] = field(default_factory=list)  # branching factor at each any-source choice

    def chunk_counts(self) -> dict[int, int]:
        return self.trace.chunk_counts(self.nprocs)


class _Api:
    """The MPI calls a rank's compiled code makes directly (everything but receive)."""

    def __init__(self, sim: "Simulator", rank: int):
        self.sim = sim
        self.rank = rank
        self.size = sim.nprocs

    def init(self, c):
        pass

    def finalize(self, c):
        p = self.sim.procs[self.rank]
        if p.finalized:
            raise SimulationError(f"rank {self.rank} finalized twice")
        p.finalized = True

    def send(self, dest, tag, payload, c):
        self.sim.send(self.rank, dest, tag, payload, c)


def compiled_for(prog: MpiProgram) -> CompiledProgram:
    cached = getattr(prog, "_compiled", None)
    if cached is None:
        cached = compile_main(prog.globals, prog.main_body(), mpi=True)
        prog._compiled = cached
    return cached


class Simulator:
    def __init__(self, prog: MpiProgram, nprocs: int, inputs: Optional[dict] = None, seed: int = 0, *,
                 chooser: Optional[Callable[[list[Message]], int]] = None, timed: bool = False,
                 budget: int = DEFAULT_BUDGET, max_steps: int = 10_000_000):
        if nprocs < 2:
            raise ValueError("the simulator needs at least 2 processes (one master, one worker)")
        self.prog = prog
        self.nprocs = nprocs
        self.inputs = dict(inputs or {})
        check_inputs(prog.globals, self.inputs)
        self.seed = seed
        self.rng = random.Random(seed)
        self.chooser = chooser
        self.timed = timed
        self.budget = budget
        self.max_steps = max_steps
        self.compiled = compiled_for(prog)
        self.trace = SimTrace()
        self.seq = 0
        self.procs = [ProcessState(r) for r in range(nprocs)]
        self.runtimes = [Runtime(budget, mpi=_Api(self, r)) for r in range(nprocs)]
        self.choices: list[int] = []

    # -- message movement --------------------------------------------------
    def now(self, rank: int, c: int) -> float:
        p = self.procs[rank]
        return p.clock + (c - p.c_base)

    def send(self, src: int, dest: int, tag: int, payload: list, c: int):
        p = self.procs[src]
        if p.finalized:
            raise SimulationError(f"rank {src} sent after finalize")
        if not 0 <= dest < self.nprocs:
            raise SimulationError(f"rank {src} sent to nonexistent rank {dest}")
        if tag < 0:
            raise SimulationError(f"rank {src} sent with invalid tag {tag}")
        t = self.now(src, c)
        msg = Message(src, dest, tag, list(payload), self.seq, t)
        self.seq += 1
        self.procs[dest].mailbox.setdefault((src, tag), deque()).append(msg)
        self.trace.add(event="send", rank=src, dest=dest, tag=tag, size=len(msg.payload), seq=msg.seq, time=t)

    def choose(self, cands: list[Message]) -> int:
        self.choices.append(len(cands))
        if self.chooser is not None:
            k = self.chooser(cands)
            if not 0 <= k < len(cands):
                raise SimulationError(f"chooser returned {k} for {len(cands)} candidates")
            return k
        return self.rng.randrange(len(cands))

    def deliver(self, p: ProcessState, msg: Message):
        t = max(p.clock, msg.arrival) if self.timed else p.clock
        p.clock = t
        self.trace.add(event="recv", rank=p.rank, source=msg.source, tag=msg.tag, size=len(msg.payload),
                       seq=msg.seq, time=t)
        if p.rank != 0:
            try:
                kind, ident = decode_tag(msg.tag)
            except (ValueError, KeyError):
                kind, ident = "?", -1
            if kind == "WORK" and len(msg.payload) == 2:
                self.trace.add(event="compute-chunk", rank=p.rank, block=ident, offset=int(msg.payload[0]),
                               count=int(msg.payload[1]), time=t)
            elif kind in ("TERMINATE", "TERMINATE_ALL"):
                self.trace.add(event="terminate", rank=p.rank, block=ident if kind == "TERMINATE" else None,
                               time=t)
        self.resume(p, (msg.payload, msg.source, msg.tag))

    # -- process stepping --------------------------------------------------
    def start(self, p: ProcessState):
        p.gen = self.compiled.fn(self.runtimes[p.rank], self.inputs)
        self.resume(p, None)

    def resume(self, p: ProcessState, value):
        p.status = "running"
        p.pending = None
        try:
            desc = p.gen.send(value)
        except StopIteration as stop:
            raw, c = stop.value
            self.advance(p, c)
            p.status = "finished"
            p.result = raw
            return
        except ZeroDivisionError as exc:
            raise ExecError(f"rank {p.rank}: floating division by zero") from exc
        except (OverflowError, ValueError) as exc:
            raise ExecError(f"rank {p.rank}: arithmetic fault: {exc}") from exc
        src, tag, c = desc
        self.advance(p, c)
        p.status = "blocked_on_recv"
        p.pending = (src, tag)

    def advance(self, p: ProcessState, c: int):
        spent = c - p.c_base
        p.busy += spent
        p.clock += spent
        p.c_base = c

    def try_specific(self, p: ProcessState) -> Optional[Message]:
        src, tag = p.pending
        if src == ANY:
            return None
        cands = candidates(p, src, tag)
        return cands[0] if cands else None

    def take(self, p: ProcessState, msg: Message):
        p.mailbox[(msg.source, msg.tag)].popleft()
        self.deliver(p, msg)

    # -- drivers -----------------------------------------------------------
    def run(self) -> SimResult:
        for p in self.procs:
            self.start(p)
        if self.timed:
            self.run_timed()
        else:
            self.run_untimed()
        self.finish_checks()
        master = self.procs[0]
        return SimResult(
            state=export_state(self.compiled, master.result),
            printed=self.runtimes[0].printed,
            trace=self.trace,
            nprocs=self.nprocs,
            seed=self.seed,
            busy={p.rank: p.busy for p in self.procs},
            finish_time=max(p.clock for p in self.procs),
            choices=self.choices,
        )

    def steps_guard(self, steps: int):
        if steps > self.max_steps:
            raise SimulationError("simulation step limit exceeded")

    def run_untimed(self):
        steps = 0
        while True:
            progressed = False
            for p in self.procs:
                if p.status != "blocked_on_recv":
                    continue
                msg = self.try_specific(p)
                if msg is not None:
                    self.take(p, msg)
                    progressed = True
                    steps += 1
            if progressed:
                self.steps_guard(steps)
                continue
            # Nobody can move without an any-source decision: every message
            # that could compete is now queued.
            for p in self.procs:
                if p.status == "blocked_on_recv" and p.pending[0] == ANY:
                    cands = candidates(p, ANY, p.pending[1])
                    if cands:
                        k = self.choose(cands) if len(cands) > 1 else 0
                        self.take(p, cands[k])
                        progressed = True
                        steps += 1
                        break
            if progressed:
                self.steps_guard(steps)
                continue
            if all(p.status == "finished" for p in self.procs):
                return
            self.deadlock()

    def run_timed(self):
        steps = 0
        while True:
            best = None  # (time, order, rank, message)
            for p in self.procs:
                if p.status != "blocked_on_recv":
                    continue
                src, tag = p.pending
                cands = candidates(p, src, tag)
                if not cands:
                    continue
                t = max(p.clock, min(m.arrival for m in cands))
                key = (t, p.rank)
                if best is None or key < best[0]:
                    best = (key, p, cands)
            if best is None:
                if all(p.status == "finished" for p in self.procs):
                    return
                self.deadlock()
            (t, _), p, cands = best
            if p.pending[0] == ANY:
                first = min(m.arrival for m in cands)
                ready = [m for m in cands if m.arrival <= max(p.clock, first)]
                k = self.choose(ready) if len(ready) > 1 else 0
                msg = ready[k]
            else:
                msg = cands[0]
            self.take(p, msg)
            steps += 1
            self.steps_guard(steps)

    def deadlock(self):
        pending = {}
        for p in self.procs:
            if p.status == "blocked_on_recv":
                src, tag = p.pending
                pending[p.rank] = (f"recv(source={'ANY' if src == ANY else src}, "
                                   f"tag={'ANY' if tag == ANY else tag})")
        raise DeadlockDetected(pending)

    def finish_checks(self):
        leftovers = {p.rank: p.queued() for p in self.procs if p.queued()}
        if leftovers:
            raise UnreceivedMessages(leftovers)


def simulate_mpi(prog: Union[MpiProgram, dict, str], nprocs: int, inputs: Optional[dict] = None, seed: int = 0, *,
                 chooser=None, timed: bool = False, budget: int = DEFAULT_BUDGET, trace_path=None) -> SimResult:
    """Run a lowered program on ``nprocs`` simulated ranks; return rank 0's state.

    ``prog`` may also be the JSON form produced by ``program_to_json``.
    """
    if not isinstance(prog, MpiProgram):
        from ..codegen.serialize import program_from_json

        prog = program_from_json(prog)
    result = Simulator(prog, nprocs, inputs, seed, chooser=chooser, timed=timed, budget=budget).run()
    if trace_path is not None:
        result.trace.write(trace_path)
    return result


def enumerate_arrival_orders(prog: MpiProgram, nprocs: int, inputs: Optional[dict] = None, *,
                             limit: int = 100_000) -> Iterable[tuple[list[int], SimResult]]:
    """Every resolution of every any-source receive, by depth-first search.

    Yields (choice path, result) once per distinct complete order.  Raises
    SimulationError if more than ``limit`` runs would be needed.
    """
    stack: list[list[int]] = [[]]
    runs = 0
    while stack:
        prefix = stack.pop()
        path: list[int] = []
        widths: list[int] = []

        def chooser(cands, prefix=prefix, path=path, widths=widths):
            i = len(path)
            k = prefix[i] if i < len(prefix) else 0
            path.append(k)
            widths.append(len(cands))
            return k

        runs += 1
        if runs > limit:
            raise SimulationError(f"more than {limit} arrival orders")
        result = Simulator(prog, nprocs, inputs, 0, chooser=chooser).run()
        yield list(path), result
        for j in range(len(path) - 1, len(prefix) - 1, -1):
            for alt in range(widths[j] - 1, 0, -1):
                stack.append(path[:j] + [alt])
