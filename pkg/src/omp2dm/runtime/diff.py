"""Differential check: sequential source run against the simulated MPI run."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ..codegen.ir import MpiProgram
from ..errors import Omp2dmError
from ..frontend.ast import Program, is_int_kind, walk
from ..frontend.ast import PragmaBlock
from .interp import ExecResult, interpret_sequential
from .sim import simulate_mpi

DEFAULT_RTOL = 1e-9
REDUCTION_RTOL = 1e-6
ATOL = 1e-12


@dataclass
class Mismatch:
    variable: str
    index: Optional[tuple]
    expected: object
    actual: object
    seed: int
    nprocs: int

    def __str__(self):
        where = self.variable + ("" if self.index is None else "[" + "][".join(map(str, self.index)) + "]")
        return f"{where}: expected {self.expected!r}, got {self.actual!r} (nprocs={self.nprocs}, seed={self.seed})"


@dataclass
class Cell:
    nprocs: int
    seed: int
    equivalent: bool
    mismatches: list[Mismatch] = field(default_factory=list)
    error: Optional[str] = None

    def describe(self) -> str:
        if self.error:
            return f"nprocs={self.nprocs} seed={self.seed}: error: {self.error}"
        if self.equivalent:
            return f"nprocs={self.nprocs} seed={self.seed}: equivalent"
        return f"nprocs={self.nprocs} seed={self.seed}: mismatch: " + "; ".join(str(m) for m in self.mismatches[:3])


@dataclass
class Verdict:
    cells: list[Cell]
    rtol: float

    @property
    def equivalent(self) -> bool:
        return all(c.equivalent for c in self.cells)

    @property
    def mismatches(self) -> list[Mismatch]:
        return [m for c in self.cells for m in c.mismatches]

    def failures(self) -> list[Cell]:
        return [c for c in self.cells if not c.equivalent]


def has_float_reduction(program: Program) -> bool:
    scopes = {g.name: g for g in program.globals}
    for n in walk(program.main.body):
        if hasattr(n, "decls"):
            for d in n.decls:
                scopes.setdefault(d.name, d)
    for n in walk(program.main.body):
        if isinstance(n, PragmaBlock):
            for v in n.directive.reduction_vars:
                d = scopes.get(v)
                if d is not None and not is_int_kind(d.base):
                    return True
    return False


def _close(a, b, rtol) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    a, b = float(a), float(b)
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    if a == b:
        return True
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), ATOL)


def compare_states(expected: dict, actual: dict, rtol: float, seed: int = 0, nprocs: int = 0,
                   names: Optional[Iterable[str]] = None, limit: int = 20) -> list[Mismatch]:
    out: list[Mismatch] = []
    for name in (names if names is not None else sorted(expected)):
        if name not in actual:
            out.append(Mismatch(name, None, expected[name], "<missing>", seed, nprocs))
            continue
        e, a = expected[name], actual[name]
        if isinstance(e, np.ndarray):
            a = np.asarray(a)
            if e.shape != a.shape:
                out.append(Mismatch(name, None, e.shape, a.shape, seed, nprocs))
                continue
            if e.dtype.kind in "iu":
                bad = np.argwhere(e != a)
            else:
                diff = np.abs(e - a)
                tol = np.maximum(rtol * np.maximum(np.abs(e), np.abs(a)), ATOL)
                both_nan = np.isnan(e) & np.isnan(a)
                bad = np.argwhere(~((e == a) | (diff <= tol) | both_nan))
            for idx in bad[:limit]:
                t = tuple(int(i) for i in idx)
                out.append(Mismatch(name, t, e[t].item(), a[t].item(), seed, nprocs))
        elif not _close(e, a, rtol):
            out.append(Mismatch(name, None, e, a, seed, nprocs))
    return out


def compare_printed(expected: list, actual: list, rtol: float, seed: int, nprocs: int) -> list[Mismatch]:
    out = []
    if len(expected) != len(actual):
        return [Mismatch("<printf>", None, len(expected), len(actual), seed, nprocs)]
    for k, ((f1, v1), (f2, v2)) in enumerate(zip(expected, actual)):
        if f1 != f2 or len(v1) != len(v2):
            out.append(Mismatch("<printf>", (k,), (f1, v1), (f2, v2), seed, nprocs))
            continue
        for j, (x, y) in enumerate(zip(v1, v2)):
            same = x == y if isinstance(x, str) or isinstance(y, str) else _close(x, y, rtol)
            if not same:
                out.append(Mismatch("<printf>", (k, j), x, y, seed, nprocs))
    return out


def differential_check(original: Program, generated: MpiProgram, nprocs: int, inputs: Optional[dict] = None,
                       tolerance: Optional[float] = None, seeds: Iterable[int] = (0,), *, timed: bool = False,
                       reference: Optional[ExecResult] = None) -> Verdict:
    """Compare the sequential run of ``original`` with simulated runs of ``generated``.

    Every global and top-level local of ``main`` is compared (a superset of
    the block outputs), plus every printed value.  Integers must match
    exactly; doubles within ``tolerance`` relative error (default 1e-9, or
    1e-6 when a floating reduction is present).
    """
    rtol = tolerance if tolerance is not None else (
        REDUCTION_RTOL if has_float_reduction(original) else DEFAULT_RTOL)
    if rtol <= 0:
        raise ValueError("tolerance must be positive")
    cells = []
    try:
        ref = reference or interpret_sequential(original, inputs)
    except Omp2dmError as exc:
        return Verdict([Cell(nprocs, s, False, error=f"sequential run failed: {exc}") for s in seeds], rtol)
    for seed in seeds:
        try:
            res = simulate_mpi(generated, nprocs, inputs, seed, timed=timed)
        except Omp2dmError as exc:
            cells.append(Cell(nprocs, seed, False, error=f"{type(exc).__name__}: {exc}"))
            continue
        problems = compare_states(ref.state, res.state, rtol, seed, nprocs)
        problems += compare_printed(ref.printed, res.printed, rtol, seed, nprocs)
        cells.append(Cell(nprocs, seed, not problems, problems))
    return Verdict(cells, rtol)
