"""Corpus harness: translate and verify every bundled kernel."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

from ..errors import Omp2dmError
from ..pipeline import translate
from ..runtime import differential_check, interpret_sequential, simulate_mpi
from . import KERNELS, source


def spread(counts: dict[int, int]) -> Optional[float]:
    """max/min of per-worker chunk counts (None when some worker got nothing)."""
    vals = list(counts.values())
    if not vals or min(vals) == 0:
        return None
    return max(vals) / min(vals)


@dataclass
class CorpusRow:
    kernel: str
    nprocs: int
    transformed: int
    fallbacks: list[str]
    equivalent: bool
    cells: list[str]
    messages: int = 0
    trace_problems: list[str] = field(default_factory=list)
    chunk_counts: dict = field(default_factory=dict)
    dynamic_counts: dict = field(default_factory=dict)
    static_counts: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.equivalent and not self.trace_problems and self.error is None


@dataclass
class CorpusReport:
    rows: list[CorpusRow]
    seeds: list[int]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def to_dict(self) -> dict:
        out = {"seeds": self.seeds, "ok": self.ok, "rows": []}
        for r in self.rows:
            d = asdict(r)
            d["dynamic_spread"] = spread(r.dynamic_counts)
            d["static_spread"] = spread(r.static_counts)
            out["rows"].append(d)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        head = ["kernel", "nprocs", "blocks", "fallback", "verdict", "msgs", "chunks/worker", "dyn", "static"]
        body = []
        for r in self.rows:
            ds, ss = spread(r.dynamic_counts), spread(r.static_counts)
            body.append([
                r.kernel, str(r.nprocs), str(r.transformed), ",".join(r.fallbacks) or "-",
                "ok" if r.ok else "FAIL", str(r.messages),
                " ".join(str(v) for v in r.chunk_counts.values()) or "-",
                "-" if ds is None else f"{ds:.2f}", "-" if ss is None else f"{ss:.2f}",
            ])
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        fmt = lambda row: "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
        return "\n".join([fmt(head), fmt(["-" * w for w in widths])] + [fmt(b) for b in body]) + "\n"


def _counts(text, name, nprocs, schedule, fallback):
    tr = translate(text, f"{name}.c", schedule=schedule, fallback=fallback)
    return {str(k): v for k, v in simulate_mpi(tr.mpi, nprocs).chunk_counts().items()}


def run_corpus(kernels: Iterable[str] = KERNELS, nprocs: Iterable[int] = (2, 4, 8),
               seeds: Iterable[int] = range(3), tolerance: Optional[float] = None,
               fallback: str = "seq", schedule: Optional[str] = None) -> CorpusReport:
    seeds = list(seeds)
    rows = []
    for name in kernels:
        text = source(name)
        try:
            tr = translate(text, f"{name}.c", schedule=schedule, fallback=fallback)
            ref = interpret_sequential(tr.program)
        except Omp2dmError as exc:
            rows.extend(CorpusRow(name, p, 0, [], False, [], error=str(exc)) for p in nprocs)
            continue
        n_ok = len(tr.analysis.plans())
        falls = [f"{b.block_id}:{f.code}" for b, f in tr.analysis.fallbacks()]
        for p in nprocs:
            v = differential_check(tr.program, tr.mpi, p, seeds=seeds, tolerance=tolerance, reference=ref)
            row = CorpusRow(name, p, n_ok, falls, v.equivalent, [c.describe() for c in v.cells])
            try:
                res = simulate_mpi(tr.mpi, p, seed=seeds[0] if seeds else 0)
                row.messages = len(res.trace.of_kind("send"))
                row.trace_problems = res.trace.audit()
                row.chunk_counts = {str(k): c for k, c in res.chunk_counts().items()}
                row.dynamic_counts = _counts(text, name, p, "dynamic", fallback)
                row.static_counts = _counts(text, name, p, "static", fallback)
            except Omp2dmError as exc:
                row.error = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return CorpusReport(rows, seeds)
