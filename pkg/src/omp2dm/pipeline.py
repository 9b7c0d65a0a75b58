"""One-call translation: source text to analysed program and MPI program."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .analysis import ProgramAnalysis, analyze_program
from .codegen import MpiProgram, lower_program, print_c
from .frontend.ast import Program
from .frontend.parser import parse_source


@dataclass
class Translation:
    program: Program
    analysis: ProgramAnalysis
    mpi: MpiProgram

    @property
    def c_source(self) -> str:
        return print_c(self.mpi)

    def summary_lines(self) -> list[str]:
        """One line per pragma-block: its plan or the reason it stays sequential."""
        lines = []
        for b in self.analysis.blocks:
            where = f"{b.block.span.line}:{b.block.span.column}" if b.block.span else "?"
            if b.plan is not None:
                p = b.plan
                moved = ", ".join(f"{k}:{r.kind}" for k, r in sorted(p.transfers.items())) or "-"
                red = f" reduction({p.reduction[0]}:{p.reduction[1]})" if p.reduction else ""
                lines.append(f"block {b.block_id} at {where}: transformed, {p.schedule}, "
                             f"trip {p.loop.trip_count if p.loop.trip_count is not None else 'runtime'}, "
                             f"results {moved}{red}")
            else:
                lines.append(f"block {b.block_id} at {where}: fallback {b.fallback.code}: {b.fallback.message}")
        return lines


def translate(text: str, file: str = "<input>", *, strict: bool = False,
              schedule: Optional[str] = None, fallback: str = "seq") -> Translation:
    program = parse_source(text, file)
    analysis = analyze_program(program, strict=strict, schedule_override=schedule)
    return Translation(program, analysis, lower_program(analysis, fallback))


def translate_file(path, **kw) -> Translation:
    p = Path(path)
    return translate(p.read_text(), str(p), **kw)
