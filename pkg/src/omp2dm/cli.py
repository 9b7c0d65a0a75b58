"""Command-line driver.

    omp2dm transpile in.c [-o out.c] [--strict] [--fallback seq|keep-omp] [--schedule static|dynamic]
    omp2dm verify in.c [--nprocs 2,4] [--seeds 0,1,2] [--tolerance T] [--mutate NAME]
    omp2dm dump-analysis in.c [-o analysis.json]
    omp2dm corpus [KERNEL ...] [-o report]      (writes report.json and report.txt)

Exit codes: 0 ok, 1 verification mismatch, 2 usage or parse error,
3 strict mode rejected a block.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .analysis.report import analysis_to_json
from .errors import Omp2dmError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_STRICT = 0, 1, 2, 3
MODES = ("transpile", "verify", "dump-analysis", "corpus")


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    mode: str
    inputs: list[str] = field(default_factory=list)
    output: Optional[str] = None
    nprocs: list[int] = field(default_factory=lambda: [2, 4])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    fallback: str = "seq"
    strict: bool = False
    tolerance: Optional[float] = None
    schedule: Optional[str] = None
    dump_analysis: Optional[str] = None
    mutate: Optional[str] = None
    trace: Optional[str] = None

    def validate(self):
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.mode != "corpus" and len(self.inputs) != 1:
            raise UsageError(f"{self.mode} takes exactly one input file")
        if any(p < 2 for p in self.nprocs):
            raise UsageError("--nprocs must be at least 2 (one master and one worker)")
        if self.tolerance is not None and not self.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        if not self.seeds:
            raise UsageError("--seeds must list at least one seed")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omp2dm", description="Translate OpenMP parallel-for loops to MPI.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("inputs", nargs="*", help="C source file (corpus mode: kernel names)")
    ap.add_argument("-o", "--output", help="output file (corpus mode: report path prefix)")
    ap.add_argument("--nprocs", type=_int_list, default=[2, 4], help="process counts, e.g. 2,4,8")
    ap.add_argument("--seeds", type=_int_list, default=[0, 1, 2], help="simulator seeds, e.g. 0,1,2")
    ap.add_argument("--fallback", choices=("seq", "keep-omp"), default="seq")
    ap.add_argument("--strict", action="store_true", help="reject blocks that would need a whole-array transfer")
    ap.add_argument("--tolerance", type=float, help="relative tolerance for floating values")
    ap.add_argument("--schedule", "--schedule-override", dest="schedule", choices=("static", "dynamic"))
    ap.add_argument("--dump-analysis", metavar="PATH", help="also write the analysis JSON here")
    ap.add_argument("--mutate", metavar="NAME", help="verify a deliberately broken variant of the output")
    ap.add_argument("--trace", metavar="PATH", help="verify: write the first simulated run's event trace")
    return ap


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(cfg: CliConfig):
    from .pipeline import translate

    path = Path(cfg.inputs[0])
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}")
    return translate(text, str(path), strict=cfg.strict, schedule=cfg.schedule, fallback=cfg.fallback)


def _summary(tr):
    for line in tr.summary_lines():
        print(line, file=sys.stderr)


def run_transpile(cfg: CliConfig) -> int:
    tr = _load(cfg)
    _summary(tr)
    if cfg.dump_analysis:
        Path(cfg.dump_analysis).write_text(analysis_to_json(tr.analysis))
    if cfg.strict and tr.analysis.fallbacks():
        print("strict mode: not every block could be transformed", file=sys.stderr)
        return EXIT_STRICT
    _write(cfg.output, tr.c_source)
    return EXIT_OK


def run_dump_analysis(cfg: CliConfig) -> int:
    tr = _load(cfg)
    _write(cfg.output or cfg.dump_analysis, analysis_to_json(tr.analysis))
    return EXIT_STRICT if cfg.strict and tr.analysis.fallbacks() else EXIT_OK


def run_verify(cfg: CliConfig) -> int:
    from .codegen import mutation_by_name
    from .runtime import differential_check, interpret_sequential, simulate_mpi

    tr = _load(cfg)
    _summary(tr)
    if cfg.strict and tr.analysis.fallbacks():
        return EXIT_STRICT
    mpi = tr.mpi
    if cfg.mutate:
        try:
            mpi = mutation_by_name(cfg.mutate)(mpi)
        except KeyError:
            raise UsageError(f"unknown mutation {cfg.mutate!r}")
        except LookupError as exc:
            raise UsageError(str(exc))
    if cfg.trace:
        try:
            simulate_mpi(mpi, cfg.nprocs[0], seed=cfg.seeds[0], trace_path=cfg.trace)
        except Omp2dmError:
            pass  # the matrix below reports it
    ref = interpret_sequential(tr.program)
    ok = True
    for p in cfg.nprocs:
        verdict = differential_check(tr.program, mpi, p, seeds=cfg.seeds, tolerance=cfg.tolerance, reference=ref)
        for cell in verdict.cells:
            print(cell.describe())
        ok &= verdict.equivalent
    cells = len(cfg.nprocs) * len(cfg.seeds)
    print(f"{'equivalent' if ok else 'MISMATCH'}: {cells} cells")
    return EXIT_OK if ok else EXIT_MISMATCH


def run_corpus(cfg: CliConfig) -> int:
    from . import corpus
    from .corpus.report import run_corpus as harness

    names = cfg.inputs or list(corpus.KERNELS)
    unknown = [n for n in names if n not in corpus.KERNELS + corpus.EXTRA]
    if unknown:
        raise UsageError(f"unknown kernel(s): {', '.join(unknown)}")
    report = harness(names, cfg.nprocs, cfg.seeds, cfg.tolerance, cfg.fallback, cfg.schedule)
    text = report.to_text()
    if cfg.output:
        Path(cfg.output + ".json").write_text(report.to_json())
        Path(cfg.output + ".txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_MISMATCH


RUNNERS = {"transpile": run_transpile, "verify": run_verify, "dump-analysis": run_dump_analysis,
           "corpus": run_corpus}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(**vars(args))
    try:
        cfg.validate()
        return RUNNERS[cfg.mode](cfg)
    except UsageError as exc:
        print(f"omp2dm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Omp2dmError as exc:
        print(f"omp2dm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
