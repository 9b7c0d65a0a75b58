"""Stable JSON form of a program analysis (used by ``--dump-analysis``).

Field names are listed in ``analysis_schema.json`` next to this module.
"""

from __future__ import annotations

import json
from importlib import resources

from ..frontend.printer import CPrinter
from .plan import BlockAnalysis, ProgramAnalysis

REPORT_FORMAT = "omp2dm-analysis"
REPORT_VERSION = 1

_printer = CPrinter()


def _span(span):
    if span is None:
        return None
    return {"file": str(span.file), "line": span.line, "column": span.column}


def _block(b: BlockAnalysis) -> dict:
    d = b.block.directive
    out = {
        "block_id": b.block_id,
        "span": _span(b.block.span),
        "directive": {
            "schedule": d.schedule,
            "chunk": d.chunk,
            "reduction": {"op": d.reduction_op, "variables": list(d.reduction_vars)} if d.reduction_op else None,
            "private": list(d.private),
            "shared": list(d.shared),
            "target_device": d.target_device,
            "warnings": list(d.warnings),
        },
        "loop": None,
        "classes": {k: str(v) for k, v in sorted(b.classes.items())},
        "accesses": [
            {
                "variable": a.variable,
                "kind": a.kind,
                "written": a.written,
                "read": a.read,
                "first_subscript_linear_in_iterator": a.first_subscript_linear_in_iterator,
                "iterator_in_other_subscript": a.iterator_in_other_subscript,
                "first_affine": list(a.first_affine) if a.first_affine else None,
            }
            for a in sorted(b.accesses, key=lambda a: a.variable)
        ],
        "live_after": dict(sorted(b.live_after.items())),
        "status": "transformed" if b.plan is not None else "fallback",
        "plan": None,
        "fallback": None,
    }
    if b.loop is not None:
        lp = b.loop
        out["loop"] = {
            "iterator": lp.iterator,
            "initial": _printer.expr(lp.initial),
            "bound": _printer.expr(lp.bound),
            "stride": lp.stride,
            "cmp": lp.cmp,
            "trip_count": lp.trip_count,
        }
    if b.plan is not None:
        p = b.plan
        out["plan"] = {
            "schedule": p.schedule,
            "transfers": {k: {"kind": r.kind, "a": r.a, "b": r.b} for k, r in sorted(p.transfers.items())},
            "inputs": {k: {"kind": r.kind, "a": r.a, "b": r.b} for k, r in sorted(p.inputs.items())},
            "reduction": (
                {"op": p.reduction[0], "variable": p.reduction[1], "initial": p.reduction[2]}
                if p.reduction else None
            ),
            "enclosing_loop": p.enclosing_loop,
            "warnings": list(p.warnings),
        }
    else:
        f = b.fallback
        out["fallback"] = {"code": f.code, "message": f.message, "span": _span(f.span)}
    return out


def analysis_to_dict(analysis: ProgramAnalysis) -> dict:
    return {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "file": str(analysis.program.file),
        "strict": analysis.strict,
        "schedule_override": analysis.schedule_override,
        "blocks": [_block(b) for b in analysis.blocks],
    }


def analysis_to_json(analysis: ProgramAnalysis) -> str:
    return json.dumps(analysis_to_dict(analysis), indent=2, sort_keys=False) + "\n"


def load_schema() -> dict:
    text = resources.files(__package__).joinpath("analysis_schema.json").read_text()
    return json.loads(text)
