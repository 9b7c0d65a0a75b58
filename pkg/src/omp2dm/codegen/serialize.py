"""JSON form of lowered programs.

Nodes become objects with a ``"node"`` class name plus their fields (spans
are dropped, roles kept).  The form round-trips into an equivalent
:class:`MpiProgram` that the simulator can run; plans and fallbacks are
carried as summaries only.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Union

from ..frontend import ast as A
from . import ir
from .ir import MpiProgram

FORMAT = "omp2dm-mpi-program"
VERSION = 1

_CLASSES = {}
for _mod in (A, ir):
    for _name in dir(_mod):
        _obj = getattr(_mod, _name)
        if isinstance(_obj, type) and dataclasses.is_dataclass(_obj) and issubclass(_obj, A.Node):
            _CLASSES[_name] = _obj


def node_to_json(node):
    if isinstance(node, A.Node):
        out = {"node": type(node).__name__}
        for f in dataclasses.fields(node):
            if f.name == "span":
                continue
            v = getattr(node, f.name)
            if f.name == "role" and not v:
                continue
            out[f.name] = node_to_json(v)
        return out
    if isinstance(node, list):
        return [node_to_json(v) for v in node]
    if isinstance(node, dict):
        return {k: node_to_json(v) for k, v in node.items()}
    return node


def node_from_json(data):
    if isinstance(data, dict) and "node" in data:
        cls = _CLASSES[data["node"]]
        kwargs = {k: node_from_json(v) for k, v in data.items() if k != "node"}
        return cls(**kwargs)
    if isinstance(data, list):
        return [node_from_json(v) for v in data]
    if isinstance(data, dict):
        return {k: node_from_json(v) for k, v in data.items()}
    return data


def _plan_summary(plan) -> dict:
    return {
        "block_id": plan.block_id,
        "schedule": plan.schedule,
        "iterator": plan.loop.iterator,
        "stride": plan.loop.stride,
        "classes": {k: str(v) for k, v in sorted(plan.classes.items())},
        "transfers": {k: dataclasses.asdict(v) for k, v in sorted(plan.transfers.items())},
        "inputs": {k: dataclasses.asdict(v) for k, v in sorted(plan.inputs.items())},
        "reductions": [dataclasses.asdict(r) for r in plan.reductions],
    }


def program_to_dict(prog: MpiProgram) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "file": prog.file,
        "defines": prog.defines,
        "globals": node_to_json(prog.globals),
        "helpers": node_to_json(prog.helpers),
        "setup": node_to_json(prog.setup),
        "worker_service": node_to_json(prog.worker_service),
        "master_code": node_to_json(prog.master_code),
        "epilogue": node_to_json(prog.epilogue),
        "tags": prog.tags,
        "capture": prog.capture,
        "fallback_mode": prog.fallback_mode,
        "plans": {str(k): _plan_summary(p) for k, p in sorted(prog.plans.items())},
        "fallbacks": {
            str(k): {"code": f.code, "message": f.message, "span": str(f.span) if f.span else None}
            for k, f in sorted(prog.fallbacks.items())
        },
    }


def program_to_json(prog: MpiProgram, indent: int = 1) -> str:
    return json.dumps(program_to_dict(prog), indent=indent, sort_keys=False)


def program_from_json(data: Union[str, dict]) -> MpiProgram:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("format") != FORMAT:
        raise ValueError("not a serialized message-passing program")
    return MpiProgram(
        defines=dict(data["defines"]),
        globals=node_from_json(data["globals"]),
        helpers=node_from_json(data["helpers"]),
        setup=node_from_json(data["setup"]),
        worker_service=node_from_json(data["worker_service"]),
        master_code=node_from_json(data["master_code"]),
        epilogue=node_from_json(data["epilogue"]),
        tags=dict(data["tags"]),
        capture=list(data["capture"]),
        plans={},
        fallbacks={},
        fallback_mode=data.get("fallback_mode", "seq"),
        file=data.get("file", "<input>"),
    )
