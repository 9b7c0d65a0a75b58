"""Static consistency audit of a lowered program.

The audit checks that worker results only reach the master through
messages: every non-private variable a transformed loop writes must be
shipped back under a RESULT or REDUCE tag, and every tagged send has a
receive with the same tag and datatype on the other side.
"""

from __future__ import annotations

from collections import Counter

from ..analysis.types import INOUT, OUT, PRIVATE, REDUCTION
from ..frontend.ast import Block, walk
from .chunks import decode_tag
from .ir import HELPER_PREFIX, MpiProgram, MpiRecv, MpiSend, TagRef


def _ops(stmts):
    for n in walk(Block(list(stmts))):
        if isinstance(n, (MpiSend, MpiRecv)):
            yield n


def _tag(node):
    return node.tag.value if isinstance(node.tag, TagRef) else None


def audit_program(prog: MpiProgram) -> list[str]:
    """Problems found; an empty list means the program passed."""
    problems = []
    master = list(prog.master_code) + list(prog.epilogue)
    worker = list(prog.worker_service)
    m_send = Counter((_tag(n), n.dtype) for n in _ops(master) if isinstance(n, MpiSend))
    m_recv = Counter((_tag(n), n.dtype) for n in _ops(master) if isinstance(n, MpiRecv))
    w_send = Counter((_tag(n), n.dtype) for n in _ops(worker) if isinstance(n, MpiSend))
    w_recv = Counter((_tag(n), n.dtype) for n in _ops(worker) if isinstance(n, MpiRecv))
    for (tag, dtype) in sorted(m_send, key=str):
        if tag is None:
            problems.append("master send with a computed tag")
            continue
        kind, _ = decode_tag(tag)
        if kind in ("DATA_IN",) and (tag, dtype) not in w_recv:
            problems.append(f"master sends tag {tag} ({dtype}) that no worker receives")
    for (tag, dtype) in sorted(w_send, key=str):
        if (tag, dtype) not in m_recv:
            problems.append(f"worker sends tag {tag} ({dtype}) that the master never receives")
    for (tag, dtype) in sorted(w_recv, key=str):
        if tag is None:  # the service loop's any-tag receive
            continue
        if (tag, dtype) not in m_send:
            problems.append(f"worker waits for tag {tag} ({dtype}) that the master never sends")

    returned = {n.buf.name for n in _ops(worker) if isinstance(n, MpiSend)}
    for bid, plan in sorted(prog.plans.items()):
        for name, cls in sorted(plan.classes.items()):
            if cls.tag == PRIVATE or name not in plan.decls:
                continue
            if cls.tag in (OUT, INOUT) and name not in returned:
                problems.append(f"block {bid}: {name} is written by workers but never sent back")
            if cls.tag == REDUCTION and HELPER_PREFIX + "part_" + name not in returned:
                problems.append(f"block {bid}: partial of {name} is never sent back")
    return problems
