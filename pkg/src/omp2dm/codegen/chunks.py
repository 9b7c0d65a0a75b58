"""Chunking of the iteration space and the message tag encoding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import DegenerateLoop

# Tag layout: tag = 6 * id + kind.  WORK and TERMINATE use the block id,
# DATA_IN / RESULT / REDUCE use the variable id (declaration order), and
# TERMINATE_ALL is the single tag 0.
TAG_KINDS = {"TERMINATE_ALL": 0, "WORK": 1, "DATA_IN": 2, "RESULT": 3, "REDUCE": 4, "TERMINATE": 5}
_KIND_NAMES = {v: k for k, v in TAG_KINDS.items()}
CHUNK_DIVISOR = 10


def encode_tag(kind: str, ident: int = 0) -> int:
    if kind == "TERMINATE_ALL":
        if ident != 0:
            raise ValueError("TERMINATE_ALL carries no id")
        return 0
    if ident < 0:
        raise ValueError("tag ids are nonnegative")
    return 6 * ident + TAG_KINDS[kind]


def decode_tag(tag: int) -> tuple[str, int]:
    ident, kind = divmod(tag, 6)
    if kind == 0 and ident != 0:
        raise ValueError(f"{tag} is not a valid tag")
    return _KIND_NAMES[kind], ident


def compute_chunk_size(trip_count: int, num_workers: int) -> int:
    """Iterations per chunk: max(1, ceil(trip / (workers * 10)))."""
    if num_workers < 1:
        raise ValueError("need at least one worker")
    if trip_count < 0:
        raise ValueError("trip count must be nonnegative")
    if trip_count == 0:
        raise DegenerateLoop("empty iteration space")
    per = num_workers * CHUNK_DIVISOR
    return max(1, -(-trip_count // per))


@dataclass(frozen=True)
class ChunkAssignment:
    offset: int
    count: int
    worker: Optional[int] = None  # None until a dynamic master picks one


def static_worker(k: int, num_workers: int) -> int:
    return k % num_workers + 1


def plan_chunks(trip_count: int, num_workers: int, schedule: str = "static",
                chunk: Optional[int] = None) -> list[ChunkAssignment]:
    """Chunks in dispatch order; static chunks carry their worker rank.

    ``chunk`` overrides the computed chunk size.
    """
    if chunk is not None and chunk < 1:
        raise ValueError("chunk size must be positive")
    if trip_count == 0:
        raise DegenerateLoop("empty iteration space")
    size = chunk or compute_chunk_size(trip_count, num_workers)
    out = []
    for k, off in enumerate(range(0, trip_count, size)):
        w = static_worker(k, num_workers) if schedule == "static" else None
        out.append(ChunkAssignment(off, min(size, trip_count - off), w))
    return out
