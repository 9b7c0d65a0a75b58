"""Lowering of analysed programs to master/worker message passing."""

from .audit import audit_program
from .chunks import (
    CHUNK_DIVISOR, TAG_KINDS, ChunkAssignment, compute_chunk_size, decode_tag, encode_tag, plan_chunks,
    static_worker,
)
from .cprint import print_c
from .ir import HELPER_PREFIX, MpiProgram
from .lower import (
    TagTable, TransferPair, emit_epilogue, emit_master_dynamic, emit_master_static, emit_reduction_combine,
    emit_transfers, emit_worker_service, lower_program,
)
from .mutate import ALTERNATES, MUTATIONS, Mutation, mutation_by_name
from .serialize import program_from_json, program_to_dict, program_to_json

__all__ = [
    "ALTERNATES", "CHUNK_DIVISOR", "ChunkAssignment", "HELPER_PREFIX", "MUTATIONS", "MpiProgram", "Mutation",
    "TAG_KINDS", "TagTable", "TransferPair", "audit_program", "compute_chunk_size", "decode_tag",
    "emit_epilogue", "emit_master_dynamic", "emit_master_static", "emit_reduction_combine", "emit_transfers",
    "emit_worker_service", "encode_tag", "lower_program", "mutation_by_name", "plan_chunks", "print_c",
    "program_from_json", "program_to_dict", "program_to_json", "static_worker",
]
