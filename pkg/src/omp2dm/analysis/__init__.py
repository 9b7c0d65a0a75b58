"""Context and loop analysis of pragma-blocks."""

from .context import BlockContext, VarTable, build_contexts, live_after
from .loops import canonicalize_loop, loop_iterator_name
from .plan import (
    BlockAnalysis, ProgramAnalysis, analyze_accesses, analyze_block, analyze_program,
    check_transformability, classify_variables, effective_schedule,
)
from .scan import affine_form, scan_block
from .types import (
    FALLBACK_CODES, IN, INOUT, OUT, PRIVATE, REDUCTION, REDUCTION_IDENTITY, AccessPattern,
    FallbackReason, LoopDescriptor, ReductionInfo, TransferRule, TransformPlan, VariableClass,
    trip_count,
)
