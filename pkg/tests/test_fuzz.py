"""Fuzzed programs through the whole pipeline."""

import pytest

import progfuzz
from omp2dm.codegen import audit_program
from omp2dm.pipeline import translate
from omp2dm.runtime import differential_check, interpret_sequential


@pytest.mark.parametrize("start", range(0, 300, 50))
def test_fuzzed_programs_equivalent(start):
    checked = 0
    for seed in range(start, start + 50):
        tr = translate(progfuzz.program(seed), f"fuzz{seed}.c")
        assert audit_program(tr.mpi) == []
        ref = interpret_sequential(tr.program)
        for p in (2, 3, 5):
            v = differential_check(tr.program, tr.mpi, p, seeds=(seed, seed + 1), reference=ref)
            assert v.equivalent, (seed, [c.describe() for c in v.failures()])
        checked += bool(tr.analysis.plans())
    assert checked > 10
