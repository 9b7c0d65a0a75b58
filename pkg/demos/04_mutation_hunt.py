"""
Seeded code generator faults
============================

Each mutation breaks one detail of a lowered program (an offset, a tag, a
missing terminate message, a wrong reduction identity).  The differential
check or the simulator's protocol checks must notice every one of them.
"""

from omp2dm import corpus
from omp2dm.codegen import MUTATIONS
from omp2dm.errors import Omp2dmError
from omp2dm.pipeline import translate
from omp2dm.runtime import differential_check

programs = {k: translate(corpus.source(k), f"{k}.c") for k in corpus.KERNELS}

for m in MUTATIONS:
    verdict = "not applicable anywhere"
    for name, tr in programs.items():
        try:
            broken = m(tr.mpi)
        except LookupError:
            continue
        failed = []
        for p in (2, 3, 4, 8):
            try:
                v = differential_check(tr.program, broken, p, seeds=range(3))
            except Omp2dmError as exc:
                failed.append(str(exc))
                break
            if not v.equivalent:
                failed.append(v.failures()[0].describe())
                break
        if failed:
            verdict = f"caught on {name}: {failed[0][:90]}"
            break
        verdict = "survived"
    print(f"{m.name:24s} {verdict}")
