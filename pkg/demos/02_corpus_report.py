"""
Verifying the benchmark corpus
==============================

Translates the bundled kernels and checks each against the sequential
interpreter for several process counts and arrival orders.  The report also
lists per-worker chunk counts under each schedule.
"""

from omp2dm import corpus
from omp2dm.corpus.report import run_corpus

print("kernels:", ", ".join(corpus.KERNELS))

report = run_corpus(corpus.KERNELS, nprocs=(2, 4, 8), seeds=range(3))
print(report.to_text())
print("all rows equivalent:", report.ok)

## seidel-2d keeps its in-place sweep sequential
for row in report.rows:
    if row.fallbacks:
        print(row.kernel, row.nprocs, row.fallbacks)
