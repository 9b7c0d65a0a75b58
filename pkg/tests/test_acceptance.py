"""Acceptance criteria 1-10.

Each test carries a ``criterion`` marker; the conftest prints one PASS/FAIL
line per criterion at the end of the run.
"""

import itertools
import math
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import progfuzz
from omp2dm import corpus
from omp2dm.analysis import IN, INOUT, OUT, REDUCTION, analyze_program
from omp2dm.codegen import MUTATIONS, plan_chunks, print_c, program_to_json, static_worker
from omp2dm.codegen.ir import AnyTag, MpiFinalize, MpiRecv, MpiSend
from omp2dm.errors import Omp2dmError
from omp2dm.frontend.ast import Assign, Call, CallStmt, For, If, IntLit, Var, While, walk
from omp2dm.frontend.parser import parse_source
from omp2dm.pipeline import translate
from omp2dm.runtime import (
    differential_check, enumerate_arrival_orders, interpret_sequential, simulate_mpi,
)

NPROCS = (2, 3, 4, 8)
GOLDEN = Path(__file__).parent / "golden" / "array_then_sum_mpi.c"


@pytest.fixture(scope="module")
def kernels():
    return {k: translate(corpus.source(k), f"{k}.c") for k in corpus.KERNELS}


def same_state(a, b):
    if a.keys() != b.keys():
        return False
    return all(np.array_equal(np.asarray(a[k]), np.asarray(b[k])) for k in a)


# -- 1 -----------------------------------------------------------------------

@pytest.mark.criterion(1, "differential equivalence, 7 kernels x nprocs {2,3,4,8} x 10 seeds")
def test_c1_differential_equivalence(kernels):
    start = time.perf_counter()
    failures = []
    for name, tr in kernels.items():
        ref = interpret_sequential(tr.program)
        for p in NPROCS:
            v = differential_check(tr.program, tr.mpi, p, seeds=range(10), reference=ref)
            failures += [f"{name}: {c.describe()}" for c in v.failures()]
            assert v.rtol == (1e-6 if name in ("gemm", "seidel2d") else 1e-9)
    elapsed = time.perf_counter() - start
    assert not failures, failures
    assert elapsed < 60, elapsed


# -- 2 -----------------------------------------------------------------------

@pytest.mark.criterion(2, "chunks disjoint, covering, within max(1, ceil(trip/(P*10)))")
def test_c2_chunk_partition():
    rng = random.Random(20260101)
    for _ in range(1000):
        trip = rng.randint(1, 10_000)
        p = rng.randint(1, 64)
        stride = rng.choice([1, 2, 3]) * rng.choice([1, -1])
        lo = rng.randint(-50, 50)
        expected = [lo + k * stride for k in range(trip)]
        bound = max(1, math.ceil(trip / (p * 10)))
        seen = []
        for c in plan_chunks(trip, p, rng.choice(["static", "dynamic"])):
            assert 1 <= c.count <= bound
            # the worker's iterator formula: init + (off + k) * stride
            seen += [lo + (c.offset + k) * stride for k in range(c.count)]
        assert seen == expected  # in order, hence disjoint and covering


@pytest.mark.criterion(2, "chunks disjoint, covering, within max(1, ceil(trip/(P*10)))")
def test_c2_chunk_partition_in_generated_code():
    rng = random.Random(7)
    for _ in range(25):
        stride = rng.choice([1, 2, 3])
        trip = rng.randint(1, 300)
        workers = rng.randint(1, 12)
        down = rng.random() < 0.5
        n = trip * stride
        header = (f"i = {n - 1}; i >= 0; i -= {stride}" if down else f"i = 0; i < {n}; i += {stride}")
        src = (f"long hit[{n}];\nint main() {{ int i;\n#pragma omp parallel for {rng.choice(['', 'schedule(static)'])}\n"
               f"for ({header}) hit[i] = hit[i] + 1 + i;\nreturn 0; }}")
        tr = translate(src)
        res = simulate_mpi(tr.mpi, workers + 1, seed=rng.randint(0, 99))
        chunks = sorted((e["offset"], e["count"]) for e in res.trace.of_kind("compute-chunk"))
        bound = max(1, math.ceil(trip / (workers * 10)))
        pos = 0
        for off, cnt in chunks:
            assert off == pos and 1 <= cnt <= bound
            pos += cnt
        assert pos == trip
        assert same_state(res.state, interpret_sequential(tr.program).state)


# -- 3 -----------------------------------------------------------------------

@pytest.mark.criterion(3, "static chunk k goes to rank (k mod P)+1")
def test_c3_static_round_robin():
    for p in range(1, 17):
        for k in range(201):
            assert static_worker(k, p) == k % p + 1
        chunks = plan_chunks(201, p, "static", chunk=1)
        assert [c.worker for c in chunks] == [k % p + 1 for k in range(201)]


@pytest.mark.criterion(3, "static chunk k goes to rank (k mod P)+1")
def test_c3_static_round_robin_in_generated_code():
    for p in range(1, 17):
        trip = 10 * p  # chunk size 1, so offset k is chunk k
        src = (f"int a[{trip}];\nint main() {{ int i;\n#pragma omp parallel for schedule(static)\n"
               f"for (i = 0; i < {trip}; i++) a[i] = i;\nreturn 0; }}")
        res = simulate_mpi(translate(src).mpi, p + 1, seed=p)
        got = {e["offset"]: e["rank"] for e in res.trace.of_kind("compute-chunk")}
        assert got == {k: k % p + 1 for k in range(trip)}


# -- 4 -----------------------------------------------------------------------

SMALL_PROGRAMS = {
    "rows": ("long a[{n}];\nint main() {{ int i;\n#pragma omp parallel for\n"
             "for (i = 0; i < {n}; i++) a[i] = i * i + 1;\nreturn 0; }}"),
    "reduce": ("long a[{n}]; long s;\nint main() {{ int i; s = 4;\nfor (i = 0; i < {n}; i++) a[i] = 3 * i - 2;\n"
               "#pragma omp parallel for reduction(+:s)\nfor (i = 0; i < {n}; i++) s += a[i] * a[i];\nreturn 0; }}"),
    "last": ("long a[{n}][3]; long last[3];\nint main() {{ int i, j;\n#pragma omp parallel for private(j)\n"
             "for (i = 0; i < {n}; i++) for (j = 0; j < 3; j++) {{ a[i][j] = i + j; last[j] = a[i][j] * 2; }}\n"
             "return 0; }}"),
    "mixed": ("double v[{n}]; double w[{n}]; long c;\nint main() {{ int i; c = 1;\n"
              "for (i = 0; i < {n}; i++) v[i] = i * 0.25;\n"
              "#pragma omp parallel for reduction(*:c)\nfor (i = 0; i < {n}; i++) {{ w[i] = v[i] * 2.0; c *= i + 1; }}\n"
              "return 0; }}"),
}


@pytest.mark.criterion(4, "dynamic schedule: one final state over all arrival orders")
@pytest.mark.parametrize("shape", sorted(SMALL_PROGRAMS))
def test_c4_dynamic_order_independence(shape):
    for n, workers in itertools.product((2, 4, 6), (1, 2, 3, 4)):
        tr = translate(SMALL_PROGRAMS[shape].format(n=n))
        assert len(plan_chunks(n, workers)) <= 6
        ref = interpret_sequential(tr.program).state
        runs = list(enumerate_arrival_orders(tr.mpi, workers + 1))
        finals = []
        for _, res in runs:
            if not any(same_state(res.state, f) for f in finals):
                finals.append(res.state)
        assert len(finals) == 1, (shape, n, workers, len(runs))
        assert same_state(finals[0], ref)
        if workers >= 2 and n >= workers:
            assert len(runs) > 1  # the enumeration really branched


# -- 5 -----------------------------------------------------------------------

def reduction_source(op, base, n, init):
    return (f"{base} a[{n}]; {base} r;\nint main() {{ int i; r = {init};\n"
            f"for (i = 0; i < {n}; i++) a[i] = i + 2;\n"
            f"#pragma omp parallel for reduction({op}:r)\nfor (i = 0; i < {n}; i++) r {op}= a[i];\n"
            f"return 0; }}")


@pytest.mark.criterion(5, "accumulator 0 for +,- and 1 for *,/; integer reductions exact in every order")
@pytest.mark.parametrize("op, identity", [("+", 0), ("-", 0), ("*", 1), ("/", 1)])
def test_c5_accumulator_identity_in_generated_code(op, identity):
    for base in ("long", "double"):
        tr = translate(reduction_source(op, base, 5, 7))
        inits = [n for top in tr.mpi.master_code for n in walk(top)
                 if isinstance(n, Assign) and n.role == "acc_init"]
        assert len(inits) == 1
        assert inits[0].target == Var("_omp2dm_acc_r")
        assert isinstance(inits[0].value, IntLit) and inits[0].value.value == identity
        assert f"_omp2dm_acc_r = {identity};" in tr.c_source


@pytest.mark.criterion(5, "accumulator 0 for +,- and 1 for *,/; integer reductions exact in every order")
@pytest.mark.parametrize("op", ["+", "-", "*", "/"])
def test_c5_integer_reduction_every_order(op):
    init = 10 ** 6 if op == "/" else 7
    for partials in range(1, 6):
        tr = translate(reduction_source(op, "long", partials, init))
        expected = interpret_sequential(tr.program).state["r"]
        # one iteration per chunk and per worker: `partials` partials race
        runs = list(enumerate_arrival_orders(tr.mpi, partials + 1))
        assert len(runs) == math.factorial(partials)
        assert {res.state["r"] for _, res in runs} == {expected}


# -- 6 -----------------------------------------------------------------------

def classification_violations(program):
    analysis = analyze_program(program)
    trace = interpret_sequential(program, trace=True).trace
    problems = []
    for b in analysis.blocks:
        scope = b.context.scope
        decl_of = {name: scope.get(name) for name in b.classes}
        for inst in trace.for_block(b.block_id):
            written = {id(trace.decls[n]) for n in inst.writes}
            read_after = {id(trace.decls[n]) for n in inst.read_after}
            for name, cls in b.classes.items():
                d = decl_of[name]
                if d is None:
                    continue
                if cls.tag == IN and id(d) in written:
                    problems.append(f"block {b.block_id}: {name} classed IN but written")
                if id(d) in read_after and cls.tag not in (OUT, INOUT, REDUCTION):
                    problems.append(f"block {b.block_id}: {name} written and read after, classed {cls}")
            known = {id(d) for d in decl_of.values() if d is not None}
            for n in inst.read_after:
                d = trace.decls[n]
                outer = scope.get(d.name)
                if outer is d and id(d) not in known:
                    problems.append(f"block {b.block_id}: {d.name} written and read after but unclassified")
    return problems


@pytest.mark.criterion(6, "IN/OUT/INOUT classes agree with interpreter access traces")
def test_c6_classification_on_corpus():
    for name in corpus.KERNELS + corpus.EXTRA:
        assert classification_violations(corpus.load(name)) == [], name


@pytest.mark.criterion(6, "IN/OUT/INOUT classes agree with interpreter access traces")
def test_c6_classification_on_fuzzed_programs():
    bad = {}
    for seed in range(500):
        problems = classification_violations(parse_source(progfuzz.program(seed), f"fuzz{seed}.c"))
        if problems:
            bad[seed] = problems
    assert not bad, dict(list(bad.items())[:5])


# -- 7 -----------------------------------------------------------------------

@pytest.mark.criterion(7, "no deadlock, no unreceived message, sends = receives per tag")
def test_c7_protocol_hygiene(kernels):
    for name, tr in kernels.items():
        for p in NPROCS:
            for seed in range(3):
                for timed in (False, True):
                    res = simulate_mpi(tr.mpi, p, seed=seed, timed=timed)  # raises on deadlock or leftovers
                    assert res.trace.audit() == [], (name, p, seed)
                    sends, recvs = res.trace.message_balance()
                    assert sends == recvs
                    assert len(res.trace.of_kind("send")) == len(res.trace.of_kind("recv"))


# -- 8 -----------------------------------------------------------------------

def chunk_ratio(counts):
    vals = list(counts.values())
    return max(vals) / min(vals) if min(vals) else math.inf


@pytest.mark.criterion(8, "skewed kernel, nprocs=8: dynamic max/min chunk ratio < static")
def test_c8_dynamic_balances_better():
    text = corpus.source("skewed")
    ratios = {}
    for sched in ("dynamic", "static"):
        res = simulate_mpi(translate(text, schedule=sched).mpi, 8, timed=True)
        ratios[sched] = chunk_ratio(res.trace.chunk_counts(8))
    untimed = chunk_ratio(simulate_mpi(translate(text, schedule="dynamic").mpi, 8).trace.chunk_counts(8))
    print(f"chunk-count max/min: dynamic {ratios['dynamic']:.3f} (untimed {untimed:.3f}), "
          f"static {ratios['static']:.3f}")
    assert ratios["dynamic"] < ratios["static"]


def test_c8_companion_dynamic_finishes_first():
    """Cost-aware view of the same claim: simulated completion time."""
    text = corpus.source("skewed")
    finish = {s: simulate_mpi(translate(text, schedule=s).mpi, 8, timed=True).finish_time
              for s in ("dynamic", "static")}
    assert finish["dynamic"] < finish["static"]


def test_c8_companion_static_spread_is_minimal():
    """Round-robin already gives every worker floor or ceil of chunks/workers."""
    for trip in (50, 560, 999):
        for workers in range(1, 10):
            counts = {}
            for c in plan_chunks(trip, workers, "static"):
                counts[c.worker] = counts.get(c.worker, 0) + 1
            n = len(plan_chunks(trip, workers))
            assert max(counts.values()) - min(counts.values()) <= 1
            assert max(counts.values()) == math.ceil(n / workers)


# -- 9 -----------------------------------------------------------------------

def top_level_roles(stmts):
    return [s.role for s in stmts]


@pytest.fixture(scope="module")
def array_then_sum():
    return translate(corpus.source("array_then_sum"), "array_then_sum.c")


@pytest.mark.criterion(9, "array-then-sum example: generated structure and byte-stable output")
def test_c9_rank_guard_and_worker_loop(array_then_sum):
    prog = array_then_sum.mpi
    branch = prog.worker_branch()
    assert isinstance(branch, If) and branch.cond.op == "!=" and branch.cond.left == Var("_omp2dm_rank")
    body = prog.main_body().stmts
    assert body.index(branch) < body.index(prog.master_code[0])
    (loop,) = [n for n in walk(branch) if isinstance(n, While) and n.role == "service_loop"]
    first = loop.body.stmts[0]
    assert isinstance(first, MpiRecv) and isinstance(first.tag, AnyTag)
    handlers = [n for n in walk(loop) if isinstance(n, For) and n.role == "w_loop"]
    assert len(handlers) == 2
    sends = [n.role for n in walk(loop) if isinstance(n, MpiSend)]
    assert sends.count("w_send_header") == 2 and "w_send_result" in sends and "w_send_reduce" in sends
    # worker finalizes right after its service loop
    assert isinstance(branch.then.stmts[-2], MpiFinalize)


@pytest.mark.criterion(9, "array-then-sum example: generated structure and byte-stable output")
def test_c9_runtime_chunk_size_and_reduction(array_then_sum):
    prog = array_then_sum.mpi
    chunk_sets = [n for top in prog.master_code for n in walk(top)
                  if isinstance(n, Assign) and n.target == Var("_omp2dm_chunk")]
    assert len(chunk_sets) == 2
    for a in chunk_sets:
        assert isinstance(a.value, Call) and a.value.name == "max"
        assert Var("_omp2dm_nw") in list(walk(a.value))
    nw = [n for top in prog.master_code for n in walk(top)
          if isinstance(n, Assign) and n.target == Var("_omp2dm_nw")]
    assert all(Var("_omp2dm_size") in list(walk(a.value)) for a in nw)
    combine = [n for top in prog.master_code for n in walk(top) if isinstance(n, Assign) and n.role == "acc_combine"]
    fold = [n for top in prog.master_code for n in walk(top) if isinstance(n, Assign) and n.role == "reduce_fold"]
    assert len(combine) == 1 and combine[0].value.op == "+"
    assert len(fold) == 1 and fold[0].target == Var("sum")


@pytest.mark.criterion(9, "array-then-sum example: generated structure and byte-stable output")
def test_c9_finalize_placement(array_then_sum):
    roles = top_level_roles(array_then_sum.mpi.master_code)
    release = roles.index("release")
    printf = next(k for k, s in enumerate(array_then_sum.mpi.master_code) if isinstance(s, CallStmt))
    assert roles.index("master_block_1") < release < printf
    # the master finalizes in place of the closing `return`, after the tail code
    tail = array_then_sum.mpi.master_code[-1]
    assert tail.role == "master_return" and printf < len(roles) - 1
    assert [type(s).__name__ for s in tail.stmts[-3:]] == ["If", "MpiFinalize", "Return"]
    assert tail.stmts[-3].role == "release"


@pytest.mark.criterion(9, "array-then-sum example: generated structure and byte-stable output")
def test_c9_byte_stable(array_then_sum):
    text = print_c(array_then_sum.mpi)
    assert text == print_c(translate(corpus.source("array_then_sum"), "array_then_sum.c").mpi)
    assert text == GOLDEN.read_text()
    code = ("import sys; from omp2dm import corpus; from omp2dm.pipeline import translate;"
            "sys.stdout.write(translate(corpus.source('array_then_sum'), 'array_then_sum.c').c_source)")
    for seed in ("0", "12345"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        assert out.stdout == text
    assert program_to_json(array_then_sum.mpi) == program_to_json(translate(corpus.source("array_then_sum"), "array_then_sum.c").mpi)


# -- 10 ----------------------------------------------------------------------

def caught(program, mutated):
    for p in NPROCS:
        v = differential_check(program, mutated, p, seeds=range(3))
        if not v.equivalent:
            return f"nprocs={p}: {v.failures()[0].describe()}"
        for seed in range(3):
            try:
                problems = simulate_mpi(mutated, p, seed=seed).trace.audit()
            except Omp2dmError as exc:
                return str(exc)
            if problems:
                return problems[0]
    return None


@pytest.mark.criterion(10, "each of 20 codegen mutations caught by criterion 1 or 7")
def test_c10_mutation_sensitivity(kernels):
    assert len(MUTATIONS) == 20
    missed = []
    for m in MUTATIONS:
        how = None
        for name, tr in kernels.items():
            try:
                mutated = m(tr.mpi)
            except LookupError:
                continue
            how = caught(tr.program, mutated)
            if how:
                break
        if not how:
            missed.append(m.name)
    assert not missed, missed
