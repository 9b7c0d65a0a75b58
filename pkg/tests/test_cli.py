import json
import subprocess
import sys

import jsonschema
import pytest

from omp2dm import corpus
from omp2dm.analysis.report import load_schema
from omp2dm.cli import main

NONLINEAR = "int a[8];\nint main() { int i;\n#pragma omp parallel for\nfor (i = 1; i < 8; i *= 2) a[i] = i;\nreturn 0; }\n"


@pytest.fixture
def nonlinear(tmp_path):
    p = tmp_path / "nl.c"
    p.write_text(NONLINEAR)
    return p


def test_transpile_array_then_sum(tmp_path, capsys):
    out = tmp_path / "out.c"
    assert main(["transpile", corpus.path("array_then_sum"), "-o", str(out)]) == 0
    err = capsys.readouterr().err
    assert err.count("transformed") == 2
    assert "MPI_Init" in out.read_text()


def test_transpile_to_stdout(capsys):
    assert main(["transpile", corpus.path("scalar_sum")]) == 0
    assert "#include <mpi.h>" in capsys.readouterr().out


def test_fallback_non_strict(nonlinear, tmp_path, capsys):
    out = tmp_path / "nl_out.c"
    assert main(["transpile", str(nonlinear), "-o", str(out)]) == 0
    assert "fallback NonLinearIncrement" in capsys.readouterr().err
    assert out.read_text().count("NonLinearIncrement") == 1


def test_strict_rejection(nonlinear, tmp_path):
    out = tmp_path / "nl_out.c"
    assert main(["transpile", str(nonlinear), "--strict", "-o", str(out)]) == 3
    assert not out.exists()


def test_missing_input(capsys):
    assert main(["transpile", "/nonexistent/file.c"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.c"
    p.write_text("int main() { goto L; }\n")
    assert main(["transpile", str(p)]) == 2
    assert "goto" in capsys.readouterr().err


def test_verify_matrix(capsys):
    assert main(["verify", corpus.path("gemm"), "--nprocs", "2,4", "--seeds", "1,2,3"]) == 0
    out = capsys.readouterr().out
    assert out.count(": equivalent") == 6


def test_verify_mutated(capsys):
    code = main(["verify", corpus.path("array_then_sum"), "--nprocs", "3", "--seeds", "1", "--mutate", "acc_init_wrong"])
    assert code == 1
    assert "sum" in capsys.readouterr().out


def test_verify_rejects_one_process(capsys):
    assert main(["verify", corpus.path("gemm"), "--nprocs", "1"]) == 2


def test_bad_tolerance():
    assert main(["verify", corpus.path("gemm"), "--tolerance", "0"]) == 2


def test_unknown_mutation():
    assert main(["verify", corpus.path("gemm"), "--mutate", "nope"]) == 2


def test_usage_error_from_argparse():
    with pytest.raises(SystemExit) as ei:
        main(["explode"])
    assert ei.value.code == 2


def test_verify_writes_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    assert main(["verify", corpus.path("scalar_sum"), "--nprocs", "3", "--seeds", "0", "--trace", str(trace)]) == 0
    events = [json.loads(line) for line in trace.read_text().splitlines()]
    assert {e["event"] for e in events} >= {"send", "recv", "compute-chunk", "terminate"}


@pytest.mark.parametrize("name", corpus.KERNELS)
def test_dump_analysis_schema(name, tmp_path):
    out = tmp_path / "a.json"
    assert main(["dump-analysis", corpus.path(name), "-o", str(out)]) == 0
    jsonschema.validate(json.loads(out.read_text()), load_schema())


def test_transpile_with_dump(tmp_path):
    dump = tmp_path / "a.json"
    assert main(["transpile", corpus.path("array_then_sum"), "-o", str(tmp_path / "o.c"), "--dump-analysis", str(dump)]) == 0
    assert [b["status"] for b in json.loads(dump.read_text())["blocks"]] == ["transformed", "transformed"]


def test_schedule_override(capsys):
    assert main(["transpile", corpus.path("array_then_sum"), "--schedule", "static", "-o", "/dev/null"]) == 0
    assert capsys.readouterr().err.count("static") == 2


def test_corpus_report(tmp_path, capsys):
    prefix = str(tmp_path / "report")
    assert main(["corpus", "seidel2d", "syrk", "--nprocs", "2,4", "--seeds", "0,1", "-o", prefix]) == 0
    data = json.loads((tmp_path / "report.json").read_text())
    rows = {(r["kernel"], r["nprocs"]): r for r in data["rows"]}
    assert len(rows) == 4 and all(r["equivalent"] for r in rows.values())
    assert rows[("seidel2d", 2)]["fallbacks"] == ["0:ConcurrentSharedWrite"]
    assert (tmp_path / "report.txt").read_text() == capsys.readouterr().out


def test_corpus_report_deterministic(tmp_path):
    for k in range(2):
        assert main(["corpus", "array_then_sum", "--nprocs", "3", "--seeds", "0", "-o", str(tmp_path / f"r{k}")]) == 0
    assert (tmp_path / "r0.json").read_text() == (tmp_path / "r1.json").read_text()


def test_corpus_unknown_kernel():
    assert main(["corpus", "nosuch"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "omp2dm", "transpile", corpus.path("scalar_sum")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "MPI_Finalize" in proc.stdout
