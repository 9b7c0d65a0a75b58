import pytest

from omp2dm.pipeline import translate

_RESULTS: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    n, title = marker
    row = _RESULTS.setdefault(n, {"title": title, "passed": True, "ran": False})
    if report.when == "call" or report.outcome != "passed":
        row["ran"] = True
    if report.outcome == "failed":
        row["passed"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        row = _RESULTS[n]
        if not row["ran"]:
            continue
        status = "PASS" if row["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} {status}: {row['title']}")


def tr_of(text, **kw):
    return translate(text, "<test>", **kw)


@pytest.fixture
def translate_text():
    return tr_of
