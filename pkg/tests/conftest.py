import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "ran": False, "failures": []})
    if rep.when == "call" or rep.failed or rep.skipped:
        entry["ran"] = entry["ran"] or rep.when == "call"
        if rep.failed or rep.skipped:
            entry["passed"] = False
            entry["failures"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        c = _criteria[number]
        ok = c["passed"] and c["ran"]
        line = f"AC{number:<3}{'PASS' if ok else 'FAIL'}  {c['title']}"
        if c["failures"]:
            line += f"  (failed: {', '.join(c['failures'])})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES
