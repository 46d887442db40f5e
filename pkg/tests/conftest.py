import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "ramsat" / "fixtures"

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def published_34_text() -> str:
    return (FIXTURES / "theorem1.matrix").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def published_48_text() -> str:
    return (FIXTURES / "theorem2.matrix").read_text(encoding="utf-8")


@pytest.fixture
def external_solver() -> str:
    cmd = os.environ.get("RAMSAT_SOLVER")
    if not cmd:
        pytest.skip("no external solver configured (set RAMSAT_SOLVER)")
    return cmd


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _ACCEPTANCE[item.nodeid] = (label, status)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    # one line per criterion: any failure fails it, all-skipped skips it
    merged: dict[str, list[str]] = {}
    for label, status in _ACCEPTANCE.values():
        merged.setdefault(label, []).append(status)
    terminalreporter.section("acceptance criteria")
    for label in sorted(merged):
        statuses = merged[label]
        if "FAIL" in statuses:
            status = "FAIL"
        elif "PASS" in statuses:
            status = "PASS"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"{status:4}  {label}  ({len(statuses)} test{'s' if len(statuses) > 1 else ''})")
