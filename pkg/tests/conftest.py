from __future__ import annotations

import re

import pytest

from tmkit.corpus import FIXTURES, load_fixture, load_scenario

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_acceptance: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def fixture_text():
    def read(name: str) -> str:
        return (FIXTURES / f"{name}.tm").read_text(encoding="utf-8")

    return read


@pytest.fixture
def bundle_of():
    return load_fixture


@pytest.fixture
def scenario_of():
    return load_scenario


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or "test_acceptance" not in report.nodeid:
        return
    number = int(m.group(1))
    title = m.group(2).replace("_", " ")
    ok = _acceptance.get(number, (title, True))[1]
    if report.when == "call":
        ok = ok and report.passed
    elif report.failed:
        ok = False
    _acceptance[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, ok = _acceptance[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
