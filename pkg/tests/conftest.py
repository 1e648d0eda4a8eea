"""Shared pytest plumbing: the acceptance-criterion summary.

Tests in test_acceptance.py carry a ``criterion(num, title)`` marker; after
the run we print one PASS/FAIL line per criterion so the shipping gate is
readable at a glance without digging through the node list.  A criterion
with several test functions passes only if all of them do.
"""
from __future__ import annotations

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, title): ties a test to one numbered acceptance check",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    num, title = mark.args
    entry = _RESULTS.setdefault(num, {"title": title, "failed": [], "passed": []})
    if report.failed:
        entry["failed"].append(item.name)
    elif report.passed:
        entry["passed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_RESULTS):
        entry = _RESULTS[num]
        ok = not entry["failed"]
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {entry['title']}"
        if not ok:
            line += f"  [{', '.join(entry['failed'])}]"
        terminalreporter.write_line(line, green=ok, red=not ok)
