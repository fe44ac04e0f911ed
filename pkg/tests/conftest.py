from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# -- acceptance reporting ------------------------------------------------------------
#
# Tests marked ``acceptance(n, limit)`` fail when their call phase exceeds ``limit``
# seconds, and one PASS/FAIL line per criterion is printed at the end of the run.

_ACCEPTANCE: dict[int, list[tuple[str, bool, float, float]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, limit): acceptance criterion with a time limit in seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    number, limit = mark.args
    if rep.passed and call.duration > limit:
        rep.outcome = "failed"
        rep.longrepr = f"criterion {number} took {call.duration:.1f} s, limit {limit} s"
    _ACCEPTANCE.setdefault(number, []).append((item.name, rep.passed, call.duration, limit))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        runs = _ACCEPTANCE[number]
        ok = all(p for _, p, _, _ in runs)
        took = sum(d for _, _, d, _ in runs)
        names = ", ".join(n for n, _, _, _ in runs)
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  ({took:.2f} s; limit {runs[0][3]} s each)  [{names}]"
        )
