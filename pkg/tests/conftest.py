"""Acceptance bookkeeping: one PASS/FAIL/SKIP line per numbered criterion."""

import pytest

_PARTS: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or (report.when == "setup" and not report.passed)):
        return
    details = [str(v) for k, v in item.user_properties if k == "detail"]
    if report.skipped:
        status = "SKIP"
        if isinstance(report.longrepr, tuple):
            details.append(str(report.longrepr[-1]))
    else:
        status = "PASS" if report.passed else "FAIL"
    _PARTS.setdefault(marker.args[0], []).append((status, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _PARTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_PARTS):
        parts = _PARTS[number]
        statuses = {s for s, _ in parts}
        # a criterion split across tests passes only if every part passes
        status = "FAIL" if "FAIL" in statuses else "SKIP" if "SKIP" in statuses else "PASS"
        detail = " | ".join(dict.fromkeys(d for _, d in parts if d))
        terminalreporter.write_line(f"criterion {number}: {status}" + (f" ({detail})" if detail else ""))
