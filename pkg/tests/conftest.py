import numpy as np
import pytest

# criterion id -> list of (sub-check name, passed, measured)
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def measured(record_property):
    """Attach a human-readable measurement to the acceptance summary line."""
    def record(text):
        record_property("measured", text)
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, part = marker.args[0], marker.kwargs.get("part", "")
        measured = "; ".join(v for k, v in item.user_properties if k == "measured")
        ACCEPTANCE.setdefault(number, []).append((part, report.passed, measured))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        details = []
        for part, ok, measured in parts:
            label = f"{part} " if part else ""
            details.append(f"{label}{'PASS' if ok else 'FAIL'}" + (f" [{measured}]" if measured else ""))
        terminalreporter.write_line(f"criterion {number:2d}: {status} -- " + " | ".join(details))
