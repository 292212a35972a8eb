import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): names the acceptance criterion a test realizes"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when in ("setup", "call"):
        report.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = {}
    order = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL"), ("skipped", "SKIP")):
        for rep in terminalreporter.stats.get(status, []):
            if status == "passed" and rep.when != "call":
                continue
            for key, value in getattr(rep, "user_properties", []):
                if key != "criterion":
                    continue
                note = ""
                if status == "skipped" and rep.longrepr:
                    note = f"  ({rep.longrepr[2].split(':', 1)[-1].strip()})"
                if value not in rows:
                    order.append(value)
                rows[value] = f"{label}  {value}{note}"
    if rows:
        terminalreporter.section("acceptance criteria")
        for value in order:
            terminalreporter.write_line(rows[value])
