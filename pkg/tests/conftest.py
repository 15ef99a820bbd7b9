import mpmath
import pytest


@pytest.fixture(autouse=True)
def _work_precision():
    with mpmath.workdps(60):
        yield


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
    passed = sum(" PASS " in line for line in results.values())
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
