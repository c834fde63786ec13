import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scldpcl import CodeParams, build_code  # noqa: E402


@pytest.fixture(scope="session")
def example_code():
    """The (dv=4, dc=20, t=1/4, n=1000, M=17) code used across the suite."""
    return build_code(CodeParams(dv=4, dc=20, n=1000, M=17, seed=1))


@pytest.fixture(scope="session")
def small_code():
    return build_code(CodeParams(dv=4, dc=8, n=96, M=5, seed=3))


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""
    def emit(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
