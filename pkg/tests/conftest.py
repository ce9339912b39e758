import numpy as np
import pytest

# criterion lines recorded by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def record_criterion():
    def record(result):
        ACCEPTANCE_LINES[result.number] = result.line()
        print(result.line())

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
