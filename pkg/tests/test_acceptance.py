"""Acceptance criteria, one test each, at their stated tolerances and time limits.

Each test records a single ``[PASS]``/``[FAIL]`` line, listed together in the
terminal summary.
"""

import pytest

from varscale.harness import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, record_criterion):
    result = run_criterion(number, seed=42)
    record_criterion(result)
    assert result.ok, result.detail
    assert result.in_time, f"{result.runtime:.2f}s exceeds {result.limit:g}s"
