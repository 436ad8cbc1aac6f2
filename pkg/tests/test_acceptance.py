"""Runs every acceptance criterion and prints one pass/fail line for each."""
import pytest

from pauli_sew.acceptance import CRITERIA, run_criterion

SLOW = {7, 8, 10, 13}


@pytest.mark.parametrize("number", [pytest.param(k, marks=pytest.mark.slow) if k in SLOW else k
                                    for k in range(1, len(CRITERIA) + 1)])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert not result.skipped, result.detail
    assert result.passed, result.line()
