"""Acceptance catalog: one test per criterion, each printing a single pass/fail line.

The criteria themselves live in ``soficlab.suite`` so the same checks run from
``soficlab suite``; tolerances and time limits are fixed there.
"""
import pytest

from soficlab import suite


@pytest.mark.parametrize("number", sorted(suite.CRITERIA))
def test_criterion(number, capsys):
    result = suite.run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
