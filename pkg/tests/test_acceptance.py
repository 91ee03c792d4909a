"""The ten acceptance criteria, each at its stated tolerance and time budget."""
import pytest

from xideform.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, report_line):
    result = run_criterion(number)
    report_line(result.line())
    assert result.passed, result.detail
