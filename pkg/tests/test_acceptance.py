"""The acceptance gate: every criterion runs at its stated tolerance and
prints one pass/fail line; the suite fails if any criterion fails."""

import pytest

from ergokit import acceptance


@pytest.mark.parametrize("criterion", acceptance.ALL_CRITERIA,
                         ids=lambda fn: fn.__name__)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
