"""Acceptance gate: every numbered criterion at its stated tolerance.

The criteria live in spinbath.acceptance (also behind ``spinbath check``);
this module runs each one through pytest and prints its pass/fail line.
Expensive shared artifacts are cached on a session-scoped context, so the
whole gate costs a few minutes of CPU.
"""

import pytest

from spinbath import acceptance


@pytest.fixture(scope="session")
def ctx():
    return acceptance.Context()


@pytest.mark.parametrize("criterion", acceptance.CRITERIA,
                         ids=[f"criterion_{k}" for k in range(1, 10)])
def test_criterion(ctx, criterion):
    result = criterion(ctx)
    print(result.line())
    assert result.passed, result.line()
