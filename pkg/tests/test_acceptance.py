"""Acceptance suite: every criterion runs at its pinned tolerance.

One test per criterion; each prints its PASS/FAIL line so a verbose run
reads as the acceptance report.  The same checks back the CLI ``verify``
subcommand.
"""

import pytest

from thermocontact.verify import CRITERIA, run_all


@pytest.mark.parametrize(
    "criterion", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))]
)
def test_acceptance_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()


def test_runner_rejects_out_of_range_indices():
    with pytest.raises(ValueError):
        run_all([0])
    with pytest.raises(ValueError):
        run_all([len(CRITERIA) + 1])


def test_runner_subset_order():
    results = run_all([2, 1])
    assert [r.index for r in results] == [2, 1]
