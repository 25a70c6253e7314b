"""Acceptance suite: one test per criterion at its stated tolerance.

Each test prints a ``[PASS]`` or ``[FAIL]`` line; the lines are also collected
and repeated in the pytest terminal summary.  Run this file directly with
``python3 tests/test_acceptance.py`` to print only the summary lines.
"""

import sys

import pytest

from qetprep.verify import CHECKS

RESULTS = {}


def _describe(result):
    lines = [result.line()]
    for item in result.details:
        mark = "ok" if item["passed"] else "FAILED"
        lines.append(f"    {mark}: {item['label']} = {item['value']} (limit {item['limit']})")
    return "\n".join(lines)


@pytest.mark.parametrize("criterion", sorted(CHECKS), ids=lambda c: f"criterion_{c}")
def test_acceptance_criterion(criterion):
    result = CHECKS[criterion]()
    RESULTS[criterion] = result
    print(result.line())
    assert result.passed, _describe(result)


if __name__ == "__main__":
    outcome = [CHECKS[c]() for c in sorted(CHECKS)]
    for r in outcome:
        print(r.line())
    sys.exit(0 if all(r.passed for r in outcome) else 1)
