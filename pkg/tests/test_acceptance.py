"""Acceptance criteria, one test each, at the desk budget.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are also collected
and repeated in the terminal summary.  Run this file directly for the
lines alone: ``python tests/test_acceptance.py``.
"""
import os
import sys

import pytest

from rosenlab import acceptance

SEED = 42


@pytest.fixture(scope="module")
def ctx():
    return acceptance.make_context(SEED, "desk", threads=os.cpu_count() or 1)


@pytest.mark.parametrize("cid", sorted(acceptance.CRITERIA))
def test_criterion(ctx, acceptance_lines, cid):
    r = acceptance.run_criterion(cid, ctx)
    line = r.line() + (f"  error: {r.error}" if r.error else "")
    acceptance_lines.append(line)
    print(line)
    assert r.passed, f"{line}\n{r.detail}"


if __name__ == "__main__":
    results = acceptance.run_all(SEED, "desk", os.cpu_count() or 1,
                                 report=lambda r: print(r.line(), flush=True))
    sys.exit(0 if all(r.passed for r in results) else 1)
