"""Exit-gate criteria; each test prints one PASS/FAIL line."""
import pytest

from hypb import acceptance


def report(c):
    status = "PASS" if c.passed else "FAIL"
    print(f"\ncriterion {c.id:2d} {status}: {c.name} value={c.value!r} target={c.target!r} tol={c.tolerance!r}")


@pytest.mark.parametrize("cid", sorted(acceptance.CRITERIA))
def test_criterion(cid):
    c = acceptance.CRITERIA[cid]()
    report(c)
    assert c.passed, c.detail


def test_criterion_14_determinism_and_budget():
    results, times = acceptance.reproduce_all(14)
    c = results[0]
    report(c)
    assert c.passed, c.detail
    assert sum(times.values()) < acceptance.BUDGET_SECONDS
