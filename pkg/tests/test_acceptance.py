"""The ten acceptance criteria at their stated tolerances, one line each."""

import json

import pytest

from g2surf import acceptance

NUMBERS = [n for n, _, _ in acceptance.CRITERIA]


@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(number, capsys):
    r = acceptance.run_one(number)
    with capsys.disabled():
        print("\n" + r.line())
    assert r.error is None, r.error
    for c in r.checks:
        assert c.passed(r.scale), f"{c.name}: {c.value!r} {c.op} {c.threshold!r}"
    assert r.passed


def test_report_is_deterministic():
    a = acceptance.report(acceptance.run([1, 2, 10]))
    b = acceptance.report(acceptance.run([1, 2, 10]))
    assert json.dumps(a, sort_keys=True, default=str) == json.dumps(b, sort_keys=True, default=str)
    assert a["schema_version"] == acceptance.SCHEMA_VERSION


def test_listing_covers_all_criteria():
    assert [int(s.split(".")[0]) for s in acceptance.listing()] == list(range(1, 11))
