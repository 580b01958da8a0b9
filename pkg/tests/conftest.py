import random

import pytest

from twogen.perm import Permutation


@pytest.fixture
def rng():
    return random.Random(12345)


def perm(text, n=None):
    return Permutation.parse(text, n)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, passed, detail):
        _ACCEPTANCE.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
