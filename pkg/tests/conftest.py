import numpy as np
import pytest

from plsauth.coding import builtin_code


@pytest.fixture(scope="session")
def polar512():
    return builtin_code("polar_512_267")


@pytest.fixture(scope="session")
def ldpc512():
    return builtin_code("ldpc_3_6_512")


@pytest.fixture(scope="session")
def bch511():
    return builtin_code("bch_511_259_30")


@pytest.fixture(scope="session")
def bch15():
    return builtin_code("bch_15_7_2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one line per criterion, printed after the run ----------------

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)``; the summary is printed at session end."""

    def record(number, passed, detail):
        ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
