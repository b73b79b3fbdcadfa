import mpmath as mp
import pytest

from gkpbreed.numerics import DEFAULT_CONTEXT, using

with mp.workprec(DEFAULT_CONTEXT.mantissa_bits):
    ROOT_PI = mp.sqrt(mp.pi)


@pytest.fixture(autouse=True)
def working_precision():
    """Every test runs its own arithmetic at the library default precision."""
    with using(DEFAULT_CONTEXT):
        yield


def rel(a, b):
    return abs(a - b) / max(abs(b), mp.mpf("1e-300"))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
