import os

# Let numba spawn several threads even on a single-CPU machine so multi-worker
# code paths really run concurrently; must be set before numba is imported.
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import numpy as np
import pytest

from parcolor import _backend


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    with _backend.using(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary -----------------------------------------------------------

ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((number, bool(passed), detail))
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
