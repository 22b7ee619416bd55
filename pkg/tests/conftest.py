import numpy as np
import pytest
from hypothesis import settings

from randcvx.prob_core import make_space, uniform_space

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_acceptance():
    """Record one PASS/FAIL line for the terminal summary and print it."""

    def rec(label: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return rec


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def space4():
    """Four equally likely points, singleton E-atoms, F-atoms {0,1} and {2,3}."""
    return make_space([0.25] * 4, [[0], [1], [2], [3]], [[0, 1], [2, 3]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def uniform22():
    return uniform_space([2, 2])
