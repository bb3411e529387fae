from __future__ import annotations

import pytest

from hofsearch import parse
from hofsearch.recurrence import (
    CONOLLY,
    CONWAY,
    HOFSTADTER_Q,
    HOFSTADTER_V,
    THREE_TERM_R,
)


@pytest.fixture(scope="session")
def q_rec():
    return parse(HOFSTADTER_Q)


@pytest.fixture(scope="session")
def r_rec():
    return parse(THREE_TERM_R)


@pytest.fixture(scope="session")
def conway_rec():
    return parse(CONWAY)


@pytest.fixture(scope="session")
def conolly_rec():
    return parse(CONOLLY)


@pytest.fixture(scope="session")
def v_rec():
    return parse(HOFSTADTER_V)


def fibonacci(n: int) -> int:
    """Independent Fibonacci oracle, F(1) = F(2) = 1."""
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a
