import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from models.point_sets import (  # noqa: E402
    checkerboard, example31, example32, fibonacci_set, singleton_origin, toeplitz_set,
)
from models.window import Window  # noqa: E402


@pytest.fixture(scope="session")
def ex31():
    return example31()


@pytest.fixture(scope="session")
def ex32():
    return example32()


@pytest.fixture(scope="session")
def board():
    return checkerboard()


@pytest.fixture(scope="session")
def origin():
    return singleton_origin(2)


@pytest.fixture(scope="session")
def fib():
    return fibonacci_set(2)


@pytest.fixture(scope="session")
def toeplitz():
    return toeplitz_set()


@pytest.fixture
def square20():
    return Window.centered(20, 2)
