import pytest

from ifmsim import build_space, square_layout, with_obstruction


@pytest.fixture
def square():
    return square_layout()


@pytest.fixture
def bomb_layout(square):
    return with_obstruction(square, "lower")


@pytest.fixture(scope="session")
def two_mode_space():
    # n_max = 6 keeps every check far from the truncation edge but cheap
    return build_space(("p", "q"), 6)
