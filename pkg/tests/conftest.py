import numpy as np
import pytest

from crossflux.spectral import Field, TorusGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


@pytest.fixture
def grid32():
    return TorusGrid(1, 32)


@pytest.fixture
def grid64():
    return TorusGrid(1, 64)


@pytest.fixture
def grid2d():
    return TorusGrid(2, 16)


@pytest.fixture
def cosine():
    def make(grid, mean=0.0, amp=1.0, mode=1, axis=0):
        x = grid.coords(axis)
        return Field(grid, mean + amp * np.cos(2.0 * np.pi * mode * x))

    return make
