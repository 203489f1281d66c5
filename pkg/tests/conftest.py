import numpy as np
import pytest

from stochvac.geometry6 import E6Point


def random_points(rng, n, scale=2.0):
    return E6Point.from_coords(rng.uniform(-scale, scale, size=(6, n)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
