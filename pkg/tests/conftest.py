import numpy as np
import pytest
from hypothesis import settings

from parahyp.harness import random_field
from parahyp.spectral import GridSpec

settings.register_profile("desk", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("desk")


@pytest.fixture
def grid256():
    return GridSpec(1, 256)


@pytest.fixture
def grid64():
    return GridSpec(1, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def smooth(grid, seed, decay=4.0, scale=1.0, components=1):
    return random_field(grid, np.random.default_rng(seed), decay, components=components, scale=scale)
