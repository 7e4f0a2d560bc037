import numpy as np
import pytest

from sequences import natural_image


@pytest.fixture(scope="session")
def camera_416x240():
    return natural_image()


@pytest.fixture
def rng():
    return np.random.default_rng(20201)
