import numpy as np
import pytest

from safebo import Domain, Kernel


@pytest.fixture
def kernel():
    return Kernel(family="matern32", lengthscale=0.1, output_scale=1.0)


@pytest.fixture
def line_domain():
    return Domain.grid([(0.0, 1.0)], 50)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
