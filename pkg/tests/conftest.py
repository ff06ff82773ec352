import numpy as np
import pytest

from kxsketch import kernels


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return kernels.BACKENDS[request.param]


def random_bins(rng, sparsity=0.5):
    b = rng.gamma(1.0, 10.0, size=16)
    b[rng.random(16) < sparsity] = 0.0
    if not b.any():
        b[rng.integers(16)] = rng.uniform(1, 50)
    return b


@pytest.fixture
def rng():
    return np.random.default_rng(1)
