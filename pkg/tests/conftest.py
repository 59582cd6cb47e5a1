import numpy as np
import pytest

from cwrm import Dataset


def random_dataset(rng, n=60, d=1, G=2, spread=4.0):
    """Loosely clustered regression data with G groups."""
    labels = rng.integers(1, G + 1, size=n)
    centers = rng.normal(scale=spread, size=(G, d))
    slopes = rng.normal(size=(G, d))
    x = centers[labels - 1] + rng.normal(size=(n, d))
    y = np.einsum("ij,ij->i", x, slopes[labels - 1]) + labels + rng.normal(scale=0.5, size=n)
    return Dataset(x, y, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
