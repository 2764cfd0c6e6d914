import numpy as np
import pytest

from screenot.noise_models import make_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(1234)


@pytest.fixture
def low_rank_pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A rank-2 signal with spikes 10 and 5 and the same signal plus Gaussian noise, 60-by-40."""
    n, p = 60, 40
    left, _ = np.linalg.qr(rng.standard_normal((n, 2)))
    right, _ = np.linalg.qr(rng.standard_normal((p, 2)))
    X = (left * np.array([10.0, 5.0])) @ right.T
    Y = X + rng.standard_normal((n, p)) / np.sqrt(n)
    return X, Y
