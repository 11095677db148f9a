import numpy as np
import pytest


def random_symmetric(n: int, seed: int, zero_diag: bool = True) -> np.ndarray:
    """Dense symmetric matrix with i.i.d. normal entries."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    W = (A + A.T) / 2.0
    if zero_diag:
        np.fill_diagonal(W, 0.0)
    return W


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
