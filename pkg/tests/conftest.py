import numpy as np
import pytest

from wslab.seeding import spawn_rng


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


def spd_matrix(rng: np.random.Generator, d: int, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    """Random well-conditioned SPD matrix with eigenvalues in [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    m = q @ np.diag(rng.uniform(lo, hi, size=d)) @ q.T
    return (m + m.T) / 2.0


def stream(*key: int) -> np.random.Generator:
    return spawn_rng(20260808, *key)
