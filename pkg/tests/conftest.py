import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_blobs(rng, n_per: int, k: int, d: int, spread: float):
    """Labeled Gaussian blobs with means drawn N(0, spread²·I)."""
    from dimbench.dataset import Dataset

    means = rng.normal(scale=spread, size=(k, d))
    pts = np.concatenate(
        [rng.normal(loc=means[c], size=(n_per, d)) for c in range(k)]
    )
    labels = np.repeat(np.arange(k), n_per)
    return Dataset(pts, labels, name=f"blobs-k{k}-d{d}")
