import numpy as np
import pytest

from specmerge import Signal, SmoothingConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def noise_signal(rng):
    return Signal(rng.standard_normal(256), 100.0, channel_id="noise")


@pytest.fixture
def small_cfg():
    # cheap settings for unit tests; acceptance uses its own pinned configs
    return SmoothingConfig(bandwidth=32, grid_size=64)


def random_density_rows(rng, n, grid):
    """n random normalized densities on `grid`, as a 2-D array."""
    raw = np.abs(rng.standard_normal((n, grid.points.size))) + 1e-3
    return raw / (raw.sum(axis=1, keepdims=True) * grid.spacing)
