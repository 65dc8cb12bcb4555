import numpy as np
import pytest

from merosin.paramlab import compute_constants


@pytest.fixture(scope="session")
def constants():
    return compute_constants()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cache_env(tmp_path):
    """Environment that points the constants cache into the test's tmp dir."""
    return {"MEROSIN_CONSTANTS_CACHE": str(tmp_path / "constants.json"), "MEROSIN_THREADS": "2"}
