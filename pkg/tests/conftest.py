import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from simulation.dgp import DgpConfig, generate_dataset  # noqa: E402
from utils.model import Dataset, Priors  # noqa: E402
from utils.randkit import RngStream  # noqa: E402


@pytest.fixture
def rng():
    return RngStream(seed=20240611, stream_id=7)


@pytest.fixture
def small_data():
    cfg = DgpConfig(n=80, d=6, theta0=0.5, seed=11)
    return generate_dataset(cfg, RngStream(cfg.seed, 0))


@pytest.fixture
def small_priors(small_data):
    return Priors.default(small_data.n, small_data.d)


@pytest.fixture
def categorical_data():
    gen = np.random.default_rng(5)
    n, d = 90, 3
    z = gen.standard_normal((n, d))
    x = np.arange(n) % 3
    eta = 0.4 * (x == 1) - 0.6 * (x == 2) + z @ np.array([0.5, -0.5, 0.0])
    y = (gen.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return Dataset(y=y, x=x, z=z)
