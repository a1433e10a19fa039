import os
from pathlib import Path

import numpy as np
import pytest

from _oracles import blobs, dense_dataset

ROOT = Path(__file__).resolve().parents[1]
A9A_DIR = Path(os.environ.get("LPDSVM_A9A_DIR", ROOT / "data"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy3():
    """Three well separated 2-d clusters, 20 points each."""
    X, y = blobs(20, [(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)], 0.4, seed=7)
    return dense_dataset(X, y)


@pytest.fixture(scope="session")
def a9a_paths():
    train, test = A9A_DIR / "a9a", A9A_DIR / "a9a.t"
    if not (train.exists() and test.exists()):
        pytest.skip(f"a9a not found in {A9A_DIR}")
    return train, test
