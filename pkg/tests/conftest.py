from pathlib import Path

import numpy as np
import pytest

from cbpt import Dataset, load_csv

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def glass():
    return load_csv(DATA_DIR / "glass.csv", "class")


@pytest.fixture(scope="session")
def statlog():
    return load_csv(DATA_DIR / "statlog.csv", "class")


@pytest.fixture
def blobs():
    """Two well-separated clusters: linearly separable binary data."""
    rng = np.random.default_rng(42)
    X = np.concatenate([rng.normal(-3, 0.3, (20, 2)), rng.normal(3, 0.3, (20, 2))])
    y = np.concatenate([np.zeros(20, dtype=int), np.ones(20, dtype=int)])
    return X, y


@pytest.fixture
def blob_dataset(blobs):
    X, y = blobs
    return Dataset(X, y, ("a", "b"), ("neg", "pos"))


def make_noisy_grid(n=50, n_classes=3, seed=5):
    """Small integer-grid features with contradictory duplicates so full
    trees keep a positive training error (boosting never converges early)."""
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 3, size=(n, 2)).astype(float)
    y = rng.integers(0, n_classes, size=n).astype(np.int64)
    # ensure all classes present
    y[:n_classes] = np.arange(n_classes)
    return X, y
