"""Shared fixtures: small generated series with known provenance."""

import numpy as np
import pytest

import fwf


@pytest.fixture(scope="session")
def mg_series():
    """Short Mackey-Glass series at the benchmark sampling period (6)."""
    return fwf.generate_mackey_glass(600, dt=0.1, subsample=60)


@pytest.fixture(scope="session")
def mg_dataset(mg_series):
    return fwf.embed(mg_series, 7, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
