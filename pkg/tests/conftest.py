"""Shared fixtures: the packaged reference cell and small reusable datasets."""

from __future__ import annotations

import numpy as np
import pytest

from cellident.bench import generate_profile, generate_synthetic_dataset, one_c_current
from cellident.identify import default_box
from cellident.params import reference_cell


@pytest.fixture(scope="session")
def cell():
    """(CellParameters, cathode OCV, anode OCV) of the packaged reference cell."""
    return reference_cell()


@pytest.fixture(scope="session")
def params(cell):
    return cell[0]


@pytest.fixture(scope="session")
def ocv_pair(cell):
    return cell[1], cell[2]


@pytest.fixture(scope="session")
def box():
    return default_box()


@pytest.fixture(scope="session")
def i_1c(params):
    return one_c_current(params)


@pytest.fixture(scope="session")
def train_dataset(cell):
    """Noise-free staircase training dataset on the reference cell."""
    params, ocv_p, ocv_n = cell
    profile = generate_profile("rcid-like", 3600.0, 1.0, 0, params)
    train, _, _ = generate_synthetic_dataset(
        params, ocv_p, ocv_n, [profile], [profile], 0.0, 42)
    return train


@pytest.fixture(scope="session")
def short_dataset(cell):
    """Small noise-free dataset for tests that only need a cheap objective."""
    params, ocv_p, ocv_n = cell
    profile = generate_profile("rcid-like", 600.0, 1.0, 0, params)
    train, _, _ = generate_synthetic_dataset(
        params, ocv_p, ocv_n, [profile], [profile], 0.0, 42)
    return train


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
