import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import gabtor as gt


@pytest.fixture(scope="session")
def grid32():
    return gt.make_grid(32, 32)


@pytest.fixture(scope="session")
def gaussian32(grid32):
    return gt.make_window("gaussian", grid32)


@pytest.fixture(scope="session")
def chi32(grid32):
    return gt.make_window("indicator", grid32)


@pytest.fixture(scope="session")
def lat_one(grid32):
    return gt.LatticeSpec(Fraction(1), grid32)


@pytest.fixture(scope="session")
def lat_half(grid32):
    return gt.LatticeSpec(Fraction(1, 2), grid32)


@pytest.fixture(scope="session")
def bounds_gauss_half(gaussian32, lat_half):
    return gt.frame_bounds(gaussian32, lat_half)


@pytest.fixture(scope="session")
def dual_gauss_half(gaussian32, lat_half, bounds_gauss_half):
    return gt.dual_window(gaussian32, lat_half, bounds=bounds_gauss_half)


@pytest.fixture(scope="session")
def tight_gauss_half(gaussian32, lat_half, bounds_gauss_half):
    return gt.tight_window(gaussian32, lat_half, bounds=bounds_gauss_half)


def random_signal(grid, rng):
    return gt.Signal(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
