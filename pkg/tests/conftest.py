import numpy as np
import pytest

from roughevo.rough_path import TimeGrid, lift, sample_fbm
from roughevo.scale_model import ScaleModel, make_operator
from roughevo.solver import SolverConfig, default_psi, euler_solve

ETA, ALPHA = 0.38, 0.25


@pytest.fixture(scope="session")
def model():
    return ScaleModel(16)


@pytest.fixture(scope="session")
def G_sin(model):
    return make_operator(model, "collocation", "sin")


@pytest.fixture(scope="session")
def G_diag(model):
    return make_operator(model, "diagonal", "decay")


@pytest.fixture(scope="session")
def fbm():
    return sample_fbm(0.4, TimeGrid(1.0, 4096), 42)


@pytest.fixture(scope="session")
def fbm_small():
    return sample_fbm(0.4, TimeGrid(1.0, 512), 42)


@pytest.fixture(scope="session")
def cfg(model, G_sin, fbm):
    return SolverConfig(ETA, ALPHA, lift(fbm), model, G_sin)


@pytest.fixture(scope="session")
def cfg_small(model, G_sin, fbm_small):
    return SolverConfig(ETA, ALPHA, lift(fbm_small), model, G_sin)


@pytest.fixture(scope="session")
def psi(model):
    return default_psi(model)


@pytest.fixture(scope="session")
def solution(cfg, psi):
    return euler_solve(psi, cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
