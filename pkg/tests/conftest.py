import numpy as np
import pytest

from mfplan.cli import generate
from mfplan.grid import GridSpec
from mfplan.model import ModelSpec
from mfplan.primal import Solution


@pytest.fixture
def grid1() -> GridSpec:
    return GridSpec(1, 8, 16, 2.0)


@pytest.fixture
def grid2() -> GridSpec:
    return GridSpec(2, 4, 8, 2.0)


@pytest.fixture
def uniform1(grid1: GridSpec) -> np.ndarray:
    return np.full(grid1.cells, 0.25)


@pytest.fixture
def gaussians1(grid1: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    m0 = generate('gaussian', grid1, {'center': -0.5, 'sigma': 0.3})
    m1 = generate('gaussian', grid1, {'center': 0.5, 'sigma': 0.3})
    return m0, m1


@pytest.fixture
def quadratic() -> ModelSpec:
    """H = |p|^2 / 2 and F = m^2 / 2."""
    return ModelSpec(2.0)


@pytest.fixture
def stationary(grid1: GridSpec, uniform1: np.ndarray, quadratic: ModelSpec) -> Solution:
    """The exact optimum joining the uniform density to itself, with its value function."""
    m = np.broadcast_to(uniform1, grid1.density_shape)
    tc = grid1.time_centers.reshape(-1, 1)
    u = np.broadcast_to(0.25 * (1.0 - tc), grid1.scalar_shape)
    return Solution(
        model=quadratic,
        grid=grid1,
        m0=uniform1,
        m1=uniform1,
        m=m,
        w=grid1.zeros_momentum(),
        u=u,
        alpha=np.full(grid1.scalar_shape, 0.25),
        density_floor=1e-10,
    )


@pytest.fixture
def home(tmp_path, monkeypatch):
    path = tmp_path / 'home'
    monkeypatch.setenv('MFPLAN_HOME', str(path))
    return path
