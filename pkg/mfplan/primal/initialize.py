from __future__ import annotations

import logging

import numpy as np

from mfplan.grid import GridSpec, Momentum, project_continuity
from mfplan.primal.exceptions import UnsupportedStrategy


logger = logging.getLogger(__name__)


def _linear_blend(grid: GridSpec, m0: np.ndarray, m1: np.ndarray) -> tuple[np.ndarray, Momentum]:
    t = grid.time_nodes.reshape(-1, *([1] * grid.d))
    return (1.0 - t) * m0 + t * m1, grid.zeros_momentum()


def _displacement(grid: GridSpec, m0: np.ndarray, m1: np.ndarray) -> tuple[np.ndarray, Momentum]:
    if grid.d != 1:
        raise UnsupportedStrategy('displacement', 'quantile maps exist only for d = 1.')

    from mfplan.metrics.transport import displacement_interpolation_1d

    m = np.stack([displacement_interpolation_1d(grid, m0, m1, float(t)) for t in grid.time_nodes])
    return m, grid.zeros_momentum()


def _face_gradient(grid: GridSpec, s: np.ndarray) -> Momentum:
    """Gradient of a cell field at the interior faces, zero on the walls."""
    out = []
    for i in range(grid.d):
        ax = 1 + i
        shape = list(s.shape)
        shape[ax] += 1
        g = np.zeros(shape)
        inner = [slice(None)] * s.ndim
        inner[ax] = slice(1, grid.nx)
        g[tuple(inner)] = np.diff(s, axis=ax) / grid.dx
        out.append(g)
    return tuple(out)


def _heat_connector(
    grid: GridSpec, m0: np.ndarray, m1: np.ndarray, heat_time: float, workers: int
) -> tuple[np.ndarray, Momentum]:
    """Heat m0 on [0, 1/3], blend the smoothed endpoints on [1/3, 2/3], un-heat towards m1 on [2/3, 1].

    On the heat phases the flux is -3h Dm (forward) and +3h Dm (backward), h the total heat time.
    """
    from mfplan.metrics.heat import heat_connector

    def smooth(m: np.ndarray, s: float) -> np.ndarray:
        return m.copy() if s <= 0 else heat_connector(grid, m, s, workers=workers)

    h = heat_time
    m0_h = smooth(m0, h)
    m1_h = smooth(m1, h)

    nodes = []
    for t in grid.time_nodes:
        if t <= 1.0 / 3.0:
            nodes.append(smooth(m0, 3.0 * t * h))
        elif t < 2.0 / 3.0:
            s = 3.0 * t - 1.0
            nodes.append((1.0 - s) * m0_h + s * m1_h)
        else:
            nodes.append(smooth(m1, 3.0 * (1.0 - t) * h))
    m = np.stack(nodes)

    m_c = 0.5 * (m[:-1] + m[1:])
    grads = _face_gradient(grid, m_c)
    tc = grid.time_centers.reshape(-1, *([1] * grid.d))
    factor = np.where(tc < 1.0 / 3.0, -3.0 * h, np.where(tc > 2.0 / 3.0, 3.0 * h, 0.0))
    w = tuple(factor * g for g in grads)
    return m, w


def initialize_flow(
    grid: GridSpec,
    strategy: str,
    m0: np.ndarray,
    m1: np.ndarray,
    *,
    heat_time: float = 0.05,
    workers: int = 1,
) -> tuple[np.ndarray, Momentum]:
    """A feasible starting flow joining m0 to m1."""
    m0 = grid.check_slice(m0, 'm0')
    m1 = grid.check_slice(m1, 'm1')

    if strategy == 'linear-blend':
        m, w = _linear_blend(grid, m0, m1)
    elif strategy == 'displacement':
        m, w = _displacement(grid, m0, m1)
    elif strategy == 'heat-connector':
        m, w = _heat_connector(grid, m0, m1, heat_time, workers)
    else:
        raise UnsupportedStrategy(strategy, 'unknown strategy.')

    logger.debug(f'Initial flow built with the "{strategy}" strategy.')
    return project_continuity(grid, m, w, m0, m1, workers=workers)  # type: ignore
