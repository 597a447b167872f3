from __future__ import annotations

from typing import Optional

import numpy as np

from mfplan.grid import GridSpec, Momentum, interp_time_to_center, interp_face_to_center
from mfplan.model import ModelSpec


def centered(grid: GridSpec, m: np.ndarray, w: Momentum) -> tuple[np.ndarray, np.ndarray]:
    return interp_time_to_center(grid, m), interp_face_to_center(grid, w)


def energy_density(
    model: ModelSpec, grid: GridSpec, m: np.ndarray, w: Momentum, *, floor: Optional[float] = None
) -> np.ndarray:
    """Per-cell L~(x,m,w) + F(x,m) at the space-time cell centers.

    Without a floor this is the exact integrand: a negative density or a flux through an empty
    cell costs +inf. With a floor, cells with m <= floor only pay F(x, m+).
    """
    coefs = model.on_grid(grid)
    m_c, w_c = centered(grid, m, w)

    if floor is None:
        out = np.full(m_c.shape, np.inf)
        valid = m_c >= 0
        safe = np.where(valid, m_c, 0.0)
        values = coefs.perspective_L(safe, w_c) + coefs.F(safe)
        out[valid] = values[valid]
        return out

    support = m_c > floor
    safe = np.maximum(m_c, 0.0)
    kinetic = coefs.perspective_L(np.where(support, safe, 0.0), np.where(support, w_c, 0.0))
    return kinetic + coefs.F(safe)


def primal_energy(
    model: ModelSpec, grid: GridSpec, m: np.ndarray, w: Momentum, *, floor: Optional[float] = None
) -> float:
    """Midpoint-rule value of the action over the space-time cylinder."""
    density = energy_density(model, grid, m, w, floor=floor)
    if not np.all(np.isfinite(density)):
        return float('inf')
    return float(np.sum(density) * grid.volume)
