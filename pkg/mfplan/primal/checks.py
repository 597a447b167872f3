from __future__ import annotations

import logging

from typing import Any, TYPE_CHECKING

import numpy as np

from mfplan.grid import GridSpec, Momentum
from mfplan.primal.energy import centered, primal_energy


if TYPE_CHECKING:
    from mfplan.model import ModelSpec
    from mfplan.primal.solution import Solution


logger = logging.getLogger(__name__)

HOLDER_TOLERANCE = 1e-12
METRIC_SPEED_SLACK = 0.05


def recover_velocity(grid: GridSpec, m: np.ndarray, w: Momentum, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """v = w / m on the cells where the centered density exceeds delta, zero on the masked rest."""
    if delta < 0:
        raise ValueError(f'The density floor must be nonnegative, got {delta!r}.')
    m_c, w_c = centered(grid, m, w)
    mask = m_c > delta
    safe = np.where(mask, m_c, 1.0)
    v = np.where(mask, w_c / safe, 0.0)
    return v, mask


def _root_moments(grid: GridSpec, m: np.ndarray) -> np.ndarray:
    r2 = grid.radius2()
    axes = tuple(range(1, m.ndim))
    return np.sqrt(np.sum(r2 * np.maximum(m, 0.0), axis=axes) * grid.cell_volume)


def apriori_check(model: ModelSpec, solution: Solution) -> dict[str, Any]:
    """Energy and moment estimates of a solved flow, with the bounds they must respect.

    Reports int(|v|^2 m + m^p), the L^(2p/(p+1)) norm of the flux against its Holder bound,
    the root second moment M(t) on every time node against the moment bound built from the
    instance constants, the energy bound E, and the metric speed |dM/dt| against the kinetic
    speed of each time step. Nothing is raised; failed bounds are listed under `violations`.
    """
    grid = solution.grid
    p = model.p
    q = model.q
    m_c = np.maximum(centered(grid, solution.m, solution.w)[0], 0.0)
    v = solution.v
    mask = solution.mask

    speed2 = np.where(mask, np.sum(v * v, axis=0) * m_c, 0.0)
    kinetic = float(np.sum(speed2)) * grid.volume
    lp_p = float(np.sum(m_c**p)) * grid.volume
    energy = kinetic + lp_p

    r = 2.0 * p / (p + 1.0)
    flux = np.where(mask, np.sqrt(np.sum(v * v, axis=0)) * m_c, 0.0)
    flux_norm = (float(np.sum(flux**r)) * grid.volume) ** (1.0 / r)
    holder_rhs = lp_p ** (1.0 / (2.0 * p)) * np.sqrt(kinetic)

    moments = _root_moments(grid, np.asarray(solution.m))
    M0 = float(_root_moments(grid, np.asarray(solution.m0)[None])[0]) ** 2
    M1 = float(_root_moments(grid, np.asarray(solution.m1)[None])[0]) ** 2

    B = primal_energy(model, grid, solution.m, solution.w, floor=solution.density_floor)
    coefs = model.on_grid(grid, time_axis=False)
    C_f = (float(np.sum(np.abs(np.broadcast_to(coefs.V_f, grid.cells)) ** q)) * grid.cell_volume) ** (1.0 / q)
    C_F = (2.0 * model.c_f * C_f) ** q / q
    C3 = C_F + 0.5 * model.c_H_plus**2
    moment_bound = 1.0 + np.e * np.sqrt(M0 + M1 + 2.0 * model.c_H * (C3 + B))
    c = 2.0 * max(model.c_H, p * model.c_f**p)
    energy_bound = c * (B + C_F + model.c_H_plus * moment_bound)

    slice_speed = np.sqrt(np.sum(speed2, axis=tuple(range(1, speed2.ndim))) * grid.cell_volume)
    moment_rate = np.abs(np.diff(moments)) / grid.dt
    speed_excess = moment_rate - slice_speed * (1.0 + METRIC_SPEED_SLACK)

    violations = []
    if not (np.isfinite(energy) and np.isfinite(B)):
        violations.append('finiteness')
    if flux_norm > holder_rhs * (1.0 + HOLDER_TOLERANCE) + HOLDER_TOLERANCE:
        violations.append('holder')
    if np.any(1.0 + moments > moment_bound):
        violations.append('moment_bound')
    if energy > energy_bound:
        violations.append('energy_bound')
    if np.any(speed_excess > HOLDER_TOLERANCE):
        violations.append('metric_speed')

    if violations:
        logger.warning(f'A-priori estimates violated: {", ".join(violations)}.')

    return {
        'kinetic': kinetic,
        'lp_energy': lp_p,
        'energy': energy,
        'flux_norm': flux_norm,
        'flux_exponent': r,
        'holder_bound': float(holder_rhs),
        'moments': moments,
        'moment_bound': float(moment_bound),
        'endpoint_moments': (M0, M1),
        'B': B,
        'C_f': C_f,
        'C_F': C_F,
        'energy_bound': float(energy_bound),
        'moment_rate': moment_rate,
        'kinetic_speed': slice_speed,
        'violations': violations,
        'passed': not violations,
    }
