from __future__ import annotations

import logging

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional, Sequence, TYPE_CHECKING

import numpy as np

from scipy.optimize import minimize_scalar

from mfplan.grid import GridSpec
from mfplan.model import kl_model
from mfplan.metrics.transport import w2_1d
from mfplan.settings import SolverConfig
from mfplan.metrics.exceptions import EmptyParameterGrid


if TYPE_CHECKING:
    from mfplan.primal import Solution


logger = logging.getLogger(__name__)

REFINE_MAX_ITERS = 12
REFINE_XATOL = 1e-2


def kl_cost(
    grid: GridSpec, m0: np.ndarray, m1: np.ndarray, a: float, p: float, config: Optional[SolverConfig] = None
) -> float:
    """Converged action of the Kantorovich-Lebesgue instance with scale a."""
    from mfplan.primal import solve_planning

    solution = solve_planning(kl_model(a, p, d=grid.d), grid, m0, m1, config)
    B = solution.history.last['B'] if solution.history.last else float('nan')
    logger.debug(f'KL cost at a={a:.6g}: {B:.8g} after {solution.iterations} iterations.')
    return float(B)


def kl_upper_bound(grid: GridSpec, m0: np.ndarray, m1: np.ndarray, a: float, p: float) -> float:
    """Cost of the path that heats m0 and un-heats into m1, bounded in closed form by the endpoints."""
    m0 = np.maximum(grid.check_slice(m0, 'm0'), 0.0)
    m1 = np.maximum(grid.check_slice(m1, 'm1'), 0.0)
    r2 = grid.radius2()
    integrand = a * r2 * (m0 + m1) + (m0**p + m1**p) / (4.0 * a)
    return 1.0 / (2.0 * a) + float(np.sum(integrand)) * grid.cell_volume


def _costs(
    grid: GridSpec,
    m0: np.ndarray,
    m1: np.ndarray,
    scales: Sequence[float],
    p: float,
    config: Optional[SolverConfig],
    threads: int,
) -> list[float]:
    # one solver object per run, so runs may share the pool
    if threads <= 1 or len(scales) == 1:
        return [kl_cost(grid, m0, m1, a, p, config) for a in scales]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda a: kl_cost(grid, m0, m1, a, p, config), scales))


def kl_distance(
    grid: GridSpec,
    m0: np.ndarray,
    m1: np.ndarray,
    a_grid: Sequence[float],
    p: float,
    config: Optional[SolverConfig] = None,
    *,
    refine=False,
    threads=1,
) -> dict[str, Any]:
    """Minimum of the KL costs over the scale grid, optionally refined between the neighbours of the best a.

    Refinement is a bounded scalar search in log a; it only ever lowers the reported value.
    """
    scales = sorted({float(a) for a in a_grid})
    if not scales:
        raise EmptyParameterGrid()
    if scales[0] <= 0:
        raise ValueError(f'Scale parameters must be positive, got {scales[0]!r}.')

    costs = dict(zip(scales, _costs(grid, m0, m1, scales, p, config, threads)))
    best = min(costs, key=lambda a: costs[a])
    value = costs[best]

    refined: Optional[dict[str, float]] = None
    if refine and len(scales) > 1:
        i = scales.index(best)
        lo = np.log(scales[max(i - 1, 0)])
        hi = np.log(scales[min(i + 1, len(scales) - 1)])
        result = minimize_scalar(
            lambda s: kl_cost(grid, m0, m1, float(np.exp(s)), p, config),
            bounds=(lo, hi),
            method='bounded',
            options={'maxiter': REFINE_MAX_ITERS, 'xatol': REFINE_XATOL},
        )
        refined = {'a': float(np.exp(result.x)), 'cost': float(result.fun), 'evaluations': int(result.nfev)}
        if result.fun < value:
            best, value = refined['a'], refined['cost']

    report: dict[str, Any] = {
        'p': p,
        'costs': {str(a): c for a, c in costs.items()},
        'd_KL': value,
        'argmin': best,
        'upper_bounds': {str(a): kl_upper_bound(grid, m0, m1, a, p) for a in scales},
        'refined': refined,
    }
    if grid.d == 1:
        report['W2'] = w2_1d(grid, m0, m1)

    logger.info(f'd_KL = {value:.8g} at a = {best:.6g} over {len(scales)} scales.')
    return report


def kl_path_length(solution: Solution, p: float) -> float:
    """int_0^1 (1 + |m_t|_p^p)^(1/2) (int |v_t|^2 m_t)^(1/2) dt along a solved path.

    Pointwise in time this is the infimum over a of the KL integrand, so it sits below every
    KL cost of the path and above its W2 length.
    """
    grid = solution.grid
    m_c = np.maximum(0.5 * (solution.m[:-1] + solution.m[1:]), 0.0)
    axes = tuple(range(1, m_c.ndim))
    speed2 = np.where(solution.mask, np.sum(solution.v * solution.v, axis=0) * m_c, 0.0)
    kinetic = np.sum(speed2, axis=axes) * grid.cell_volume
    lp_p = np.sum(m_c**p, axis=axes) * grid.cell_volume
    return float(np.sum(np.sqrt(1.0 + lp_p) * np.sqrt(kinetic)) * grid.dt)
