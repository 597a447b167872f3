from __future__ import annotations

import logging

from functools import lru_cache
from typing import Any, Optional

import numpy as np

from scipy import fft

from mfplan.grid import GridSpec, boundary_mass
from mfplan.metrics.exceptions import HeatTimeError


logger = logging.getLogger(__name__)

BOUNDARY_MASS_LIMIT = 0.01


@lru_cache(maxsize=16)
def _heat_symbol(grid: GridSpec) -> np.ndarray:
    k = np.arange(grid.nx)
    ev = (np.pi * k / (2.0 * grid.R)) ** 2
    symbol = np.zeros(grid.cells)
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.nx
        symbol = symbol + ev.reshape(shape)
    symbol.flags.writeable = False
    return symbol


def heat_connector(grid: GridSpec, m: np.ndarray, t: float, *, workers: int = 1) -> np.ndarray:
    """Heat semigroup S_t m on the box with reflecting walls; conserves mass exactly."""
    if not t > 0:
        raise HeatTimeError(t)
    m = grid.check_slice(m, 'm')
    coef = fft.dctn(m, type=2, norm='ortho', workers=workers)
    coef *= np.exp(-t * _heat_symbol(grid))
    return fft.idctn(coef, type=2, norm='ortho', workers=workers)


def fisher_information(grid: GridSpec, m: np.ndarray) -> float:
    m = grid.check_slice(m, 'm')
    grads = np.gradient(m, grid.dx)
    if grid.d == 1:
        grads = [grads]
    sq = np.sum([g**2 for g in grads], axis=0)
    positive = m > 0
    return float(np.sum(np.divide(sq, m, out=np.zeros_like(m), where=positive)) * grid.cell_volume)


def _slope(times: np.ndarray, values: np.ndarray) -> float:
    keep = values > 0
    if keep.sum() < 2:
        return float('nan')
    return float(np.polyfit(np.log(times[keep]), np.log(values[keep]), 1)[0])


def resolved_times(grid: GridSpec, count: int = 9, decades: float = 1.0) -> np.ndarray:
    t_min = 2.0 * grid.dx**2
    return np.logspace(np.log10(t_min), np.log10(t_min) + decades, count)


def heat_path_estimates(
    grid: GridSpec, m: np.ndarray, p: float, times: Optional[np.ndarray] = None, *, workers: int = 1
) -> dict[str, Any]:
    """Decay of the L^p norm, Fisher information and their combination along the heat flow.

    The L^p slope is compared with -(1 - 1/p) d / 2, the Fisher information with d / (2t), the
    combined length integrand (1 + |m_t|_p^p)^(1/2) Fisher^(1/2) with -(1/2 + d (p - 1) / 4).
    Only times with less than 1% of the mass in the boundary layer enter the regressions.
    """
    m = grid.check_slice(m, 'm')
    if times is None:
        times = resolved_times(grid)
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise HeatTimeError(float(times.min()))

    lp = []
    fisher = []
    edge = []
    for t in times:
        mt = heat_connector(grid, m, float(t), workers=workers)
        lp.append(float(np.sum(np.abs(mt) ** p) * grid.cell_volume) ** (1.0 / p))
        fisher.append(fisher_information(grid, np.maximum(mt, 0.0)))
        edge.append(float(boundary_mass(grid, mt)[0]))

    lp_arr = np.array(lp)
    fisher_arr = np.array(fisher)
    edge_arr = np.array(edge)
    resolved = edge_arr < BOUNDARY_MASS_LIMIT
    if not resolved.all():
        logger.warning(f'{int((~resolved).sum())} heat times leave the resolved range (boundary mass >= 1%).')

    # Fisher information of the Gaussian with variance 2t
    bound = grid.d / (2.0 * times)
    combined = np.sqrt(1.0 + lp_arr**p) * np.sqrt(fisher_arr)

    return {
        'times': times,
        'lp_norm': lp_arr,
        'fisher': fisher_arr,
        'fisher_bound': bound,
        'fisher_ratio': fisher_arr / bound,
        'boundary_mass': edge_arr,
        'resolved': resolved,
        'lp_slope': _slope(times[resolved], lp_arr[resolved]),
        'lp_slope_expected': -(1.0 - 1.0 / p) * grid.d / 2.0,
        'combined': combined,
        'combined_slope': _slope(times[resolved], combined[resolved]),
        'combined_slope_expected': -(0.5 + grid.d * (p - 1.0) / 4.0),
    }
