from __future__ import annotations

import logging

from typing import Any, Optional, TYPE_CHECKING

import numpy as np

from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from mfplan.grid import GridSpec
from mfplan.lagrangian.particles import sample_particles
from mfplan.lagrangian.tracing import Ensemble, FlowField, path_integrand, trace_ensemble
from mfplan.metrics import w1_samples


if TYPE_CHECKING:
    from mfplan.primal import Solution


logger = logging.getLogger(__name__)

CHECKPOINTS = (0.25, 0.5, 0.75, 1.0)
BUMP_MODES = 3
PLAN_BINS_2D = 8


def density_at(solution: Solution, t: float) -> np.ndarray:
    s = t * solution.grid.nt
    k = min(int(np.floor(s)), solution.grid.nt - 1)
    frac = s - k
    return (1.0 - frac) * solution.m[k] + frac * solution.m[k + 1]


def _on_slice(grid: GridSpec, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    axes = tuple([grid.centers] * grid.d)
    points = np.clip(x.T, grid.centers[0], grid.centers[-1])
    return RegularGridInterpolator(axes, values)(points)


def _discrepancy(grid: GridSpec, x: np.ndarray, m: np.ndarray) -> float:
    m = np.maximum(m, 0.0)
    if grid.d == 1:
        return w1_samples(grid, x[0], m)
    counts = np.histogramdd(x.T, bins=[grid.faces] * grid.d)[0] / x.shape[1]
    return float(np.sum(np.abs(counts - m / np.sum(m))))


def _kinetic(solution: Solution) -> float:
    m_c = np.maximum(0.5 * (solution.m[:-1] + solution.m[1:]), 0.0)
    speed2 = np.where(solution.mask, np.sum(solution.v * solution.v, axis=0) * m_c, 0.0)
    return float(np.sum(speed2)) * solution.grid.volume


def verify_superposition(
    solution: Solution, n: int, seed: int, *, steps: Optional[int] = None, ensemble: Optional[Ensemble] = None
) -> dict[str, Any]:
    """Compare the traced particle cloud with the solved density at t = 1/4, 1/2, 3/4 and 1.

    The distance is W1 in d = 1 and the L1 distance of the cell histograms in d = 2; the sampling
    baseline is diam / sqrt(n). The report also carries the energy identity (mean particle energy
    against the kinetic energy of the flow) and the duality bridge (mean path cost against the
    difference of the potential integrals).
    """
    from mfplan.dual import time_traces

    grid = solution.grid
    if ensemble is None:
        steps = 4 * int(np.ceil((steps or 4 * grid.nt) / 4))
        ensemble = trace_ensemble(sample_particles(grid, solution.m0, n, seed), solution, steps)
    steps = ensemble.times.size - 1
    n = len(ensemble)

    discrepancy = {}
    for t in CHECKPOINTS:
        k = int(round(t * steps))
        m_t = density_at(solution, float(ensemble.times[k]))
        discrepancy[str(t)] = _discrepancy(grid, ensemble.positions[k], m_t)

    baseline = grid.diameter / np.sqrt(n)
    kinetic = _kinetic(solution)
    mean_energy = float(np.mean(ensemble.energy))
    u0, u1 = time_traces(solution.u)
    potentials = float(np.sum(u0 * solution.m0) - np.sum(u1 * solution.m1)) * grid.cell_volume
    mean_cost = float(np.mean(ensemble.path_cost))

    report = {
        'particles': n,
        'seed': seed,
        'steps': steps,
        'baseline': baseline,
        'tolerance': 3.0 * (grid.dx + baseline),
        'discrepancy': discrepancy,
        'energy_identity': {'mean_energy': mean_energy, 'kinetic': kinetic, 'difference': mean_energy - kinetic},
        'duality_bridge': {
            'mean_path_cost': mean_cost,
            'potential_difference': potentials,
            'difference': mean_cost - potentials,
        },
        'ensemble': ensemble.summary(),
    }
    logger.info(f'Superposition check over {n} particles: final discrepancy {discrepancy["1.0"]:.4g}.')
    return report


def _discrete_cost(field: FlowField, times: np.ndarray, x: np.ndarray) -> np.ndarray:
    xdot = np.gradient(x, times, axis=0)
    return trapezoid(path_integrand(field, times, x, xdot), times, axis=0)


def path_optimality_check(
    solution: Solution,
    ensemble: Ensemble,
    *,
    bumps=20,
    seed=0,
    max_paths=200,
    tolerance=1e-2,
) -> dict[str, Any]:
    """Residual of the potential identity along traced paths, and a local minimality test.

    r = path_cost - [u(0, start) - u(1, end)] should vanish along characteristics. Each checked
    path is pushed by `bumps` random smooth bumps vanishing at both ends; a perturbed discrete
    cost below the traced one by more than `tolerance` (relative) counts as a violation.
    Paths flagged low-confidence are left out of every aggregate.
    """
    from mfplan.dual import time_traces

    grid = solution.grid
    u0, u1 = time_traces(solution.u)
    residual = ensemble.path_cost - (_on_slice(grid, u0, ensemble.starts) - _on_slice(grid, u1, ensemble.ends))
    keep = ~ensemble.low_confidence

    if keep.any():
        median, p95 = (float(v) for v in np.percentile(np.abs(residual[keep]), [50, 95]))
    else:
        median = p95 = float('nan')

    field = FlowField.from_solution(solution)
    rng = np.random.default_rng(seed)
    index = np.flatnonzero(keep)[:max_paths]
    times = ensemble.times
    paths = ensemble.positions[:, :, index]
    violations = 0
    min_excess = float('inf')

    if index.size:
        base = _discrete_cost(field, times, paths)
        allowed = tolerance * np.maximum(1.0, np.abs(base))
        for _ in range(bumps):
            mode = rng.integers(1, BUMP_MODES + 1, size=index.size)
            amplitude = rng.uniform(0.5, 2.0, size=index.size) * grid.dx
            direction = rng.standard_normal((grid.d, index.size))
            direction /= np.linalg.norm(direction, axis=0)
            shape = np.sin(np.pi * np.outer(times, mode))
            moved = np.clip(paths + shape[:, None, :] * amplitude * direction, -grid.R, grid.R)
            excess = _discrete_cost(field, times, moved) - base
            violations += int(np.sum(excess < -allowed))
            min_excess = min(min_excess, float(np.min(excess)))

    if violations:
        logger.warning(f'{violations} perturbed paths undercut the traced cost.')

    return {
        'residuals': residual,
        'included': int(keep.sum()),
        'excluded': int((~keep).sum()),
        'median_abs_residual': median,
        'p95_abs_residual': p95,
        'perturbation': {
            'paths': int(index.size),
            'bumps': bumps,
            'tolerance': tolerance,
            'violations': violations,
            'min_excess': min_excess if index.size else None,
        },
    }


def transport_plan_summary(ensemble: Ensemble, grid: GridSpec, *, bins: Optional[int] = None) -> dict[str, Any]:
    """Empirical plan of (start, end) pairs: joint histogram, marginals and displacement moments."""
    n = len(ensemble)
    if grid.d == 1:
        edges = grid.faces if bins is None else np.linspace(-grid.R, grid.R, bins + 1)
        plan = np.histogram2d(ensemble.starts[0], ensemble.ends[0], bins=[edges, edges])[0] / n
    else:
        edges = np.linspace(-grid.R, grid.R, (bins or PLAN_BINS_2D) + 1)
        pairs = np.concatenate([ensemble.starts, ensemble.ends]).T
        plan = np.histogramdd(pairs, bins=[edges] * (2 * grid.d))[0] / n

    start_axes = tuple(range(grid.d))
    end_axes = tuple(range(grid.d, 2 * grid.d))
    displacement = ensemble.ends - ensemble.starts
    return {
        'edges': edges,
        'plan': plan,
        'marginal0': plan.sum(axis=end_axes),
        'marginal1': plan.sum(axis=start_axes),
        'mean_displacement': displacement.mean(axis=1),
        'std_displacement': displacement.std(axis=1),
    }
