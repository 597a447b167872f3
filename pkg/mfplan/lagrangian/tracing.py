from __future__ import annotations

import logging

from typing import Any, Optional, Union, TYPE_CHECKING

import numpy as np

from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import RegularGridInterpolator

from mfplan.grid import GridSpec
from mfplan.model import ModelSpec, positivity_check


if TYPE_CHECKING:
    from mfplan.primal import Solution


logger = logging.getLogger(__name__)

LOW_CONFIDENCE_FRACTION = 0.1


class FlowField:
    """Cell-centered velocity, mask and alpha of a solved flow, interpolated multilinearly.

    Queries outside the hull of the cell centers (or of the time centers) take the value at the
    nearest hull point.
    """

    __slots__ = (
        'grid',
        'model',
        '_velocity',
        '_mask',
        '_alpha',
        '_low',
        '_high',
    )

    def __init__(
        self,
        grid: GridSpec,
        model: ModelSpec,
        v: np.ndarray,
        mask: Optional[np.ndarray] = None,
        alpha: Optional[np.ndarray] = None,
    ) -> None:
        v = grid.check_centered_vector(v, 'v')
        mask = np.ones(grid.scalar_shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        alpha = grid.zeros_scalar() if alpha is None else grid.check_scalar(alpha, 'alpha')

        times = grid.time_centers
        axes = (times, *([grid.centers] * grid.d))

        self.grid = grid
        self.model = model
        self._velocity = RegularGridInterpolator(axes, np.moveaxis(v, 0, -1))
        self._mask = RegularGridInterpolator(axes, mask.astype(float))
        self._alpha = RegularGridInterpolator(axes, alpha)
        self._low = np.array([times[0]] + [grid.centers[0]] * grid.d)
        self._high = np.array([times[-1]] + [grid.centers[-1]] * grid.d)

    @classmethod
    def from_solution(cls, solution: Solution) -> FlowField:
        return cls(solution.grid, solution.model, solution.v, solution.mask, solution.alpha)

    def _query(self, t: float, x: np.ndarray) -> np.ndarray:
        n = x.shape[1]
        points = np.empty((n, 1 + self.grid.d))
        points[:, 0] = t
        points[:, 1:] = x.T
        return np.clip(points, self._low, self._high)

    def velocity(self, t: float, x: np.ndarray) -> np.ndarray:
        return self._velocity(self._query(t, x)).T

    def masked(self, t: float, x: np.ndarray) -> np.ndarray:
        return self._mask(self._query(t, x)) < 0.5

    def alpha(self, t: float, x: np.ndarray) -> np.ndarray:
        return self._alpha(self._query(t, x))


class Trajectory:
    __slots__ = (
        'times',
        'positions',
        'energy',
        'path_cost',
        'cost_so_far',
        'masked_fraction',
        'clamped',
        'low_confidence',
    )

    def __init__(
        self,
        times: np.ndarray,
        positions: np.ndarray,
        energy: float,
        path_cost: float,
        cost_so_far: np.ndarray,
        masked_fraction: float,
        clamped: bool,
    ) -> None:
        self.times = times
        self.positions = positions
        self.energy = float(energy)
        self.path_cost = float(path_cost)
        self.cost_so_far = cost_so_far
        self.masked_fraction = float(masked_fraction)
        self.clamped = bool(clamped)
        self.low_confidence = self.masked_fraction > LOW_CONFIDENCE_FRACTION

    def __repr__(self) -> str:
        return (
            f'Trajectory(start={self.positions[0].tolist()}, end={self.positions[-1].tolist()}, '
            f'energy={self.energy:.6g}, path_cost={self.path_cost:.6g})'
        )


class Ensemble:
    """Traced particles sharing one time grid; positions have shape (steps + 1, d, n)."""

    __slots__ = (
        'times',
        'positions',
        'velocities',
        'energy',
        'path_cost',
        'cost_so_far',
        'masked_fraction',
        'clamped',
        'low_confidence',
    )

    def __init__(
        self,
        times: np.ndarray,
        positions: np.ndarray,
        velocities: np.ndarray,
        cost_so_far: np.ndarray,
        masked_fraction: np.ndarray,
        clamped: np.ndarray,
    ) -> None:
        self.times = times
        self.positions = positions
        self.velocities = velocities
        self.energy = trapezoid(np.sum(velocities**2, axis=1), times, axis=0)
        self.cost_so_far = cost_so_far
        self.path_cost = cost_so_far[-1]
        self.masked_fraction = masked_fraction
        self.clamped = clamped
        self.low_confidence = masked_fraction > LOW_CONFIDENCE_FRACTION

    def __len__(self) -> int:
        return self.positions.shape[2]

    def __getitem__(self, i: int) -> Trajectory:
        return Trajectory(
            self.times,
            self.positions[:, :, i],
            self.energy[i],
            self.path_cost[i],
            self.cost_so_far[:, i],
            self.masked_fraction[i],
            self.clamped[i],
        )

    @property
    def starts(self) -> np.ndarray:
        return self.positions[0]

    @property
    def ends(self) -> np.ndarray:
        return self.positions[-1]

    def summary(self) -> dict[str, Any]:
        return {
            'particles': len(self),
            'steps': self.times.size - 1,
            'mean_energy': float(np.mean(self.energy)),
            'mean_path_cost': float(np.mean(self.path_cost)),
            'clamped': int(np.sum(self.clamped)),
            'low_confidence': int(np.sum(self.low_confidence)),
        }


def path_integrand(field: FlowField, t: np.ndarray, x: np.ndarray, xdot: np.ndarray) -> np.ndarray:
    """L(x, xdot) + alpha(t, x) along (steps + 1, d, n) positions and velocities."""
    out = np.empty((t.size, x.shape[2]))
    for k, tk in enumerate(t):
        out[k] = field.model.at(x[k]).lagrangian(xdot[k]) + field.alpha(float(tk), x[k])
    return out


def trace_ensemble(
    points: np.ndarray, source: Union[Solution, FlowField], steps: int, *, check_positivity=True
) -> Ensemble:
    """Integrate x' = v(t, x) from every point with classical RK4 on a uniform grid of [0, 1].

    Positions are clamped to the box after each step. Energy and path cost are accumulated with
    the trapezoid rule on the node velocities.
    """
    if steps < 1:
        raise ValueError(f'The number of steps must be at least 1, got {steps!r}.')
    field = source if isinstance(source, FlowField) else FlowField.from_solution(source)
    grid = field.grid
    x = np.array(points, dtype=float).reshape(grid.d, -1)
    if check_positivity:
        positivity_check(field.model, grid.mesh().reshape(grid.d, -1))

    h = 1.0 / steps
    times = np.linspace(0.0, 1.0, steps + 1)
    positions = np.empty((steps + 1, grid.d, x.shape[1]))
    positions[0] = x
    clamped = np.zeros(x.shape[1], dtype=bool)

    for k in range(steps):
        t = times[k]
        k1 = field.velocity(t, x)
        k2 = field.velocity(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = field.velocity(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = field.velocity(t + h, x + h * k3)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        clamped |= np.any(np.abs(x) > grid.R, axis=0)
        x = np.clip(x, -grid.R, grid.R)
        positions[k + 1] = x

    velocities = np.stack([field.velocity(float(t), positions[k]) for k, t in enumerate(times)])
    masked = np.stack([field.masked(float(t), positions[k]) for k, t in enumerate(times)])
    integrand = path_integrand(field, times, positions, velocities)
    cost_so_far = cumulative_trapezoid(integrand, times, axis=0, initial=0.0)

    ensemble = Ensemble(times, positions, velocities, cost_so_far, masked.mean(axis=0), clamped)
    if clamped.any():
        logger.warning(f'{int(clamped.sum())} paths reached the box boundary and were clamped.')
    if ensemble.low_confidence.any():
        logger.warning(f'{int(ensemble.low_confidence.sum())} paths spent over 10% of the steps in the masked region.')
    return ensemble


def trace_characteristic(x0: Any, source: Union[Solution, FlowField], steps: int) -> Trajectory:
    field = source if isinstance(source, FlowField) else FlowField.from_solution(source)
    x0 = np.asarray(x0, dtype=float).reshape(field.grid.d, 1)
    if np.any(np.abs(x0) > field.grid.R):
        raise ValueError(f'The starting point {x0.ravel().tolist()} lies outside the box.')
    return trace_ensemble(x0, field, steps)[0]
