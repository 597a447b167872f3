from __future__ import annotations

from collections.abc import Iterator
from typing import Any, Optional

import numpy as np

from mfplan.grid import GridSpec, Momentum
from mfplan.model import ModelSpec


HISTORY_COLUMNS = ('iteration', 'B', 'A', 'gap', 'rel_gap', 'residual', 'continuity')


class History:
    __slots__ = ('_rows',)

    def __init__(self) -> None:
        self._rows: list[tuple[int, float, float, float, float, float, float]] = []

    def __len__(self) -> int:
        return len(self._rows)

    def __iter__(self) -> Iterator[tuple[int, float, float, float, float, float, float]]:
        yield from self._rows

    def __getitem__(self, key: str) -> np.ndarray:
        index = HISTORY_COLUMNS.index(key)
        return np.array([row[index] for row in self._rows])

    def append(
        self, iteration: int, B: float, A: float, residual: float, continuity: float
    ) -> tuple[int, float, float, float, float, float, float]:
        gap = B - A
        rel_gap = gap / max(1.0, abs(B))
        row = (int(iteration), float(B), float(A), float(gap), float(rel_gap), float(residual), float(continuity))
        self._rows.append(row)
        return row

    @property
    def last(self) -> Optional[dict[str, float]]:
        if not self._rows:
            return None
        return dict(zip(HISTORY_COLUMNS, self._rows[-1]))

    def rows(self) -> list[tuple[int, float, float, float, float, float, float]]:
        return list(self._rows)


class Solution:
    """Outcome of one planning solve.

    Arrays are frozen once the solver hands the object out. `v` and `mask` live on the
    space-time cells: the velocity is only defined where the centered density exceeds the floor.
    """

    __slots__ = (
        'model',
        'grid',
        'm0',
        'm1',
        'm',
        'w',
        'v',
        'mask',
        'u',
        'alpha',
        'density_floor',
        'history',
        'iterations',
        'converged',
        'config',
    )

    def __init__(
        self,
        *,
        model: ModelSpec,
        grid: GridSpec,
        m0: np.ndarray,
        m1: np.ndarray,
        m: np.ndarray,
        w: Momentum,
        u: np.ndarray,
        alpha: np.ndarray,
        density_floor: float,
        history: Optional[History] = None,
        iterations: int = 0,
        converged: bool = False,
        config: Optional[dict[str, Any]] = None,
    ) -> None:
        from mfplan.primal.checks import recover_velocity

        self.model = model
        self.grid = grid
        self.m0 = grid.check_slice(m0, 'm0').copy()
        self.m1 = grid.check_slice(m1, 'm1').copy()
        self.m = grid.check_density(m).copy()
        self.w = tuple(wi.copy() for wi in grid.check_momentum(w))
        self.u = grid.check_scalar(u, 'u').copy()
        self.alpha = grid.check_scalar(alpha, 'alpha').copy()
        self.density_floor = float(density_floor)
        self.v, self.mask = recover_velocity(grid, self.m, self.w, self.density_floor)
        self.history = history if history is not None else History()
        self.iterations = iterations
        self.converged = converged
        self.config = dict(config or {})

        for array in (self.m0, self.m1, self.m, self.u, self.alpha, self.v, self.mask, *self.w):
            array.flags.writeable = False

    def __repr__(self) -> str:
        return f'Solution({self.grid}, iterations={self.iterations}, converged={self.converged})'
