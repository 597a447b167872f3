from __future__ import annotations

import numpy as np

from mfplan.grid import GridSpec
from mfplan.lagrangian.exceptions import EmptyDensity


def _weights(grid: GridSpec, m: np.ndarray, name: str) -> np.ndarray:
    m = np.maximum(grid.check_slice(m, name), 0.0)
    total = float(np.sum(m))
    if not np.isfinite(total) or total <= 0:
        raise EmptyDensity(name)
    return m / total


def sample_particles(grid: GridSpec, m0: np.ndarray, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError(f'The number of particles must be at least 1, got {n!r}.')
    weights = _weights(grid, m0, 'm0')
    rng = np.random.default_rng(seed)
    faces = grid.faces

    if grid.d == 1:
        cdf = np.concatenate(([0.0], np.cumsum(weights)))
        cdf[-1] = 1.0
        s = rng.random(n)
        idx = np.clip(np.searchsorted(cdf, s, side='right'), 1, grid.nx)
        lo = cdf[idx - 1]
        width = cdf[idx] - lo
        frac = np.clip(np.divide(s - lo, width, out=np.full_like(s, 0.5), where=width > 0), 0.0, 1.0)
        return (faces[idx - 1] + frac * grid.dx).reshape(1, n)

    flat = rng.choice(weights.size, size=n, p=weights.ravel())
    index = np.unravel_index(flat, grid.cells)
    offsets = rng.random((grid.d, n))
    return np.stack([faces[index[i]] + offsets[i] * grid.dx for i in range(grid.d)])
