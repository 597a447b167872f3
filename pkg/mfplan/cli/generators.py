from __future__ import annotations

from typing import Any, Callable

import numpy as np

from scipy.stats import norm

from mfplan.grid import GridSpec, normalize
from mfplan.grid.exceptions import GridSpecError


GENERATORS = ('gaussian', 'box', 'bimodal', 'ring')


def _point(grid: GridSpec, value: Any, name: str) -> np.ndarray:
    point = np.atleast_1d(np.asarray(value, dtype=float))
    if point.size == 1:
        point = np.repeat(point, grid.d)
    if point.size != grid.d:
        raise GridSpecError(f'"{name}" needs {grid.d} coordinates, got {point.size}.')
    return point


def _outer(factors: list[np.ndarray]) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


def _gaussian_cells(grid: GridSpec, center: np.ndarray, sigma: float) -> np.ndarray:
    """Cell averages of an isotropic Gaussian."""
    if not sigma > 0:
        raise GridSpecError(f'sigma must be positive, got {sigma!r}.')
    factors = [np.diff(norm.cdf(grid.faces, loc=c, scale=sigma)) / grid.dx for c in center]
    return _outer(factors)


def _gaussian(grid: GridSpec, params: dict[str, Any]) -> np.ndarray:
    return _gaussian_cells(grid, _point(grid, params.get('center', 0.0), 'center'), float(params.get('sigma', 0.2)))


def _box(grid: GridSpec, params: dict[str, Any]) -> np.ndarray:
    center = _point(grid, params.get('center', 0.0), 'center')
    half = 0.5 * float(params.get('width', 1.0))
    if not half > 0:
        raise GridSpecError('the box width must be positive.')
    lo, hi = grid.faces[:-1], grid.faces[1:]
    factors = [np.clip(np.minimum(hi, c + half) - np.maximum(lo, c - half), 0.0, None) / grid.dx for c in center]
    return _outer(factors)


def _bimodal(grid: GridSpec, params: dict[str, Any]) -> np.ndarray:
    centers = np.atleast_1d(np.asarray(params.get('centers', [-0.5, 0.5]), dtype=float))
    if centers.size != 2 * grid.d:
        raise GridSpecError(f'"centers" needs {2 * grid.d} coordinates, got {centers.size}.')
    weights = np.atleast_1d(np.asarray(params.get('weights', [0.5, 0.5]), dtype=float))
    if weights.size != 2 or np.any(weights < 0):
        raise GridSpecError('"weights" must be two nonnegative numbers.')
    sigma = float(params.get('sigma', 0.2))
    modes = centers.reshape(2, grid.d)
    return sum(w * _gaussian_cells(grid, c, sigma) for w, c in zip(weights, modes))


def _ring(grid: GridSpec, params: dict[str, Any]) -> np.ndarray:
    if grid.d != 2:
        raise GridSpecError('the ring density needs d = 2.')
    radius = float(params.get('radius', 1.0))
    width = float(params.get('width', 0.2))
    if not width > 0:
        raise GridSpecError('the ring width must be positive.')
    r = np.sqrt(grid.radius2())
    return np.exp(-((r - radius) ** 2) / (2.0 * width**2))


MAP: dict[str, Callable[[GridSpec, dict[str, Any]], np.ndarray]] = {
    'gaussian': _gaussian,
    'box': _box,
    'bimodal': _bimodal,
    'ring': _ring,
}


def generate(kind: str, grid: GridSpec, params: dict[str, Any], seed: int = 0) -> np.ndarray:
    """A unit-mass endpoint density; `noise` in params adds seeded multiplicative jitter in [1-noise, 1+noise]."""
    if kind not in MAP:
        raise ValueError(f'Unsupported density kind: {kind}.')
    m = MAP[kind](grid, params)
    noise = float(params.get('noise', 0.0))
    if noise:
        if not 0 < noise < 1:
            raise GridSpecError(f'noise must lie in (0, 1), got {noise!r}.')
        m = m * (1.0 + noise * np.random.default_rng(seed).uniform(-1.0, 1.0, grid.cells))
    return normalize(grid, m, kind)
