from __future__ import annotations

import logging

from functools import lru_cache
from typing import Any, Optional, Union

import numpy as np

from scipy import fft
from scipy.integrate import trapezoid

from mfplan.grid.exceptions import GridSpecError, FieldShapeError, InfeasibleEndpoints


logger = logging.getLogger(__name__)

Momentum = tuple[np.ndarray, ...]

MASS_TOLERANCE = 1e-12


class GridSpec:
    """Staggered discretization of (0,1) x [-R,R]^d.

    Densities live on the nt+1 time nodes and the nx^d spatial cells, the flux component i lives
    on the nt time cells and on the nx+1 faces of axis i, scalar fields (u, alpha) live on the
    nt x nx^d space-time cells.
    """

    __slots__ = (
        '_d',
        '_nt',
        '_nx',
        '_R',
    )

    def __init__(self, d: int, nt: int, nx: int, R: float) -> None:
        if type(d) is not int or d not in (1, 2):
            raise GridSpecError(f'dimension must be 1 or 2, got {d!r}.')
        if type(nt) is not int or nt < 2:
            raise GridSpecError(f'nt must be an integer >= 2, got {nt!r}.')
        if type(nx) is not int or nx < 4:
            raise GridSpecError(f'nx must be an integer >= 4, got {nx!r}.')
        if type(R) is bool or not isinstance(R, (int, float)) or not np.isfinite(R) or R <= 0:
            raise GridSpecError(f'R must be a positive number, got {R!r}.')
        self._d = d
        self._nt = nt
        self._nx = nx
        self._R = float(R)

    def __repr__(self) -> str:
        return f'GridSpec(d={self._d}, nt={self._nt}, nx={self._nx}, R={self._R})'

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, GridSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash((self._d, self._nt, self._nx, self._R))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GridSpec:
        try:
            return cls(int(data['d']), int(data['nt']), int(data['nx']), float(data['R']))
        except KeyError as error:
            raise GridSpecError(f'missing key {error}.')
        except (TypeError, ValueError) as error:
            raise GridSpecError(str(error))

    def to_dict(self) -> dict[str, Any]:
        return {'d': self._d, 'nt': self._nt, 'nx': self._nx, 'R': self._R}

    @property
    def d(self) -> int:
        return self._d

    @property
    def nt(self) -> int:
        return self._nt

    @property
    def nx(self) -> int:
        return self._nx

    @property
    def R(self) -> float:
        return self._R

    @property
    def dt(self) -> float:
        return 1.0 / self._nt

    @property
    def dx(self) -> float:
        return 2.0 * self._R / self._nx

    @property
    def cell_volume(self) -> float:
        return self.dx**self._d

    @property
    def volume(self) -> float:
        return self.dt * self.cell_volume

    @property
    def diameter(self) -> float:
        return 2.0 * self._R * np.sqrt(self._d)

    @property
    def cells(self) -> tuple[int, ...]:
        return (self._nx,) * self._d

    @property
    def density_shape(self) -> tuple[int, ...]:
        return (self._nt + 1, *self.cells)

    @property
    def scalar_shape(self) -> tuple[int, ...]:
        return (self._nt, *self.cells)

    def face_shape(self, axis: int) -> tuple[int, ...]:
        shape = list(self.scalar_shape)
        shape[1 + axis] += 1
        return tuple(shape)

    @property
    def centers(self) -> np.ndarray:
        return -self._R + self.dx * (np.arange(self._nx) + 0.5)

    @property
    def faces(self) -> np.ndarray:
        return np.linspace(-self._R, self._R, self._nx + 1)

    @property
    def time_nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self._nt + 1)

    @property
    def time_centers(self) -> np.ndarray:
        return (np.arange(self._nt) + 0.5) * self.dt

    def mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(*([self.centers] * self._d), indexing='ij'))

    def radius2(self) -> np.ndarray:
        return np.sum(self.mesh() ** 2, axis=0)

    def kappa(self) -> np.ndarray:
        return 1.0 + self.radius2()

    def zeros_density(self) -> np.ndarray:
        return np.zeros(self.density_shape)

    def zeros_momentum(self) -> Momentum:
        return tuple(np.zeros(self.face_shape(i)) for i in range(self._d))

    def zeros_scalar(self) -> np.ndarray:
        return np.zeros(self.scalar_shape)

    def check_slice(self, m: np.ndarray, name='slice') -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if m.shape != self.cells:
            raise FieldShapeError(name, self.cells, m.shape)
        return m

    def check_density(self, m: np.ndarray, name='m') -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if m.shape != self.density_shape:
            raise FieldShapeError(name, self.density_shape, m.shape)
        return m

    def check_momentum(self, w: Momentum, name='w') -> Momentum:
        if len(w) != self._d:
            raise FieldShapeError(name, (self._d,), (len(w),))
        out = []
        for i, wi in enumerate(w):
            wi = np.asarray(wi, dtype=float)
            if wi.shape != self.face_shape(i):
                raise FieldShapeError(f'{name}[{i}]', self.face_shape(i), wi.shape)
            out.append(wi)
        return tuple(out)

    def check_scalar(self, s: np.ndarray, name='s') -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape != self.scalar_shape:
            raise FieldShapeError(name, self.scalar_shape, s.shape)
        return s

    def check_centered_vector(self, s: np.ndarray, name='s') -> np.ndarray:
        s = np.asarray(s, dtype=float)
        expected = (self._d, *self.scalar_shape)
        if s.shape != expected:
            raise FieldShapeError(name, expected, s.shape)
        return s

    def mass(self, m: np.ndarray) -> Union[float, np.ndarray]:
        axes = tuple(range(m.ndim - self._d, m.ndim))
        total = np.sum(m, axis=axes) * self.cell_volume
        return float(total) if np.ndim(total) == 0 else total


def _sl(ndim: int, axis: int, index: slice) -> tuple[slice, ...]:
    out = [slice(None)] * ndim
    out[axis] = index
    return tuple(out)


def _average(a: np.ndarray, axis: int) -> np.ndarray:
    return 0.5 * (a[_sl(a.ndim, axis, slice(None, -1))] + a[_sl(a.ndim, axis, slice(1, None))])


def _spread(s: np.ndarray, axis: int, adjoint: bool) -> np.ndarray:
    n = s.shape[axis]
    shape = list(s.shape)
    shape[axis] = n + 1
    out = np.zeros(shape)
    out[_sl(s.ndim, axis, slice(1, n))] = _average(s, axis)
    first = s[_sl(s.ndim, axis, slice(0, 1))]
    last = s[_sl(s.ndim, axis, slice(n - 1, n))]
    if adjoint:
        out[_sl(s.ndim, axis, slice(0, 1))] = 0.5 * first
        out[_sl(s.ndim, axis, slice(n, n + 1))] = 0.5 * last
    else:
        second = s[_sl(s.ndim, axis, slice(1, 2))]
        before_last = s[_sl(s.ndim, axis, slice(n - 2, n - 1))]
        out[_sl(s.ndim, axis, slice(0, 1))] = 1.5 * first - 0.5 * second
        out[_sl(s.ndim, axis, slice(n, n + 1))] = 1.5 * last - 0.5 * before_last
    return out


def interp_time_to_center(grid: GridSpec, m: np.ndarray) -> np.ndarray:
    m = grid.check_density(m)
    return _average(m, 0)


def interp_center_to_time(grid: GridSpec, s: np.ndarray, *, adjoint=False) -> np.ndarray:
    """Transfer from time cells to time nodes.

    With adjoint=True the endpoint nodes receive half the neighbouring value, which makes this
    the exact transpose of interp_time_to_center; otherwise the endpoints are extrapolated linearly.
    """
    s = grid.check_scalar(s)
    return _spread(s, 0, adjoint)


def interp_face_to_center(grid: GridSpec, w: Momentum) -> np.ndarray:
    w = grid.check_momentum(w)
    return np.stack([_average(wi, 1 + i) for i, wi in enumerate(w)])


def interp_center_to_face(grid: GridSpec, s: np.ndarray, *, adjoint=False) -> Momentum:
    s = grid.check_centered_vector(s)
    return tuple(_spread(s[i], 1 + i, adjoint) for i in range(grid.d))


def continuity_residual(grid: GridSpec, m: np.ndarray, w: Momentum) -> np.ndarray:
    """Discrete d_t m + div w on the space-time cells."""
    m = grid.check_density(m)
    w = grid.check_momentum(w)
    r = np.diff(m, axis=0) / grid.dt
    for i, wi in enumerate(w):
        r += np.diff(wi, axis=1 + i) / grid.dx
    return r


def divergence_adjoint(grid: GridSpec, psi: np.ndarray) -> tuple[np.ndarray, Momentum]:
    """Transpose of the continuity operator restricted to the free unknowns.

    Endpoint densities and boundary faces are pinned, so their entries are zero.
    """
    psi = grid.check_scalar(psi)
    am = np.zeros(grid.density_shape)
    am[1:-1] = (psi[:-1] - psi[1:]) / grid.dt
    aw = []
    for i in range(grid.d):
        ax = 1 + i
        wi = np.zeros(grid.face_shape(i))
        n = grid.nx
        wi[_sl(wi.ndim, ax, slice(1, n))] = (
            psi[_sl(psi.ndim, ax, slice(None, -1))] - psi[_sl(psi.ndim, ax, slice(1, None))]
        ) / grid.dx
        aw.append(wi)
    return am, tuple(aw)


@lru_cache(maxsize=16)
def _laplacian_symbol(grid: GridSpec) -> np.ndarray:
    steps = [grid.dt] + [grid.dx] * grid.d
    sizes = grid.scalar_shape
    symbol = np.zeros(sizes)
    for axis, (n, h) in enumerate(zip(sizes, steps)):
        k = np.arange(n)
        ev = (2.0 - 2.0 * np.cos(np.pi * k / n)) / h**2
        shape = [1] * len(sizes)
        shape[axis] = n
        symbol = symbol + ev.reshape(shape)
    symbol.flags.writeable = False
    return symbol


def solve_neumann(grid: GridSpec, rhs: np.ndarray, *, workers: int = 1) -> np.ndarray:
    """Zero-mean solution of (A A^T) psi = rhs, the Neumann Laplacian in time and space."""
    symbol = _laplacian_symbol(grid)
    coef = fft.dctn(rhs, type=2, norm='ortho', workers=workers)
    coef.flat[0] = 0.0
    inv = np.divide(coef, symbol, out=np.zeros_like(coef), where=symbol > 0)
    return fft.idctn(inv, type=2, norm='ortho', workers=workers)


def project_continuity(
    grid: GridSpec,
    m: np.ndarray,
    w: Momentum,
    m0: np.ndarray,
    m1: np.ndarray,
    *,
    return_potential=False,
    workers: int = 1,
) -> Union[tuple[np.ndarray, Momentum], tuple[np.ndarray, Momentum, np.ndarray]]:
    """Euclidean projection onto the flows joining m0 to m1 with no boundary flux.

    The optional potential psi is the multiplier of the constraint: the projection equals the
    input minus the transpose of the continuity operator applied to psi on the free unknowns.
    """
    m = grid.check_density(m).copy()
    w = tuple(wi.copy() for wi in grid.check_momentum(w))
    m0 = grid.check_slice(m0, 'm0')
    m1 = grid.check_slice(m1, 'm1')

    mass0, mass1 = grid.mass(m0), grid.mass(m1)
    if abs(mass0 - mass1) > MASS_TOLERANCE:
        raise InfeasibleEndpoints(mass0, mass1)

    m[0] = m0
    m[-1] = m1
    for i, wi in enumerate(w):
        ax = 1 + i
        wi[_sl(wi.ndim, ax, slice(0, 1))] = 0.0
        wi[_sl(wi.ndim, ax, slice(grid.nx, grid.nx + 1))] = 0.0

    rhs = continuity_residual(grid, m, w)
    psi = solve_neumann(grid, rhs, workers=workers)
    am, aw = divergence_adjoint(grid, psi)

    m -= am
    w = tuple(wi - ai for wi, ai in zip(w, aw))

    if return_potential:
        return m, w, psi
    return m, w


def slice_masses(grid: GridSpec, m: np.ndarray) -> np.ndarray:
    return np.atleast_1d(grid.mass(np.asarray(m, dtype=float)))


def boundary_mass(grid: GridSpec, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    layer = np.zeros(grid.cells, dtype=bool)
    for axis in range(grid.d):
        layer[_sl(grid.d, axis, slice(0, 1))] = True
        layer[_sl(grid.d, axis, slice(grid.nx - 1, grid.nx))] = True
    total = slice_masses(grid, m)
    edge = slice_masses(grid, np.where(layer, m, 0.0))
    return np.divide(edge, total, out=np.zeros_like(edge), where=total > 0)


def weighted_norms(grid: GridSpec, m: np.ndarray, p: float = 2.0) -> dict[str, Any]:
    """L1_kappa norm, L^p norm and quadratic moment per slice and over the whole cylinder.

    `m` is either one slice or a density on the time nodes; the cylinder aggregate uses the
    trapezoid rule in time.
    """
    m = np.asarray(m, dtype=float)
    single = m.shape == grid.cells
    if single:
        m = m[None]
    elif m.shape[1:] != grid.cells:
        raise FieldShapeError('m', grid.density_shape, m.shape)

    if np.any(m < 0):
        logger.debug(f'weighted_norms got negative entries, min {m.min():.3g}.')

    r2 = grid.radius2()
    axes = tuple(range(1, m.ndim))
    vol = grid.cell_volume
    mass = np.sum(m, axis=axes) * vol
    moment = np.sum(r2 * m, axis=axes) * vol
    lp_p = np.sum(np.abs(m) ** p, axis=axes) * vol
    per_slice = {
        'mass': mass,
        'l1_kappa': mass + moment,
        'quadratic_moment': moment,
        'lp': lp_p ** (1.0 / p),
    }

    if single:
        aggregate = {k: float(v[0]) for k, v in per_slice.items()}
    else:
        times = np.linspace(0.0, 1.0, m.shape[0])
        aggregate = {
            'mass': float(trapezoid(mass, times)),
            'l1_kappa': float(trapezoid(mass + moment, times)),
            'quadratic_moment': float(trapezoid(moment, times)),
            'lp': float(trapezoid(lp_p, times) ** (1.0 / p)),
        }

    return {'per_slice': per_slice, 'aggregate': aggregate, 'p': p}


def normalize(grid: GridSpec, m: np.ndarray, name='density') -> np.ndarray:
    m = np.asarray(m, dtype=float)
    total = grid.mass(m)
    if not np.isfinite(total) or total <= 0:
        raise GridSpecError(f'{name} has no mass to normalize.')
    return m / total


def validate_endpoint(grid: GridSpec, m: np.ndarray, name: str, mass_tol: Optional[float] = None) -> np.ndarray:
    m = grid.check_slice(m, name)
    if not np.all(np.isfinite(m)):
        raise GridSpecError(f'{name} has non-finite entries.')
    if np.any(m < 0):
        raise GridSpecError(f'{name} has negative entries.')
    if mass_tol is not None and abs(grid.mass(m) - 1.0) > mass_tol:
        raise GridSpecError(f'{name} has mass {grid.mass(m)!r}, expected 1.')
    return m
