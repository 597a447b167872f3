from __future__ import annotations

import os
import json
import logging

from collections.abc import Sequence
from typing import Any, Optional, Union

import numpy as np

from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize_scalar

from mfplan.grid import GridSpec, read_field, write_field, FieldFormatError
from mfplan.model.exceptions import ModelDomainError, ModelSpecError, GrowthBoundViolation, PositivityConventionError


logger = logging.getLogger(__name__)

Number = Union[int, float]
SpatialInput = Union[Number, np.ndarray, 'SpatialFunction']

GROWTH_TOLERANCE = 1e-10


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=0)


def _check_nonnegative(name: str, m: Any) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise ModelDomainError(name, float(np.min(m)))
    return m


class SpatialFunction:
    """A coefficient of the model: a constant or a map sampled at the cell centers of [-R,R]^d.

    Off-grid values come from piecewise-linear interpolation; points outside the sampled centers
    take the value of the nearest center.
    """

    __slots__ = (
        '_const',
        '_values',
        '_R',
        '_interp',
        'source',
    )

    def __init__(self, value: Union[Number, np.ndarray], R: Optional[float] = None, source: Optional[str] = None):
        self._const: Optional[float] = None
        self._values: Optional[np.ndarray] = None
        self._R: Optional[float] = None
        self._interp: Optional[RegularGridInterpolator] = None
        self.source = source

        if np.ndim(value) == 0:
            self._const = float(value)  # type: ignore
            if not np.isfinite(self._const):
                raise ModelSpecError(f'constant coefficient {value!r} is not finite.')
            return

        values = np.asarray(value, dtype=float)
        if values.ndim not in (1, 2) or len(set(values.shape)) != 1:
            raise ModelSpecError(f'sampled coefficient must be a 1-D or square 2-D array, got {values.shape}.')
        if not np.all(np.isfinite(values)):
            raise ModelSpecError('sampled coefficient has non-finite entries.')
        if R is None or R <= 0:
            raise ModelSpecError('sampled coefficient needs the half-width R of its box.')

        self._values = values
        self._R = float(R)
        nx = values.shape[0]
        dx = 2.0 * self._R / nx
        centers = -self._R + dx * (np.arange(nx) + 0.5)
        self._interp = RegularGridInterpolator((centers,) * values.ndim, values, method='linear')

    def __repr__(self) -> str:
        if self._const is not None:
            return f'SpatialFunction({self._const})'
        return f'SpatialFunction(sampled {self._values.shape}, R={self._R})'  # type: ignore

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    @property
    def constant(self) -> Optional[float]:
        return self._const

    @property
    def values(self) -> Optional[np.ndarray]:
        return self._values

    @property
    def R(self) -> Optional[float]:
        return self._R

    @property
    def d(self) -> Optional[int]:
        return None if self._values is None else self._values.ndim

    def bounds(self) -> tuple[float, float]:
        if self._const is not None:
            return self._const, self._const
        return float(self._values.min()), float(self._values.max())  # type: ignore

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self._const is not None:
            return np.full(x.shape[1:], self._const)

        d = self._values.ndim  # type: ignore
        if x.shape[0] != d:
            raise ModelSpecError(f'points have {x.shape[0]} coordinates, the coefficient is {d}-D.')
        nx = self._values.shape[0]  # type: ignore
        half = self._R - self._R / nx  # type: ignore
        pts = np.clip(np.moveaxis(x, 0, -1).reshape(-1, d), -half, half)
        return self._interp(pts).reshape(x.shape[1:])  # type: ignore

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        if self._const is not None:
            return np.full(grid.cells, self._const)
        if self._values.shape == grid.cells and self._R == grid.R:  # type: ignore
            return self._values.copy()  # type: ignore
        return self(grid.mesh())


def _as_function(name: str, value: SpatialInput) -> SpatialFunction:
    if isinstance(value, SpatialFunction):
        return value
    if type(value) is bool:
        raise ModelSpecError(f'{name} cannot be a bool.')
    if np.ndim(value) == 0:
        return SpatialFunction(float(value))  # type: ignore
    raise ModelSpecError(f'{name} must be a number or a SpatialFunction.')


class Coefficients:
    """Model coefficients evaluated on a set of points, with the closed-form transforms.

    Vectors carry their components on the leading axis, coefficient arrays broadcast against the
    trailing axes of the fields they are applied to.
    """

    __slots__ = (
        'p',
        'g',
        'z',
        'V_H',
        'a',
        'V_f',
    )

    def __init__(
        self, p: float, g: np.ndarray, z: np.ndarray, V_H: np.ndarray, a: np.ndarray, V_f: np.ndarray
    ) -> None:
        self.p = p
        self.g = g
        self.z = z
        self.V_H = V_H
        self.a = a
        self.V_f = V_f

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def hamiltonian(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return 0.5 * self.g * _dot(p, p) + _dot(self.z, p) - self.V_H

    def hamiltonian_grad_p(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return self.g * p + self.z

    def lagrangian(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        s = v + self.z
        return _dot(s, s) / (2.0 * self.g) + self.V_H

    def coupling_f(self, m: Any) -> np.ndarray:
        m = _check_nonnegative('coupling_f', m)
        return self.a * m ** (self.p - 1.0) + self.V_f

    def coupling_df(self, m: np.ndarray) -> np.ndarray:
        with np.errstate(divide='ignore'):
            return self.a * (self.p - 1.0) * m ** (self.p - 2.0)

    def F(self, m: Any) -> np.ndarray:
        m = _check_nonnegative('F_value', m)
        return self.a * m**self.p / self.p + self.V_f * m

    def F_star(self, alpha: Any) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        excess = np.maximum(alpha - self.V_f, 0.0)
        return self.a ** (-self.q / self.p) * excess**self.q / self.q

    def perspective_L(self, m: Any, w: np.ndarray) -> np.ndarray:
        m = _check_nonnegative('perspective_L', m)
        w = np.asarray(w, dtype=float)
        s = w + self.z * m
        with np.errstate(divide='ignore', invalid='ignore'):
            positive = _dot(s, s) / (2.0 * self.g * m) + self.V_H * m
        zero_flux = _dot(w, w) == 0.0
        return np.where(m > 0, positive, np.where(zero_flux, 0.0, np.inf))

    def gap_YH(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        return self.hamiltonian(p) + _dot(p, v) + self.lagrangian(v)

    def gap_YF(self, m: Any, alpha: Any) -> np.ndarray:
        m = _check_nonnegative('gap_YF', m)
        alpha = np.asarray(alpha, dtype=float)
        return self.F(m) - alpha * m + self.F_star(alpha)


class ModelSpec:
    """One planning instance: H(x,p) = g|p|^2/2 + z.p - V_H and f(x,m) = a m^(p-1) + V_f."""

    __slots__ = (
        '_p',
        'g',
        'z',
        'V_H',
        'a',
        'V_f',
        'c_H',
        'c_H_plus',
        'c_H_minus',
        'c_f',
    )

    def __init__(
        self,
        p: float = 2.0,
        *,
        g: SpatialInput = 1.0,
        z: Union[SpatialInput, Sequence[SpatialInput]] = 0.0,
        V_H: SpatialInput = 0.0,
        a: SpatialInput = 1.0,
        V_f: SpatialInput = 0.0,
        c_H: float = 1.0,
        c_H_plus: float = 1.0,
        c_H_minus: float = 1.0,
        c_f: float = 1.0,
    ) -> None:
        if type(p) is bool or not isinstance(p, (int, float)) or not np.isfinite(p) or p <= 1:
            raise ModelSpecError(f'the exponent p must be a finite number > 1, got {p!r}.')
        self._p = float(p)

        self.g = _as_function('g', g)
        self.V_H = _as_function('V_H', V_H)
        self.a = _as_function('a', a)
        self.V_f = _as_function('V_f', V_f)

        if isinstance(z, (list, tuple)):
            self.z: Optional[tuple[SpatialFunction, ...]] = tuple(_as_function('z', zi) for zi in z)
            if len(self.z) not in (1, 2):
                raise ModelSpecError(f'drift must have 1 or 2 components, got {len(self.z)}.')
        else:
            zf = _as_function('z', z)
            if zf.is_constant and zf.constant == 0.0:
                self.z = None
            else:
                raise ModelSpecError('a nonzero drift must be given per component.')

        for name, value in (('c_H', c_H), ('c_f', c_f)):
            if not np.isfinite(value) or value < 1:
                raise ModelSpecError(f'{name} must be >= 1, got {value!r}.')
        for name, value in (('c_H_plus', c_H_plus), ('c_H_minus', c_H_minus)):
            if not np.isfinite(value) or value <= 0:
                raise ModelSpecError(f'{name} must be positive, got {value!r}.')
        self.c_H = float(c_H)
        self.c_H_plus = float(c_H_plus)
        self.c_H_minus = float(c_H_minus)
        self.c_f = float(c_f)

        if self.g.bounds()[0] <= 0:
            raise ModelSpecError('the metric coefficient g must be positive.')
        if self.a.bounds()[0] <= 0:
            raise ModelSpecError('the coupling weight a must be positive.')

        dims = {fn.d for fn in self._functions() if fn.d is not None}
        if self.z is not None:
            dims.add(len(self.z))
        if len(dims) > 1:
            raise ModelSpecError(f'coefficients disagree on the dimension: {sorted(dims)}.')

    def __repr__(self) -> str:
        return (
            f'ModelSpec(p={self._p}, g={self.g}, z={self.z}, V_H={self.V_H}, a={self.a}, V_f={self.V_f}, '
            f'c_H={self.c_H}, c_H_plus={self.c_H_plus}, c_H_minus={self.c_H_minus}, c_f={self.c_f})'
        )

    def _functions(self) -> list[SpatialFunction]:
        out = [self.g, self.V_H, self.a, self.V_f]
        if self.z is not None:
            out.extend(self.z)
        return out

    @property
    def p(self) -> float:
        return self._p

    @property
    def q(self) -> float:
        return self._p / (self._p - 1.0)

    @property
    def d(self) -> Optional[int]:
        if self.z is not None:
            return len(self.z)
        for fn in self._functions():
            if fn.d is not None:
                return fn.d
        return None

    @property
    def x_independent(self) -> bool:
        return all(fn.is_constant for fn in self._functions())

    @property
    def has_drift(self) -> bool:
        return self.z is not None and any(not fn.is_constant or fn.constant != 0.0 for fn in self.z)

    def check_grid(self, grid: GridSpec) -> None:
        if self.d is not None and self.d != grid.d:
            raise ModelSpecError(f'the model is {self.d}-D, the grid is {grid.d}-D.')

    def gamma_H_plus(self, x: np.ndarray) -> np.ndarray:
        return self.c_H_plus * (1.0 + np.sqrt(_dot(x, x)))

    def gamma_H_minus(self, x: np.ndarray) -> np.ndarray:
        return self.c_H_minus * (1.0 + _dot(x, x))

    def gamma_f(self, x: np.ndarray) -> np.ndarray:
        return np.abs(self.V_f(x))

    def at(self, x: Any) -> Coefficients:
        """Coefficients at points x with shape (d, ...)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1)
        d = x.shape[0]
        if self.d is not None and self.d != d:
            raise ModelSpecError(f'points have {d} coordinates, the model is {self.d}-D.')
        if self.z is None:
            z = np.zeros(x.shape)
        else:
            z = np.stack([zi(x) for zi in self.z])
        return Coefficients(self._p, self.g(x), z, self.V_H(x), self.a(x), self.V_f(x))

    def on_grid(self, grid: GridSpec, *, time_axis=True) -> Coefficients:
        """Coefficients on the grid cells, with a leading unit time axis by default."""
        self.check_grid(grid)
        shape = (1, *grid.cells) if time_axis else grid.cells

        def sample(fn: SpatialFunction) -> np.ndarray:
            return fn.on_grid(grid).reshape(shape)

        if self.z is None:
            z = np.zeros((grid.d, *shape))
        else:
            z = np.stack([sample(zi) for zi in self.z])
        return Coefficients(self._p, sample(self.g), z, sample(self.V_H), sample(self.a), sample(self.V_f))

    def hamiltonian(self, x: Any, p: Any) -> np.ndarray:
        return self.at(x).hamiltonian(p)

    def hamiltonian_grad_p(self, x: Any, p: Any) -> np.ndarray:
        return self.at(x).hamiltonian_grad_p(p)

    def lagrangian(self, x: Any, v: Any) -> np.ndarray:
        return self.at(x).lagrangian(v)

    def coupling_f(self, x: Any, m: Any) -> np.ndarray:
        return self.at(x).coupling_f(m)

    def F_value(self, x: Any, m: Any) -> np.ndarray:
        return self.at(x).F(m)

    def F_star_value(self, x: Any, alpha: Any) -> np.ndarray:
        return self.at(x).F_star(alpha)

    def perspective_L(self, x: Any, m: Any, w: Any) -> np.ndarray:
        return self.at(x).perspective_L(m, w)

    def gap_YH(self, x: Any, p: Any, v: Any) -> np.ndarray:
        return self.at(x).gap_YH(p, v)

    def gap_YF(self, x: Any, m: Any, alpha: Any) -> np.ndarray:
        return self.at(x).gap_YF(m, alpha)


def kl_model(a: float, p: float, *, d: Optional[int] = None) -> ModelSpec:
    """The instance whose action is the Kantorovich-Lebesgue integrand a|v|^2 m/2 + (m + m^p)/(2a)."""
    if not np.isfinite(a) or a <= 0:
        raise ModelSpecError(f'the scale a must be positive, got {a!r}.')
    weight = p / (2.0 * a)
    z: Union[float, list[float]] = 0.0 if d is None else [0.0] * d
    return ModelSpec(
        p,
        g=1.0 / a,
        z=z,
        V_H=0.0,
        a=weight,
        V_f=1.0 / (2.0 * a),
        c_H=max(a, 1.0 / a),
        c_f=max(weight, 1.0 / weight) ** (1.0 / p),
    )


def legendre_numeric(model: ModelSpec, x: Any, v: Any, lattice: Optional[np.ndarray] = None) -> float:
    """sup over a momentum lattice of -v.p - H(x,p); the lattice is a 1-D array used on every axis."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if lattice is None:
        lattice = np.linspace(-20.0, 20.0, 801)
    d = x.shape[0]
    p = np.stack(np.meshgrid(*([lattice] * d), indexing='ij')).reshape(d, -1)
    coefs = model.at(x.reshape(d, 1))
    values = -_dot(v.reshape(d, 1), p) - coefs.hamiltonian(p)
    return float(np.max(values))


def F_star_numeric(model: ModelSpec, x: Any, alpha: float) -> float:
    """sup over m >= 0 of alpha m - F(x,m) by bounded scalar maximisation.

    The search interval comes from the lower growth bound of f, beyond which alpha m - F decreases.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coefs = model.at(x)
    gamma = float(model.gamma_f(x))
    reach = max(alpha + gamma, 0.0) * model.c_f**model.p
    upper = 2.0 * reach ** (1.0 / (model.p - 1.0)) + 1.0

    def objective(m: float) -> float:
        return -(alpha * m - float(coefs.F(m)))

    res = minimize_scalar(objective, bounds=(0.0, upper), method='bounded', options={'xatol': 1e-12})
    return max(0.0, -float(res.fun))


class GrowthReport:
    __slots__ = (
        'slack',
        'points',
        'failed',
    )

    def __init__(self) -> None:
        self.slack: dict[str, float] = {}
        self.points: dict[str, tuple[float, ...]] = {}
        self.failed: list[str] = []

    def __repr__(self) -> str:
        return f'GrowthReport(passed={self.passed}, failed={self.failed})'

    @property
    def passed(self) -> bool:
        return not self.failed

    def record(self, bound: str, slack: np.ndarray, samples: np.ndarray, *, strict=False) -> None:
        per_sample = slack.reshape(slack.shape[0], -1).min(axis=1)
        worst = int(np.argmin(per_sample))
        self.slack[bound] = float(per_sample[worst])
        self.points[bound] = tuple(float(c) for c in samples[:, worst])
        if (strict and self.slack[bound] <= 0) or self.slack[bound] < -GROWTH_TOLERANCE:
            self.failed.append(bound)

    def to_dict(self) -> dict[str, Any]:
        return {
            'passed': self.passed,
            'failed': list(self.failed),
            'slack': dict(self.slack),
            'points': {k: list(v) for k, v in self.points.items()},
        }


def growth_check(
    model: ModelSpec,
    samples: np.ndarray,
    *,
    p_max=10.0,
    n_p=11,
    m_max=10.0,
    n_m=41,
    raise_on_failure=True,
) -> GrowthReport:
    """Check the structural sandwiches of H, L, f and F on a lattice at every sample point.

    `samples` has shape (d, n). The report keeps the worst slack of each bound; with
    raise_on_failure the first violated bound is raised as GrowthBoundViolation.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples.reshape(1, -1)
    if samples.size == 0:
        raise ValueError('The sample set is empty.')

    d, n = samples.shape
    report = GrowthReport()

    axis = np.linspace(-p_max, p_max, n_p)
    lattice = np.stack(np.meshgrid(*([axis] * d), indexing='ij')).reshape(d, 1, -1)
    x = samples.reshape(d, n, 1)
    coefs = model.at(x)
    norm2 = _dot(lattice, lattice)

    g_plus = model.gamma_H_plus(x)
    g_minus = model.gamma_H_minus(x)
    g_f = model.gamma_f(x)
    c_H, c_f, p = model.c_H, model.c_f, model.p

    H = coefs.hamiltonian(lattice)
    report.record('hamiltonian_lower', H - (norm2 / (2 * c_H) - g_minus), samples)
    report.record('hamiltonian_upper', c_H * norm2 / 2 + g_plus - H, samples)

    L = coefs.lagrangian(lattice)
    report.record('lagrangian_lower', L - (norm2 / (2 * c_H) - g_plus), samples)
    report.record('lagrangian_upper', c_H * norm2 / 2 + g_minus - L, samples)

    mirrored = lattice[:, :, ::-1]
    midpoint = 0.5 * (lattice + mirrored)
    convex = 0.5 * H + 0.5 * coefs.hamiltonian(mirrored) - coefs.hamiltonian(midpoint)
    report.record('hamiltonian_convexity', convex, samples)

    m = np.linspace(0.0, m_max, n_m).reshape(1, -1)
    f = coefs.coupling_f(m)
    report.record('coupling_lower', f - (m ** (p - 1) / c_f**p - g_f), samples)
    report.record('coupling_upper', c_f**p * m ** (p - 1) + g_f - f, samples)
    report.record('coupling_monotone', np.diff(f, axis=-1), samples, strict=True)

    F = coefs.F(m)
    report.record('F_lower', F - (m**p / (p * c_f**p) - g_f * m), samples)
    report.record('F_upper', c_f**p * m**p / p + g_f * m - F, samples)

    g = coefs.g.reshape(n, 1)
    a = coefs.a.reshape(n, 1)
    report.record('metric_range', np.minimum(g - 1.0 / c_H, c_H - g), samples)
    report.record('weight_range', np.minimum(a - c_f**-p, c_f**p - a), samples)

    if report.failed:
        first = report.failed[0]
        logger.warning(f'Growth check failed: {", ".join(report.failed)}.')
        if raise_on_failure:
            raise GrowthBoundViolation(first, report.points[first], report.slack[first], report)
    else:
        logger.debug(f'Growth check passed on {n} samples.')

    return report


def positivity_check(model: ModelSpec, samples: np.ndarray) -> dict[str, float]:
    """The nonnegativity convention f >= 0, L >= 0 used by the path viewpoint.

    For the supported families min_m f = V_f and min_v L = V_H.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples.reshape(1, -1)
    coefs = model.at(samples)
    minima = {'f': float(np.min(coefs.V_f)), 'L': float(np.min(coefs.V_H))}
    for term, value in minima.items():
        if value < 0:
            raise PositivityConventionError(term, value)
    return minima


def _function_to_json(fn: SpatialFunction, name: str, base: str) -> Any:
    if fn.is_constant:
        return fn.constant
    values = fn.values
    grid = GridSpec(values.ndim, 2, values.shape[0], fn.R)  # type: ignore
    stem = os.path.splitext(os.path.basename(base))[0]
    rel = f'{stem}.{name}.field'
    write_field(os.path.join(os.path.dirname(base) or '.', rel), grid, values, 'scalar')  # type: ignore
    return {'field': rel}


def _function_from_json(value: Any, name: str, base_dir: str) -> SpatialFunction:
    if isinstance(value, dict):
        if 'field' not in value:
            raise ModelSpecError(f'{name}: a field reference needs the "field" key.')
        path = os.path.join(base_dir, value['field'])
        try:
            header, data = read_field(path)
        except FieldFormatError as error:
            raise ModelSpecError(f'{name}: {error}')
        if not header.is_slice:
            raise ModelSpecError(f'{name}: the field "{path}" must be a spatial slice (nt = 0).')
        return SpatialFunction(data, R=header.R, source=value['field'])  # type: ignore
    if type(value) is bool or not isinstance(value, (int, float)):
        raise ModelSpecError(f'{name}: expected a number or a field reference, got {value!r}.')
    return SpatialFunction(float(value))


def model_from_dict(data: dict[str, Any], base_dir='.') -> ModelSpec:
    try:
        hamiltonian = data.get('hamiltonian', {})
        coupling = data.get('coupling', {})
        constants = data.get('constants', {})
        z_raw = hamiltonian.get('z', 0.0)
        if isinstance(z_raw, list):
            z: Any = [_function_from_json(zi, f'z[{i}]', base_dir) for i, zi in enumerate(z_raw)]
        else:
            z = _function_from_json(z_raw, 'z', base_dir)
        return ModelSpec(
            float(data.get('p', 2.0)),
            g=_function_from_json(hamiltonian.get('g', 1.0), 'g', base_dir),
            z=z,
            V_H=_function_from_json(hamiltonian.get('V_H', 0.0), 'V_H', base_dir),
            a=_function_from_json(coupling.get('a', 1.0), 'a', base_dir),
            V_f=_function_from_json(coupling.get('V_f', 0.0), 'V_f', base_dir),
            c_H=float(constants.get('c_H', 1.0)),
            c_H_plus=float(constants.get('c_H_plus', 1.0)),
            c_H_minus=float(constants.get('c_H_minus', 1.0)),
            c_f=float(constants.get('c_f', 1.0)),
        )
    except (AttributeError, TypeError, ValueError) as error:
        raise ModelSpecError(str(error))


def load_model(path: str) -> ModelSpec:
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as error:
        raise ModelSpecError(f'cannot read "{path}": {error}')
    if not isinstance(data, dict):
        raise ModelSpecError(f'"{path}" must hold a JSON object.')
    return model_from_dict(data, os.path.dirname(path) or '.')


def model_to_dict(model: ModelSpec, path: str) -> dict[str, Any]:
    hamiltonian: dict[str, Any] = {
        'g': _function_to_json(model.g, 'g', path),
        'V_H': _function_to_json(model.V_H, 'V_H', path),
    }
    if model.z is None:
        hamiltonian['z'] = 0.0
    else:
        hamiltonian['z'] = [_function_to_json(zi, f'z{i}', path) for i, zi in enumerate(model.z)]
    return {
        'p': model.p,
        'hamiltonian': hamiltonian,
        'coupling': {
            'a': _function_to_json(model.a, 'a', path),
            'V_f': _function_to_json(model.V_f, 'V_f', path),
        },
        'constants': {
            'c_H': model.c_H,
            'c_H_plus': model.c_H_plus,
            'c_H_minus': model.c_H_minus,
            'c_f': model.c_f,
        },
    }


def dump_model(model: ModelSpec, path: str) -> None:
    """Write the model JSON; sampled coefficients go to sibling field files."""
    data = model_to_dict(model, path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=4)
        f.flush()
        os.fsync(f.fileno())
