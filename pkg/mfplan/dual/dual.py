from __future__ import annotations

import logging

from typing import Any, TYPE_CHECKING

import numpy as np

from mfplan.grid import (
    GridSpec,
    continuity_residual,
    interp_time_to_center,
    weighted_norms,
    boundary_mass,
    slice_masses,
)
from mfplan.model import Coefficients, ModelSpec
from mfplan.dual.exceptions import DualityIdentityDrift
from mfplan.utils import to_jsonable


if TYPE_CHECKING:
    from mfplan.primal import Solution


logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-9


def time_traces(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """u at t = 0 and t = 1, extrapolated half a cell with the one-sided time difference."""
    return 1.5 * u[0] - 0.5 * u[1], 1.5 * u[-1] - 0.5 * u[-2]


def gauge(grid: GridSpec, u: np.ndarray, m1: np.ndarray) -> np.ndarray:
    """Shift u by a constant so that the final trace integrates to zero against m1."""
    _, u1 = time_traces(u)
    mass = grid.mass(m1)
    shift = float(np.sum(u1 * m1)) * grid.cell_volume / mass if mass > 0 else 0.0
    return u - shift


def derivatives(grid: GridSpec, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered differences in time and space, one-sided at the edges."""
    u = grid.check_scalar(u, 'u')
    dt_u = np.gradient(u, grid.dt, axis=0, edge_order=1)
    du = np.stack([np.gradient(u, grid.dx, axis=1 + i, edge_order=1) for i in range(grid.d)])
    return dt_u, du


def hj_expression(coefs: Coefficients, grid: GridSpec, u: np.ndarray) -> np.ndarray:
    dt_u, du = derivatives(grid, u)
    return -dt_u + coefs.hamiltonian(du)


def clamp_alpha(coefs: Coefficients, alpha: np.ndarray) -> np.ndarray:
    """alpha >= f(x, 0) pointwise; F* vanishes below that level anyway."""
    return np.maximum(alpha, np.broadcast_to(coefs.V_f, np.shape(alpha)))


def recover_alpha(model: ModelSpec, grid: GridSpec, u: np.ndarray, m_c: np.ndarray) -> np.ndarray:
    coefs = model.on_grid(grid)
    price = coefs.coupling_f(np.maximum(m_c, 0.0))
    return clamp_alpha(coefs, np.maximum(price, hj_expression(coefs, grid, u)))


def recover_dual_fields(
    model: ModelSpec, grid: GridSpec, multiplier: np.ndarray, m: np.ndarray, m1: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    u = gauge(grid, grid.check_scalar(multiplier, 'u'), m1)
    alpha = recover_alpha(model, grid, u, interp_time_to_center(grid, m))
    return u, alpha


def recover_dual(model: ModelSpec, solution: Solution) -> tuple[np.ndarray, np.ndarray]:
    """(u, alpha) from the constraint multiplier stored on the solution.

    alpha is the larger of the congestion price f(x, m) and the Hamilton-Jacobi expression
    -D_t u + H(x, D_x u) in every cell, clamped below by f(x, 0). The HJ residual of the
    recovered pair is zero.
    """
    return recover_dual_fields(model, solution.grid, solution.u, solution.m, solution.m1)


def dual_energy(
    model: ModelSpec, grid: GridSpec, u: np.ndarray, alpha: np.ndarray, m0: np.ndarray, m1: np.ndarray
) -> float:
    u = grid.check_scalar(u, 'u')
    alpha = grid.check_scalar(alpha, 'alpha')
    u0, u1 = time_traces(u)
    coefs = model.on_grid(grid)
    endpoint = float(np.sum(u0 * m0) - np.sum(u1 * m1)) * grid.cell_volume
    return endpoint - float(np.sum(coefs.F_star(alpha))) * grid.volume


def hj_residual(model: ModelSpec, grid: GridSpec, u: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Per-cell positive part of -D_t u + H(x, D_x u) - alpha."""
    coefs = model.on_grid(grid)
    return np.maximum(hj_expression(coefs, grid, u) - grid.check_scalar(alpha, 'alpha'), 0.0)


class DiagnosticsReport:
    __slots__ = (
        'B',
        'A',
        'gap',
        'rel_gap',
        'yh_integral',
        'yf_integral',
        'hj_violation',
        'hj_violation_support',
        'defect_mass',
        'continuity_residual',
        'mass_drift',
        'negative_mass',
        'boundary_mass',
        'density_floor',
        'per_slice',
    )

    def __init__(self, **values: Any) -> None:
        for name in self.__slots__:
            setattr(self, name, values[name])

    def __repr__(self) -> str:
        return (
            f'DiagnosticsReport(B={self.B:.6g}, A={self.A:.6g}, gap={self.gap:.3g}, '
            f'yh={self.yh_integral:.3g}, yf={self.yf_integral:.3g}, hj={self.hj_violation:.3g}, '
            f'defect={self.defect_mass:.3g})'
        )

    def to_dict(self) -> dict[str, Any]:
        return to_jsonable({name: getattr(self, name) for name in self.__slots__})

    def certificates(self) -> dict[str, float]:
        """Scale-free certificate values, each passing when it is at most its tolerance.

        The gap is signed: a dual value above the primal one is reported by weak_duality, a
        negative contact defect by defect, and neither is absorbed into gap.
        """
        scale = max(1.0, abs(self.B))
        return {
            'gap': self.rel_gap,
            'weak_duality': max(0.0, -self.rel_gap),
            'defect': max(0.0, -self.defect_mass) / scale,
            'residual': self.continuity_residual,
            'hj': self.hj_violation_support / scale,
        }


def duality_report(model: ModelSpec, solution: Solution, *, check_identity=True) -> DiagnosticsReport:
    """All certificate quantities of a solved instance.

    The defect mass is the part of the gap not explained by the two Fenchel gaps, so
    gap = defect + int Y_H m + int Y_F holds by construction; the check guards against drift.
    """
    from mfplan.primal.energy import primal_energy

    grid = solution.grid
    coefs = model.on_grid(grid)
    floor = solution.density_floor
    m_c = interp_time_to_center(grid, solution.m)
    support = m_c > floor
    density = np.maximum(m_c, 0.0)

    B = primal_energy(model, grid, solution.m, solution.w, floor=floor)
    A = dual_energy(model, grid, solution.u, solution.alpha, solution.m0, solution.m1)
    gap = B - A

    _, du = derivatives(grid, solution.u)
    yh_cells = np.where(support, coefs.gap_YH(du, solution.v) * density, 0.0)
    yh = float(np.sum(yh_cells)) * grid.volume
    yf = float(np.sum(coefs.gap_YF(density, solution.alpha))) * grid.volume

    hj = hj_residual(model, grid, solution.u, solution.alpha)
    hj_total = float(np.sum(hj)) * grid.volume
    hj_support = float(np.sum(hj[support])) * grid.volume

    defect = gap - yh - yf
    if check_identity:
        parts = defect + yh + yf
        if abs(parts - gap) > IDENTITY_TOLERANCE * max(1.0, abs(gap)):
            raise DualityIdentityDrift(gap, parts)

    masses = slice_masses(grid, solution.m)
    norms = weighted_norms(grid, solution.m, model.p)
    per_slice = dict(norms['per_slice'])
    per_slice['boundary_mass'] = boundary_mass(grid, solution.m)
    negative = float(np.sum(np.minimum(solution.m, 0.0))) * grid.cell_volume * grid.dt

    report = DiagnosticsReport(
        B=B,
        A=A,
        gap=gap,
        rel_gap=gap / max(1.0, abs(B)),
        yh_integral=yh,
        yf_integral=yf,
        hj_violation=hj_total,
        hj_violation_support=hj_support,
        defect_mass=defect,
        continuity_residual=float(np.max(np.abs(continuity_residual(grid, solution.m, solution.w)))),
        mass_drift=float(np.max(np.abs(masses - masses[0]))),
        negative_mass=negative,
        boundary_mass=float(np.max(per_slice['boundary_mass'])),
        density_floor=floor,
        per_slice=per_slice,
    )
    logger.debug(repr(report))
    return report
