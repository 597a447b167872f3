from __future__ import annotations

import logging
import threading

from typing import Optional

import numpy as np

from mfplan.grid import (
    GridSpec,
    Momentum,
    continuity_residual,
    project_continuity,
    interp_time_to_center,
    interp_center_to_time,
    interp_face_to_center,
    interp_center_to_face,
    validate_endpoint,
)
from mfplan.model import ModelSpec
from mfplan.settings import SolverConfig
from mfplan.primal.energy import primal_energy
from mfplan.primal.exceptions import StepSizeError, NonFiniteEnergy, SolverBusy
from mfplan.primal.initialize import initialize_flow
from mfplan.primal.prox import prox_cells
from mfplan.primal.solution import History, Solution


logger = logging.getLogger(__name__)

STEP_SAFETY = 0.95
POWER_SEED = 0


def _norm2(*arrays: np.ndarray) -> float:
    return float(sum(np.sum(a * a) for a in arrays))


class PlanningSolver:
    """Primal-dual splitting for the planning problem.

    The primal unknown is the staggered flow (m, w), constrained to the continuity equation with
    pinned endpoints; the dual unknown lives on the space-time cells and pairs with the
    cell-centered interpolation K of the flow. Each iteration takes the cellwise prox of the
    action (through the Moreau identity), a projected primal step and an over-relaxation.
    The multiplier of the projection, rescaled by -1/tau, is the value function u.
    """

    def __init__(self, model: ModelSpec, grid: GridSpec, config: Optional[SolverConfig] = None) -> None:
        model.check_grid(grid)
        self.model = model
        self.grid = grid
        self.config = config or SolverConfig()
        self._lock = threading.Lock()
        self._norm: Optional[float] = None

    def _apply_K(self, m: np.ndarray, w: Momentum) -> tuple[np.ndarray, np.ndarray]:
        return interp_time_to_center(self.grid, m), interp_face_to_center(self.grid, w)

    def _apply_KT(self, phi_m: np.ndarray, phi_w: np.ndarray) -> tuple[np.ndarray, Momentum]:
        return (
            interp_center_to_time(self.grid, phi_m, adjoint=True),
            interp_center_to_face(self.grid, phi_w, adjoint=True),
        )

    def operator_norm(self) -> float:
        """|K| by power iteration on K^T K from a seeded random start."""
        if self._norm is not None:
            return self._norm

        rng = np.random.default_rng(POWER_SEED)
        m = rng.standard_normal(self.grid.density_shape)
        w = tuple(rng.standard_normal(self.grid.face_shape(i)) for i in range(self.grid.d))
        estimate = 0.0
        for _ in range(self.config.power_iters):
            size = np.sqrt(_norm2(m, *w))
            m = m / size
            w = tuple(wi / size for wi in w)
            km, kw = self._apply_K(m, w)
            m, w = self._apply_KT(km, kw)
            estimate = np.sqrt(np.sqrt(_norm2(m, *w)))

        self._norm = float(estimate)
        return self._norm

    def step_sizes(self) -> tuple[float, float, float]:
        norm = self.operator_norm()
        tau = self.config.tau_primal
        sigma = self.config.tau_dual
        auto = STEP_SAFETY / norm

        if tau == 0 and sigma == 0:
            tau = sigma = auto
        elif tau == 0:
            tau = auto**2 / sigma
        elif sigma == 0:
            sigma = auto**2 / tau

        if tau * sigma * norm**2 >= 1:
            raise StepSizeError(tau, sigma, norm)
        return tau, sigma, norm

    def _floor(self, m_c: np.ndarray) -> float:
        if self.config.density_floor > 0:
            return self.config.density_floor
        return self.config.density_floor_rel * max(float(np.max(m_c)), 0.0)

    def _dual_pair(self, psi: np.ndarray, tau: float, m: np.ndarray, m1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        from mfplan.dual import recover_dual_fields

        return recover_dual_fields(self.model, self.grid, -psi / tau, m, m1)

    def solve(self, m0: np.ndarray, m1: np.ndarray) -> Solution:
        if not self._lock.acquire(blocking=False):
            raise SolverBusy()
        try:
            return self._solve(m0, m1)
        finally:
            self._lock.release()

    def _solve(self, m0: np.ndarray, m1: np.ndarray) -> Solution:
        from mfplan.dual import dual_energy

        grid = self.grid
        cfg = self.config
        workers = cfg.threads
        m0 = validate_endpoint(grid, m0, 'm0')
        m1 = validate_endpoint(grid, m1, 'm1')

        tau, sigma, norm = self.step_sizes()
        logger.info(f'Solving on {grid}: tau={tau:.4g}, sigma={sigma:.4g}, |K|={norm:.6f}, theta={cfg.theta}.')

        coefs = self.model.on_grid(grid)
        m, w = initialize_flow(grid, cfg.init_strategy, m0, m1, heat_time=cfg.heat_time, workers=workers)
        bar_m, bar_w = m, w
        phi_m = grid.zeros_scalar()
        phi_w = np.zeros((grid.d, *grid.scalar_shape))
        psi = grid.zeros_scalar()

        history = History()
        converged = False
        floor = self._floor(interp_time_to_center(grid, m))
        u = alpha = grid.zeros_scalar()
        iteration = 0

        for iteration in range(1, cfg.max_iters + 1):
            km, kw = self._apply_K(bar_m, bar_w)
            y_m = phi_m + sigma * km
            y_w = phi_w + sigma * kw
            v_m, v_w = prox_cells(coefs, y_m / sigma, y_w / sigma, 1.0 / sigma, max_iters=cfg.newton_max_iters)
            new_phi_m = y_m - sigma * v_m
            new_phi_w = y_w - sigma * v_w

            kt_m, kt_w = self._apply_KT(new_phi_m, new_phi_w)
            x_m = m - tau * kt_m
            x_w = tuple(wi - tau * ki for wi, ki in zip(w, kt_w))
            new_m, new_w, psi = project_continuity(grid, x_m, x_w, m0, m1, return_potential=True, workers=workers)

            if not (np.all(np.isfinite(new_m)) and np.all(np.isfinite(new_phi_m))):
                raise NonFiniteEnergy(iteration, 'the primal-dual iterate')

            delta = _norm2(new_m - m, *(a - b for a, b in zip(new_w, w)), new_phi_m - phi_m, new_phi_w - phi_w)
            scale = _norm2(new_m, *new_w, new_phi_m, new_phi_w)
            residual = np.sqrt(delta) / max(1.0, np.sqrt(scale))

            bar_m = new_m + cfg.theta * (new_m - m)
            bar_w = tuple(a + cfg.theta * (a - b) for a, b in zip(new_w, w))
            m, w, phi_m, phi_w = new_m, new_w, new_phi_m, new_phi_w

            if iteration % cfg.check_every == 0 or iteration == cfg.max_iters:
                floor = self._floor(interp_time_to_center(grid, m))
                u, alpha = self._dual_pair(psi, tau, m, m1)
                B = primal_energy(self.model, grid, m, w, floor=floor)
                if not np.isfinite(B):
                    raise NonFiniteEnergy(iteration, 'the action')
                A = dual_energy(self.model, grid, u, alpha, m0, m1)
                cont = float(np.max(np.abs(continuity_residual(grid, m, w))))
                row = history.append(iteration, B, A, residual, cont)

                # signed gap, A above B beyond the slack never stops
                if -cfg.stop_dual_slack <= row[4] <= cfg.stop_gap and residual <= cfg.stop_residual:
                    converged = True
                    logger.info(f'Converged at iteration {iteration}: B={B:.8g}, A={A:.8g}, rel gap={row[4]:.3g}.')
                    break

            if iteration % cfg.log_every == 0:
                last = history.last or {}
                logger.info(
                    f'Iteration {iteration}: residual={residual:.3e}, '
                    f'B={last.get("B", float("nan")):.8g}, rel gap={last.get("rel_gap", float("nan")):.3e}.'
                )

        if not converged:
            logger.warning(f'Iteration budget of {cfg.max_iters} exhausted without meeting the stop criteria.')

        return Solution(
            model=self.model,
            grid=grid,
            m0=m0,
            m1=m1,
            m=m,
            w=w,
            u=u,
            alpha=alpha,
            density_floor=floor,
            history=history,
            iterations=iteration,
            converged=converged,
            config=cfg.as_dict(),
        )


def solve_planning(
    model: ModelSpec, grid: GridSpec, m0: np.ndarray, m1: np.ndarray, config: Optional[SolverConfig] = None
) -> Solution:
    return PlanningSolver(model, grid, config).solve(m0, m1)
