from __future__ import annotations

import logging

from typing import Any, Union

import numpy as np

from mfplan.model import Coefficients, ModelSpec
from mfplan.primal.exceptions import ProxConvergenceError


logger = logging.getLogger(__name__)

NEWTON_TOLERANCE = 1e-13
MAX_DOUBLINGS = 200


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=0)


class _Cells:
    """Flattened coefficients and targets of the cells taking part in one prox evaluation."""

    __slots__ = ('p', 'g', 'z', 'V_H', 'a', 'V_f', 'm_t', 'w_t', 'tau')

    def __init__(self, coefs: Coefficients, m_t: np.ndarray, w_t: np.ndarray, tau: np.ndarray) -> None:
        shape = m_t.shape
        d = w_t.shape[0]
        self.p = coefs.p
        self.g = np.broadcast_to(coefs.g, shape).ravel()
        self.z = np.broadcast_to(coefs.z, (d, *shape)).reshape(d, -1)
        self.V_H = np.broadcast_to(coefs.V_H, shape).ravel()
        self.a = np.broadcast_to(coefs.a, shape).ravel()
        self.V_f = np.broadcast_to(coefs.V_f, shape).ravel()
        self.m_t = m_t.ravel()
        self.w_t = w_t.reshape(d, -1)
        self.tau = np.broadcast_to(tau, shape).ravel()

    def take(self, idx: np.ndarray) -> _Cells:
        out = object.__new__(_Cells)
        out.p = self.p
        for name in ('g', 'V_H', 'a', 'V_f', 'm_t', 'tau'):
            setattr(out, name, getattr(self, name)[idx])
        out.z = self.z[:, idx]
        out.w_t = self.w_t[:, idx]
        return out

    def phi(self, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reduced optimality function in m and its derivative; strictly increasing in m."""
        s = self.w_t + m * self.z
        D = self.tau + self.g * m
        envelope = _dot(self.z, s) / D - self.g * _dot(s, s) / (2.0 * D**2)
        with np.errstate(divide='ignore', invalid='ignore'):
            f = self.a * m ** (self.p - 1.0) + self.V_f
            df = self.a * (self.p - 1.0) * m ** (self.p - 2.0)
        value = m - self.m_t + self.tau * (f + self.V_H + envelope)
        r = self.z - self.g * s / D
        slope = 1.0 + self.tau * (df + _dot(r, r) / D)
        return value, slope


def prox_cells(
    coefs: Coefficients,
    m_tilde: np.ndarray,
    w_tilde: np.ndarray,
    tau: Union[float, np.ndarray],
    *,
    max_iters: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Cellwise proximal map of the perspective action plus congestion.

    Minimizes L~(x,m,w) + F(x,m) + (|m - m~|^2 + |w - w~|^2) / (2 tau) over m >= 0 in every cell.
    For fixed m the optimal flux is w = m (g w~ - tau z) / (tau + g m); the density solves a
    strictly increasing scalar equation handled by safeguarded Newton with bisection fallback.
    """
    m_t = np.asarray(m_tilde, dtype=float)
    w_t = np.asarray(w_tilde, dtype=float)
    shape = np.broadcast_shapes(m_t.shape, np.shape(coefs.g))
    m_t = np.broadcast_to(m_t, shape)
    w_t = np.broadcast_to(w_t, (w_t.shape[0], *shape))
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr <= 0):
        raise ValueError('The prox step must be positive.')

    cells = _Cells(coefs, m_t, w_t, tau_arr)
    n = cells.m_t.size
    m = np.zeros(n)

    phi0, _ = cells.phi(np.zeros(n))
    active = np.flatnonzero(phi0 < 0)

    if active.size:
        sub = cells.take(active)
        m[active] = _newton(sub, active, shape, max_iters)

    # the flux follows the density; it vanishes with it
    w = m * (cells.g * cells.w_t - cells.tau * cells.z) / (cells.tau + cells.g * m)
    return m.reshape(shape), w.reshape(w_t.shape)


def _newton(cells: _Cells, index: np.ndarray, shape: tuple[int, ...], max_iters: int) -> np.ndarray:
    n = cells.m_t.size
    lo = np.zeros(n)
    hi = np.maximum(cells.m_t, 0.0) + 1.0

    for _ in range(MAX_DOUBLINGS):
        value, _ = cells.phi(hi)
        short = value <= 0
        if not short.any():
            break
        lo = np.where(short, hi, lo)
        hi = np.where(short, 2.0 * hi, hi)
    else:
        stuck = index[short]
        raise ProxConvergenceError(np.stack(np.unravel_index(stuck, shape), axis=-1), max_iters)

    m = np.where((cells.m_t > lo) & (cells.m_t < hi), cells.m_t, 0.5 * (lo + hi))
    done = np.zeros(n, dtype=bool)

    for _ in range(max_iters):
        value, slope = cells.phi(m)
        lo = np.where(value < 0, m, lo)
        hi = np.where(value > 0, m, hi)
        scale = 1.0 + np.abs(cells.m_t) + m
        done = (np.abs(value) <= NEWTON_TOLERANCE * scale) | (hi - lo <= 4.0 * np.finfo(float).eps * (1.0 + hi))
        if done.all():
            break
        with np.errstate(divide='ignore', invalid='ignore'):
            step = m - value / slope
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        m = np.where(done, m, np.where(bad, 0.5 * (lo + hi), step))
    else:
        if not done.all():
            flat = index[~done]
            cells_idx = np.stack(np.unravel_index(flat, shape), axis=-1)
            logger.error(f'Prox Newton failed on {flat.size} cells.')
            raise ProxConvergenceError(cells_idx, max_iters)

    return m


def prox_action(
    model: ModelSpec, m_tilde: Any, w_tilde: Any, x: Any, tau: float, *, max_iters: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """prox_cells at points x of shape (d, ...)."""
    m_tilde = np.asarray(m_tilde, dtype=float)
    w_tilde = np.asarray(w_tilde, dtype=float)
    return prox_cells(model.at(x), m_tilde, w_tilde, tau, max_iters=max_iters)


def prox_objective(
    coefs: Coefficients, m: Any, w: Any, m_tilde: Any, w_tilde: Any, tau: float
) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    dm = m - np.asarray(m_tilde, dtype=float)
    dw = w - np.asarray(w_tilde, dtype=float)
    return coefs.perspective_L(m, w) + coefs.F(m) + (dm**2 + _dot(dw, dw)) / (2.0 * tau)


def prox_stationarity(
    coefs: Coefficients, m: Any, w: Any, m_tilde: Any, w_tilde: Any, tau: float
) -> tuple[np.ndarray, np.ndarray]:
    """First-order residuals (d/dm, d/dw) of the prox objective; meaningful where m > 0."""
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    s = w + coefs.z * m
    gm = coefs.g * m
    with np.errstate(divide='ignore', invalid='ignore'):
        res_w = s / gm + (w - np.asarray(w_tilde, dtype=float)) / tau
        res_m = (
            _dot(coefs.z, s) / gm
            - _dot(s, s) / (2.0 * gm * m)
            + coefs.V_H
            + coefs.coupling_f(np.maximum(m, 0.0))
            + (m - np.asarray(m_tilde, dtype=float)) / tau
        )
    return res_m, res_w
