import numpy as np
import pytest

from mfplan.grid import GridSpec, continuity_residual, slice_masses
from mfplan.model import ModelSpec
from mfplan.primal import (
    HISTORY_COLUMNS,
    PlanningSolver,
    SolverBusy,
    StepSizeError,
    UnsupportedStrategy,
    apriori_check,
    centered,
    energy_density,
    initialize_flow,
    primal_energy,
    prox_action,
    prox_objective,
    prox_stationarity,
    recover_velocity,
    solve_planning,
)
from mfplan.settings import SolverConfig


@pytest.fixture
def drifted() -> ModelSpec:
    return ModelSpec(2.0, g=1.5, z=[0.3], V_H=0.2, a=1.0, V_f=0.1)


def test_prox_without_flux_solves_the_scalar_equation(quadratic):
    x = np.linspace(-1.0, 1.0, 5).reshape(1, 5)
    m, w = prox_action(quadratic, np.full(5, 3.0), np.zeros((1, 5)), x, 0.5)
    # m - 3 + 0.5 m = 0
    assert np.allclose(m, 2.0, atol=1e-12)
    assert np.all(w == 0.0)


def test_prox_clips_at_zero(quadratic):
    x = np.zeros((1, 3))
    m, w = prox_action(quadratic, np.array([-1.0, -0.5, 0.0]), np.zeros((1, 3)), x, 0.5)
    assert np.all(m == 0.0)
    assert np.all(w == 0.0)


def test_prox_stationarity(drifted):
    rng = np.random.default_rng(0)
    x = rng.uniform(-2.0, 2.0, (1, 100))
    m_t = rng.uniform(0.5, 2.0, 100)
    w_t = rng.uniform(-1.0, 1.0, (1, 100))
    m, w = prox_action(drifted, m_t, w_t, x, 0.3)
    assert np.all(m > 0)
    res_m, res_w = prox_stationarity(drifted.at(x), m, w, m_t, w_t, 0.3)
    assert np.max(np.abs(res_m)) <= 1e-9
    assert np.max(np.abs(res_w)) <= 1e-9


def test_prox_beats_random_candidates(drifted):
    rng = np.random.default_rng(1)
    x = np.zeros((1, 1))
    m_t, w_t, tau = np.array([1.2]), np.array([[0.4]]), 0.3
    m, w = prox_action(drifted, m_t, w_t, x, tau)
    best = prox_objective(drifted.at(x), m, w, m_t, w_t, tau)

    n = 10000
    candidates_m = np.abs(m + rng.normal(0.0, 0.3, n))
    candidates_w = w + rng.normal(0.0, 0.3, (1, n))
    values = prox_objective(drifted.at(np.zeros((1, n))), candidates_m, candidates_w, m_t, w_t, tau)
    assert np.all(values >= best - 1e-12)


def test_prox_rejects_bad_steps(quadratic):
    with pytest.raises(ValueError):
        prox_action(quadratic, np.ones(2), np.zeros((1, 2)), np.zeros((1, 2)), 0.0)


def test_stationary_energy(grid1, uniform1, quadratic):
    m = np.broadcast_to(uniform1, grid1.density_shape)
    assert primal_energy(quadratic, grid1, m, grid1.zeros_momentum()) == pytest.approx(0.125)

    negative = m.copy()
    negative[3, 4] = -1.0
    density = energy_density(quadratic, grid1, negative, grid1.zeros_momentum())
    assert np.isinf(density).any()
    assert primal_energy(quadratic, grid1, negative, grid1.zeros_momentum()) == np.inf
    assert np.isfinite(primal_energy(quadratic, grid1, negative, grid1.zeros_momentum(), floor=1e-8))


@pytest.mark.parametrize('strategy', ['linear-blend', 'displacement', 'heat-connector'])
def test_initial_flows_are_feasible(grid1, gaussians1, strategy):
    m0, m1 = gaussians1
    m, w = initialize_flow(grid1, strategy, m0, m1)
    assert np.max(np.abs(continuity_residual(grid1, m, w))) <= 1e-10
    assert np.max(np.abs(slice_masses(grid1, m) - 1.0)) <= 1e-10


def test_unsupported_strategies(grid2):
    m = np.full(grid2.cells, 1.0 / 16.0)
    with pytest.raises(UnsupportedStrategy):
        initialize_flow(grid2, 'displacement', m, m)
    with pytest.raises(UnsupportedStrategy):
        initialize_flow(grid2, 'teleport', m, m)


def test_velocity_recovery(grid1, gaussians1):
    m0, m1 = gaussians1
    m, w = initialize_flow(grid1, 'linear-blend', m0, m1)
    with pytest.raises(ValueError):
        recover_velocity(grid1, m, w, -1.0)

    v, mask = recover_velocity(grid1, m, w, 1e-6)
    m_c, w_c = centered(grid1, m, w)
    assert np.all(v[:, ~mask] == 0.0)
    kinetic = np.sum(np.sum(v * v, axis=0)[mask] * m_c[mask])
    brute = np.sum(np.sum(w_c * w_c, axis=0)[mask] / m_c[mask])
    assert kinetic == pytest.approx(brute, rel=1e-12)


def test_step_sizes(grid1, quadratic):
    solver = PlanningSolver(quadratic, grid1)
    norm = solver.operator_norm()
    assert 0.5 < norm <= 1.0 + 1e-12

    tau, sigma, _ = solver.step_sizes()
    assert tau == sigma == pytest.approx(0.95 / norm)

    tau, sigma, _ = PlanningSolver(quadratic, grid1, SolverConfig(tau_primal=0.5)).step_sizes()
    assert tau == 0.5
    assert tau * sigma * norm**2 == pytest.approx(0.95**2)

    with pytest.raises(StepSizeError):
        PlanningSolver(quadratic, grid1, SolverConfig(tau_primal=2.0, tau_dual=2.0)).step_sizes()


def test_stationary_solve(grid1, uniform1, quadratic):
    config = SolverConfig(max_iters=40, check_every=10)
    solution = solve_planning(quadratic, grid1, uniform1, uniform1, config)

    assert solution.iterations <= 40
    assert np.allclose(solution.m, 0.25, atol=1e-12)
    assert all(np.max(np.abs(wi)) <= 1e-12 for wi in solution.w)
    assert solution.history['B'][-1] == pytest.approx(0.125, abs=1e-10)
    assert np.all(solution.alpha >= 0.0)
    assert solution.config['max_iters'] == 40

    last = solution.history.last
    assert tuple(last) == HISTORY_COLUMNS
    assert last['continuity'] <= 1e-10

    with pytest.raises(ValueError):
        solution.m[0, 0] = 1.0


def test_solver_runs_one_solve_at_a_time(grid1, uniform1, quadratic):
    solver = PlanningSolver(quadratic, grid1, SolverConfig(max_iters=5))
    solver._lock.acquire()
    try:
        with pytest.raises(SolverBusy):
            solver.solve(uniform1, uniform1)
    finally:
        solver._lock.release()
    assert solver.solve(uniform1, uniform1).iterations == 5


def test_transport_solve(grid1, gaussians1, quadratic):
    m0, m1 = gaussians1
    config = SolverConfig(max_iters=300, check_every=25)
    solution = solve_planning(quadratic, grid1, m0, m1, config)

    assert 1 <= len(solution.history) <= 12
    assert np.all(solution.history['continuity'] <= 1e-10)
    assert np.max(np.abs(slice_masses(grid1, solution.m) - 1.0)) <= 1e-10
    assert np.all(np.isfinite(solution.history['B']))

    start, start_w = initialize_flow(grid1, 'linear-blend', m0, m1)
    assert solution.history['B'][-1] < primal_energy(quadratic, grid1, start, start_w, floor=1e-8)

    again = solve_planning(quadratic, grid1, m0, m1, config)
    assert again.history.rows() == solution.history.rows()

    checks = apriori_check(quadratic, solution)
    assert 'holder' not in checks['violations']
    assert checks['flux_norm'] <= checks['holder_bound'] * (1.0 + 1e-12)
    assert checks['moments'].shape == (grid1.nt + 1,)


def test_endpoints_are_validated(grid1, uniform1, quadratic):
    bad = uniform1.copy()
    bad[0] = -0.25
    bad[1] += 0.25
    with pytest.raises(ValueError):
        solve_planning(quadratic, grid1, bad, uniform1, SolverConfig(max_iters=5))


def test_energy_is_translation_invariant(grid1, quadratic):
    rng = np.random.default_rng(6)
    m = np.zeros(grid1.density_shape)
    m[:, 4:10] = rng.uniform(0.1, 1.0, (grid1.nt + 1, 6))
    w = np.zeros(grid1.face_shape(0))
    w[:, 5:10] = rng.uniform(-1.0, 1.0, (grid1.nt, 5))

    shifted_m = np.roll(m, 3, axis=1)
    shifted_w = np.roll(w, 3, axis=1)
    before = primal_energy(quadratic, grid1, m, (w,))
    after = primal_energy(quadratic, grid1, shifted_m, (shifted_w,))
    assert np.isfinite(before)
    assert after == pytest.approx(before, abs=1e-12)


def test_time_reversal(grid1, gaussians1, quadratic):
    m0, m1 = gaussians1
    config = SolverConfig(max_iters=60, check_every=20, stop_gap=0.0, stop_dual_slack=0.0)
    forward = solve_planning(quadratic, grid1, m0, m1, config)
    backward = solve_planning(quadratic, grid1, m1, m0, config)
    assert forward.history['B'][-1] == pytest.approx(backward.history['B'][-1], rel=1e-6)
    assert np.allclose(forward.m, backward.m[::-1], atol=1e-8)


def test_solver_commutes_with_lattice_shifts(quadratic):
    grid = GridSpec(1, 8, 32, 2.0)
    bump = np.array([1.0, 3.0, 3.0, 1.0])
    bump = bump / (bump.sum() * grid.cell_volume)
    m0 = np.zeros(grid.cells)
    m1 = np.zeros(grid.cells)
    m0[8:12] = bump
    m1[12:16] = bump

    config = SolverConfig(max_iters=1500, check_every=50, stop_gap=0.0, stop_dual_slack=0.0)
    base = solve_planning(quadratic, grid, m0, m1, config)
    moved = solve_planning(quadratic, grid, np.roll(m0, 4), np.roll(m1, 4), config)

    assert moved.history['B'][-1] == pytest.approx(base.history['B'][-1], rel=1e-3)
    assert np.allclose(moved.m, np.roll(base.m, 4, axis=1), atol=5e-2 * np.max(base.m))
