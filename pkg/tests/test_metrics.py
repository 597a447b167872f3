import numpy as np
import pytest

from mfplan.cli import generate
from mfplan.grid import GridSpec
from mfplan.metrics import (
    DensityDomainError,
    EmptyParameterGrid,
    HeatTimeError,
    TimeRangeError,
    UnsupportedDimension,
    displacement_interpolation_1d,
    displacement_moment_1d,
    fisher_information,
    geodesic_defect,
    heat_connector,
    heat_path_estimates,
    kl_cost,
    kl_distance,
    kl_path_length,
    kl_upper_bound,
    w1_density,
    w1_samples,
    w2_1d,
)
from mfplan.settings import SolverConfig


@pytest.fixture
def line() -> GridSpec:
    return GridSpec(1, 8, 32, 2.0)


@pytest.fixture
def boxes(line):
    """Unit boxes on [-1, 0] and [0, 1], aligned with the cell faces."""
    return generate('box', line, {'center': -0.5, 'width': 1.0}), generate('box', line, {'center': 0.5, 'width': 1.0})


@pytest.fixture
def kl_config() -> SolverConfig:
    return SolverConfig(max_iters=20, check_every=10)


def test_translated_boxes(line, boxes):
    m0, m1 = boxes
    assert w2_1d(line, m0, m1) == pytest.approx(1.0, abs=1e-12)
    assert w1_density(line, m0, m1) == pytest.approx(1.0, abs=1e-12)

    middle = displacement_interpolation_1d(line, m0, m1, 0.5)
    expected = generate('box', line, {'center': 0.0, 'width': 1.0})
    assert np.allclose(middle, expected, atol=1e-10)
    assert np.allclose(displacement_interpolation_1d(line, m0, m1, 0.0), m0, atol=1e-12)
    assert geodesic_defect(line, m0, m1, 0.25, 0.75) <= 1e-10


def test_w2_is_a_distance(line):
    a = generate('gaussian', line, {'center': -0.7, 'sigma': 0.2})
    b = generate('gaussian', line, {'center': 0.1, 'sigma': 0.4})
    c = generate('bimodal', line, {'centers': [-1.0, 1.0]})
    assert w2_1d(line, a, a) == pytest.approx(0.0, abs=1e-12)
    assert w2_1d(line, a, b) == pytest.approx(w2_1d(line, b, a), abs=1e-12)
    assert w2_1d(line, a, c) <= w2_1d(line, a, b) + w2_1d(line, b, c) + 1e-12
    assert w1_density(line, a, b) <= w2_1d(line, a, b) + 2.0 * line.dx


def test_w1_samples(grid1, uniform1):
    assert w1_samples(grid1, grid1.centers, uniform1) == pytest.approx(0.0, abs=1e-12)
    assert w1_samples(grid1, grid1.centers + 0.1, uniform1) == pytest.approx(0.1)


def test_transport_errors(line, boxes, grid2):
    m0, m1 = boxes
    with pytest.raises(TimeRangeError):
        displacement_interpolation_1d(line, m0, m1, 1.5)
    bad = m0.copy()
    bad[0] = -1.0
    with pytest.raises(DensityDomainError):
        w2_1d(line, bad, m1)
    with pytest.raises(DensityDomainError):
        w2_1d(line, np.zeros(line.cells), m1)
    with pytest.raises(UnsupportedDimension):
        w2_1d(grid2, np.ones(grid2.cells), np.ones(grid2.cells))


def test_heat_connector_conserves_mass(grid2):
    m = generate('ring', grid2, {'radius': 1.0})
    for t in (1e-3, 0.1, 10.0):
        heated = heat_connector(grid2, m, t)
        assert grid2.mass(heated) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(heat_connector(grid2, m, 1e3), 1.0 / 16.0)
    with pytest.raises(HeatTimeError):
        heat_connector(grid2, m, 0.0)


def test_heat_connector_returns_to_the_density_as_time_vanishes(grid2):
    m = generate('ring', grid2, {'radius': 1.0})
    errors = [
        float(np.sum(np.abs(heat_connector(grid2, m, t) - m))) * grid2.cell_volume for t in (1e-2, 1e-4, 1e-6, 1e-8)
    ]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] <= 1e-5


def test_heat_path_of_a_point_mass():
    grid = GridSpec(1, 2, 64, 2.0)
    m = np.zeros(grid.cells)
    m[32] = 1.0 / grid.dx
    estimates = heat_path_estimates(grid, m, 2.0)

    assert estimates['resolved'].all()
    assert estimates['lp_slope_expected'] == -0.25
    assert abs(estimates['lp_slope'] - estimates['lp_slope_expected']) <= 0.05
    assert np.all(estimates['fisher_ratio'] <= 1.1)
    assert np.all(np.diff(estimates['lp_norm']) < 0)
    with pytest.raises(HeatTimeError):
        heat_path_estimates(grid, m, 2.0, np.array([0.1, -1.0]))


def test_fisher_information_of_uniform(grid1, uniform1):
    assert fisher_information(grid1, uniform1) == 0.0


def test_kl_stationary_cost(grid1, uniform1, kl_config):
    cost = kl_cost(grid1, uniform1, uniform1, 1.0, 2.0, kl_config)
    assert cost == pytest.approx(0.625, abs=1e-9)
    assert cost <= kl_upper_bound(grid1, uniform1, uniform1, 1.0, 2.0)


def test_kl_distance(grid1, uniform1, kl_config):
    report = kl_distance(grid1, uniform1, uniform1, [2.0, 0.5, 1.0], 2.0, kl_config)
    assert report['argmin'] == 2.0
    assert report['d_KL'] == pytest.approx(0.3125, abs=1e-9)
    assert report['costs']['0.5'] == pytest.approx(1.25, abs=1e-9)
    assert report['W2'] == pytest.approx(0.0, abs=1e-12)
    assert report['refined'] is None
    assert all(report['upper_bounds'][a] >= c for a, c in report['costs'].items())

    pooled = kl_distance(grid1, uniform1, uniform1, [0.5, 1.0, 2.0], 2.0, kl_config, threads=2)
    assert pooled['costs'] == report['costs']


def test_kl_refinement_only_lowers(grid1, uniform1, kl_config):
    report = kl_distance(grid1, uniform1, uniform1, [1.0, 2.0], 2.0, kl_config, refine=True)
    assert report['refined']['evaluations'] >= 1
    assert report['d_KL'] <= min(report['costs'].values())


def test_kl_distance_errors(grid1, uniform1):
    with pytest.raises(EmptyParameterGrid):
        kl_distance(grid1, uniform1, uniform1, [], 2.0)
    with pytest.raises(ValueError):
        kl_distance(grid1, uniform1, uniform1, [0.0, 1.0], 2.0)


def test_kl_path_length_of_a_resting_path(stationary):
    assert kl_path_length(stationary, 2.0) == 0.0


def _random_pairs(grid, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield tuple(
            generate(
                'bimodal',
                grid,
                {
                    'centers': rng.uniform(-1.2, 1.2, 2),
                    'weights': rng.uniform(0.2, 1.0, 2),
                    'sigma': rng.uniform(0.15, 0.4),
                },
            )
            for _ in range(2)
        )


def test_displacement_convexity(line):
    for m0, m1 in _random_pairs(line, 20, seed=11):
        moments = [displacement_moment_1d(line, m0, m1, t) for t in (0.0, 1.0)]
        for t in (0.25, 0.5, 0.75):
            mt = displacement_interpolation_1d(line, m0, m1, t)
            for p in (2.0, 3.0):
                norms = [float(np.sum(m**p)) * line.dx for m in (m0, mt, m1)]
                assert (1.0 - t) * norms[0] + t * norms[2] - norms[1] >= -1e-10
            moment = displacement_moment_1d(line, m0, m1, t)
            assert (1.0 - t) * moments[0] + t * moments[1] - moment >= -1e-10


def test_box_moment(line, boxes):
    m0, m1 = boxes
    # uniform on [-0.5, 0.5]
    assert displacement_moment_1d(line, m0, m1, 0.5) == pytest.approx(1.0 / 12.0, abs=1e-12)
    with pytest.raises(TimeRangeError):
        displacement_moment_1d(line, m0, m1, -0.1)


@pytest.mark.parametrize('a, b', [(0.5, 1.0), (0.5, 2.0), (1.0, 2.0), (2.0, 0.5)])
def test_kl_rescaling(grid1, uniform1, kl_config, a, b):
    cost_a = kl_cost(grid1, uniform1, uniform1, a, 2.0, kl_config)
    cost_b = kl_cost(grid1, uniform1, uniform1, b, 2.0, kl_config)
    assert cost_a <= max(a / b, b / a) * cost_b + 1e-2 * cost_a


def test_kl_symmetry(grid1, gaussians1, kl_config):
    m0, m1 = gaussians1
    forward = kl_cost(grid1, m0, m1, 1.0, 2.0, kl_config)
    backward = kl_cost(grid1, m1, m0, 1.0, 2.0, kl_config)
    assert forward == pytest.approx(backward, rel=1e-6)
