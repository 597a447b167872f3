import numpy as np
import pytest

from mfplan.grid import GridSpec
from mfplan.model import (
    F_star_numeric,
    GrowthBoundViolation,
    ModelDomainError,
    ModelSpec,
    ModelSpecError,
    PositivityConventionError,
    SpatialFunction,
    dump_model,
    growth_check,
    kl_model,
    legendre_numeric,
    load_model,
    positivity_check,
)


@pytest.fixture
def drifted() -> ModelSpec:
    return ModelSpec(3.0, g=2.0, z=[0.3], V_H=0.1, a=1.5, V_f=0.2, c_H=2.0, c_f=1.2)


@pytest.mark.parametrize(
    'kwargs',
    [{'p': 1.0}, {'p': True}, {'g': 0.0}, {'a': -1.0}, {'z': 0.5}, {'c_H': 0.5}, {'c_H_plus': 0.0}],
)
def test_model_rejects_bad_arguments(kwargs):
    p = kwargs.pop('p', 2.0)
    with pytest.raises(ModelSpecError):
        ModelSpec(p, **kwargs)


def test_model_dimension_checks():
    model = ModelSpec(2.0, z=[0.0, 1.0])
    assert model.d == 2
    assert model.has_drift
    with pytest.raises(ModelSpecError):
        model.check_grid(GridSpec(1, 4, 8, 1.0))
    with pytest.raises(ModelSpecError):
        ModelSpec(2.0, z=[1.0], a=SpatialFunction(np.ones((4, 4)), R=1.0))


def test_legendre_consistency(drifted):
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.uniform(-2.0, 2.0, 1)
        v = rng.uniform(-2.0, 2.0, 1)
        assert abs(float(drifted.lagrangian(x, v)) - legendre_numeric(drifted, x, v)) <= 1e-3


def test_hamiltonian_gradient(drifted):
    rng = np.random.default_rng(1)
    x = rng.uniform(-2.0, 2.0, (1, 20))
    p = rng.uniform(-3.0, 3.0, (1, 20))
    h = 1e-6
    numeric = (drifted.hamiltonian(x, p + h) - drifted.hamiltonian(x, p - h)) / (2.0 * h)
    assert np.allclose(numeric, drifted.hamiltonian_grad_p(x, p)[0], atol=1e-6)


def test_fenchel_young(drifted):
    rng = np.random.default_rng(2)
    x = rng.uniform(-2.0, 2.0, (1, 500))
    m = rng.uniform(0.0, 5.0, 500)
    alpha = rng.uniform(-3.0, 10.0, 500)
    assert np.all(drifted.gap_YF(x, m, alpha) >= -1e-12)

    price = drifted.coupling_f(x, m)
    assert np.max(np.abs(drifted.gap_YF(x, m, price))) <= 1e-9


def test_F_star_zero_set(drifted):
    x = np.zeros((1, 5))
    alpha = np.linspace(-5.0, 0.2, 5)
    assert np.all(drifted.F_star_value(x, alpha) == 0.0)
    assert np.all(drifted.F_star_value(x, np.linspace(0.3, 5.0, 5)) > 0.0)


def test_F_star_matches_numeric_sup(drifted):
    x = np.array([0.4])
    for alpha in (-1.0, 0.5, 2.0, 6.0):
        exact = float(drifted.F_star_value(x, alpha))
        assert F_star_numeric(drifted, x, alpha) == pytest.approx(exact, abs=1e-8)


def test_hamiltonian_gap_vanishes_on_the_gradient(drifted):
    rng = np.random.default_rng(3)
    x = rng.uniform(-2.0, 2.0, (1, 200))
    p = rng.uniform(-5.0, 5.0, (1, 200))
    v = -drifted.hamiltonian_grad_p(x, p)
    assert np.max(np.abs(drifted.gap_YH(x, p, v))) <= 1e-10
    assert np.all(drifted.gap_YH(x, p, v + 0.1) >= 0.0)


def test_domain_errors(drifted):
    x = np.zeros((1, 2))
    with pytest.raises(ModelDomainError):
        drifted.coupling_f(x, np.array([0.5, -0.1]))
    values = drifted.perspective_L(x, np.array([0.0, 0.0]), np.array([[0.0, 1.0]]))
    assert values[0] == 0.0
    assert values[1] == np.inf


def test_growth_check_passes_for_the_kl_family():
    samples = np.linspace(-2.0, 2.0, 9).reshape(1, -1)
    report = growth_check(kl_model(1.0, 2.0, d=1), samples)
    assert report.passed
    assert report.to_dict()['failed'] == []


def test_growth_check_reports_violations():
    model = ModelSpec(2.0, g=3.0, c_H=2.0)
    samples = np.zeros((1, 3))
    with pytest.raises(GrowthBoundViolation) as error:
        growth_check(model, samples)
    assert error.value.bound == 'hamiltonian_upper'
    assert 'metric_range' in error.value.report.failed

    report = growth_check(model, samples, raise_on_failure=False)
    assert not report.passed
    assert report.slack['metric_range'] == pytest.approx(-1.0)


def test_positivity_convention():
    samples = np.zeros((1, 4))
    assert positivity_check(ModelSpec(2.0, V_f=0.5), samples) == {'f': 0.5, 'L': 0.0}
    with pytest.raises(PositivityConventionError):
        positivity_check(ModelSpec(2.0, V_f=-1.0), samples)


def test_sampled_coefficients_on_grid():
    grid = GridSpec(1, 4, 8, 2.0)
    values = np.linspace(1.0, 2.0, 8)
    model = ModelSpec(2.0, a=SpatialFunction(values, R=2.0))
    assert np.array_equal(model.on_grid(grid).a[0], values)
    assert model.on_grid(grid, time_axis=False).a.shape == (8,)
    fine = GridSpec(1, 4, 16, 2.0)
    assert np.all(np.diff(model.on_grid(fine).a[0]) >= 0.0)


def test_model_file_round_trip(tmp_path):
    values = np.linspace(0.5, 1.5, 8)
    model = ModelSpec(2.5, g=1.5, z=[0.2], V_f=SpatialFunction(values, R=2.0), c_H=2.0)
    path = str(tmp_path / 'model.json')
    dump_model(model, path)
    assert (tmp_path / 'model.V_f.field').exists()

    loaded = load_model(path)
    assert loaded.p == 2.5
    assert loaded.g.constant == 1.5
    assert loaded.z[0].constant == 0.2
    assert np.array_equal(loaded.V_f.values, values)
    assert loaded.c_H == 2.0


def test_model_file_errors(tmp_path):
    path = tmp_path / 'model.json'
    path.write_text('{"p": 2.0, "coupling": {"a": "heavy"}}')
    with pytest.raises(ModelSpecError):
        load_model(str(path))
    with pytest.raises(ModelSpecError):
        load_model(str(tmp_path / 'missing.json'))
