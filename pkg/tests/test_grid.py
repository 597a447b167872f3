import numpy as np
import pytest

from mfplan.cli import generate
from mfplan.grid import (
    FieldFormatError,
    FieldShapeError,
    GridSpec,
    GridSpecError,
    InfeasibleEndpoints,
    boundary_mass,
    continuity_residual,
    export_csv,
    interp_center_to_face,
    interp_center_to_time,
    interp_face_to_center,
    interp_time_to_center,
    normalize,
    project_continuity,
    read_field,
    slice_masses,
    validate_endpoint,
    weighted_norms,
    write_field,
)


@pytest.mark.parametrize(
    'args',
    [(3, 8, 16, 2.0), (1, 1, 16, 2.0), (1, 8, 3, 2.0), (1, 8, 16, 0.0), (1, 8, 16, True), (1.0, 8, 16, 2.0)],
)
def test_grid_spec_rejects_bad_arguments(args):
    with pytest.raises(GridSpecError):
        GridSpec(*args)


def test_grid_spec_geometry(grid1, grid2):
    assert grid1.dx == 0.25
    assert grid1.dt == 0.125
    assert grid1.centers[0] == pytest.approx(-1.875)
    assert grid1.faces.size == 17
    assert grid1.density_shape == (9, 16)
    assert grid1.face_shape(0) == (8, 17)
    assert grid2.face_shape(1) == (4, 8, 9)
    assert grid2.mesh().shape == (2, 8, 8)
    assert grid2.diameter == pytest.approx(4.0 * np.sqrt(2.0))


def test_grid_spec_dict_round_trip(grid2):
    assert GridSpec.from_dict(grid2.to_dict()) == grid2
    with pytest.raises(GridSpecError, match='missing key'):
        GridSpec.from_dict({'d': 1, 'nt': 4})


def test_shape_checks(grid1):
    with pytest.raises(FieldShapeError):
        grid1.check_density(np.zeros((8, 16)))
    with pytest.raises(FieldShapeError):
        grid1.check_momentum((np.zeros((8, 16)),))


def test_time_interpolation_adjoint(grid1):
    rng = np.random.default_rng(1)
    m = rng.standard_normal(grid1.density_shape)
    s = rng.standard_normal(grid1.scalar_shape)
    lhs = np.sum(interp_time_to_center(grid1, m) * s)
    rhs = np.sum(m * interp_center_to_time(grid1, s, adjoint=True))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_face_interpolation_adjoint(grid2):
    rng = np.random.default_rng(2)
    w = tuple(rng.standard_normal(grid2.face_shape(i)) for i in range(2))
    s = rng.standard_normal((2, *grid2.scalar_shape))
    lhs = np.sum(interp_face_to_center(grid2, w) * s)
    back = interp_center_to_face(grid2, s, adjoint=True)
    rhs = sum(np.sum(wi * bi) for wi, bi in zip(w, back))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_extrapolation_is_exact_for_linear_fields(grid1):
    s = np.broadcast_to(grid1.time_centers.reshape(-1, 1), grid1.scalar_shape)
    nodes = interp_center_to_time(grid1, s)
    assert np.allclose(nodes[:, 0], grid1.time_nodes, atol=1e-14)


@pytest.mark.parametrize('grid', [GridSpec(1, 8, 16, 2.0), GridSpec(2, 4, 8, 2.0)])
def test_projection_is_exact(grid):
    rng = np.random.default_rng(3)
    m0 = generate('gaussian', grid, {'center': -0.5})
    m1 = generate('gaussian', grid, {'center': 0.5})
    m = rng.random(grid.density_shape)
    w = tuple(rng.standard_normal(grid.face_shape(i)) for i in range(grid.d))

    pm, pw = project_continuity(grid, m, w, m0, m1)

    assert np.max(np.abs(continuity_residual(grid, pm, pw))) <= 1e-10
    assert np.array_equal(pm[0], m0)
    assert np.array_equal(pm[-1], m1)
    assert np.max(np.abs(slice_masses(grid, pm) - 1.0)) <= 1e-10
    for i, wi in enumerate(pw):
        assert np.all(np.take(wi, [0, grid.nx], axis=1 + i) == 0.0)

    again_m, again_w = project_continuity(grid, pm, pw, m0, m1)
    assert np.max(np.abs(again_m - pm)) <= 1e-10
    assert all(np.max(np.abs(a - b)) <= 1e-10 for a, b in zip(again_w, pw))


def test_projection_needs_equal_masses(grid1, uniform1):
    with pytest.raises(InfeasibleEndpoints):
        project_continuity(grid1, grid1.zeros_density(), grid1.zeros_momentum(), uniform1, 1.1 * uniform1)


def test_stationary_flow_has_no_residual(grid1, uniform1):
    m = np.broadcast_to(uniform1, grid1.density_shape)
    assert np.max(np.abs(continuity_residual(grid1, m, grid1.zeros_momentum()))) == 0.0


def test_weighted_norms_of_uniform(grid1, uniform1):
    norms = weighted_norms(grid1, uniform1, 2.0)['aggregate']
    assert norms['mass'] == pytest.approx(1.0)
    assert norms['lp'] == pytest.approx(0.5)
    moment = float(np.sum(grid1.centers**2) * 0.25 * grid1.dx)
    assert norms['quadratic_moment'] == pytest.approx(moment)

    field = weighted_norms(grid1, np.broadcast_to(uniform1, grid1.density_shape), 2.0)
    assert field['per_slice']['mass'].shape == (9,)
    assert field['aggregate']['mass'] == pytest.approx(1.0)


def test_boundary_mass(grid1, uniform1):
    assert boundary_mass(grid1, uniform1)[0] == pytest.approx(2.0 / 16.0)


def test_endpoint_validation(grid1, uniform1):
    with pytest.raises(GridSpecError):
        normalize(grid1, np.zeros(grid1.cells))
    bad = uniform1.copy()
    bad[3] = -0.1
    with pytest.raises(GridSpecError, match='negative'):
        validate_endpoint(grid1, bad, 'm0')
    with pytest.raises(GridSpecError, match='mass'):
        validate_endpoint(grid1, 2.0 * uniform1, 'm0', mass_tol=1e-9)


def test_field_files(tmp_path, grid2):
    rng = np.random.default_rng(4)
    w = tuple(rng.standard_normal(grid2.face_shape(i)) for i in range(2))
    path = str(tmp_path / 'w.field')
    header = write_field(path, grid2, w, 'momentum')
    assert header.nt == grid2.nt

    read_header, data = read_field(path)
    assert read_header.kind == 'momentum'
    assert all(np.array_equal(a, b) for a, b in zip(data, w))

    slice_path = str(tmp_path / 'm0.field')
    assert write_field(slice_path, grid2, np.ones(grid2.cells), 'density').is_slice


def test_field_files_reject_damage(tmp_path, grid1, uniform1):
    path = tmp_path / 'm0.field'
    write_field(str(path), grid1, uniform1, 'density')
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FieldFormatError, match='payload'):
        read_field(str(path))
    with pytest.raises(FieldFormatError, match='sidecar'):
        read_field(str(tmp_path / 'missing.field'))


def test_csv_export(tmp_path, grid1, grid2, uniform1):
    path = tmp_path / 'm.csv'
    export_csv(str(path), grid1, np.broadcast_to(uniform1, grid1.density_shape))
    lines = path.read_text().splitlines()
    assert lines[0] == 't,x,value'
    assert len(lines) == 1 + 9 * 16
    with pytest.raises(GridSpecError):
        export_csv(str(path), grid2, np.ones(grid2.cells))
