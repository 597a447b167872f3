from mfplan.grid.grid import (
    GridSpec,
    Momentum,
    MASS_TOLERANCE,
    continuity_residual,
    project_continuity,
    solve_neumann,
    divergence_adjoint,
    interp_time_to_center,
    interp_center_to_time,
    interp_face_to_center,
    interp_center_to_face,
    weighted_norms,
    slice_masses,
    boundary_mass,
    normalize,
    validate_endpoint,
)
from mfplan.grid.io import FieldHeader, read_field, read_header, write_field, export_csv
from mfplan.grid.exceptions import GridSpecError, FieldShapeError, InfeasibleEndpoints, FieldFormatError

__all__ = (
    'GridSpec',
    'Momentum',
    'MASS_TOLERANCE',
    'continuity_residual',
    'project_continuity',
    'solve_neumann',
    'divergence_adjoint',
    'interp_time_to_center',
    'interp_center_to_time',
    'interp_face_to_center',
    'interp_center_to_face',
    'weighted_norms',
    'slice_masses',
    'boundary_mass',
    'normalize',
    'validate_endpoint',
    'FieldHeader',
    'read_field',
    'read_header',
    'write_field',
    'export_csv',
    'GridSpecError',
    'FieldShapeError',
    'InfeasibleEndpoints',
    'FieldFormatError',
)
