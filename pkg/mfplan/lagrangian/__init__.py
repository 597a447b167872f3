from mfplan.lagrangian.particles import sample_particles
from mfplan.lagrangian.tracing import FlowField, Trajectory, Ensemble, trace_ensemble, trace_characteristic
from mfplan.lagrangian.checks import density_at, verify_superposition, path_optimality_check, transport_plan_summary
from mfplan.lagrangian.exceptions import EmptyDensity

__all__ = (
    'sample_particles',
    'FlowField',
    'Trajectory',
    'Ensemble',
    'trace_ensemble',
    'trace_characteristic',
    'density_at',
    'verify_superposition',
    'path_optimality_check',
    'transport_plan_summary',
    'EmptyDensity',
)
