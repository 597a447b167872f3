from mfplan.metrics.transport import (
    w2_1d,
    w1_1d,
    w1_density,
    w1_samples,
    displacement_interpolation_1d,
    displacement_moment_1d,
    geodesic_defect,
)
from mfplan.metrics.heat import heat_connector, heat_path_estimates, fisher_information, resolved_times
from mfplan.metrics.kl import kl_cost, kl_upper_bound, kl_distance, kl_path_length
from mfplan.metrics.exceptions import (
    UnsupportedDimension,
    DensityDomainError,
    EmptyParameterGrid,
    HeatTimeError,
    TimeRangeError,
)

__all__ = (
    'w2_1d',
    'w1_1d',
    'w1_density',
    'w1_samples',
    'displacement_interpolation_1d',
    'displacement_moment_1d',
    'geodesic_defect',
    'heat_connector',
    'heat_path_estimates',
    'fisher_information',
    'resolved_times',
    'kl_cost',
    'kl_upper_bound',
    'kl_distance',
    'kl_path_length',
    'UnsupportedDimension',
    'DensityDomainError',
    'EmptyParameterGrid',
    'HeatTimeError',
    'TimeRangeError',
)
