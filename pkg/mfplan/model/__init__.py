from mfplan.model.model import (
    ModelSpec,
    Coefficients,
    SpatialFunction,
    GrowthReport,
    kl_model,
    growth_check,
    positivity_check,
    legendre_numeric,
    F_star_numeric,
    load_model,
    dump_model,
    model_from_dict,
    model_to_dict,
)
from mfplan.model.exceptions import ModelDomainError, ModelSpecError, GrowthBoundViolation, PositivityConventionError

__all__ = (
    'ModelSpec',
    'Coefficients',
    'SpatialFunction',
    'GrowthReport',
    'kl_model',
    'growth_check',
    'positivity_check',
    'legendre_numeric',
    'F_star_numeric',
    'load_model',
    'dump_model',
    'model_from_dict',
    'model_to_dict',
    'ModelDomainError',
    'ModelSpecError',
    'GrowthBoundViolation',
    'PositivityConventionError',
)
