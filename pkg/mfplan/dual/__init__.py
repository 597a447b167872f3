from mfplan.dual.dual import (
    DiagnosticsReport,
    time_traces,
    gauge,
    derivatives,
    clamp_alpha,
    recover_alpha,
    recover_dual,
    recover_dual_fields,
    dual_energy,
    hj_residual,
    duality_report,
)
from mfplan.dual.exceptions import DualityIdentityDrift

__all__ = (
    'DiagnosticsReport',
    'time_traces',
    'gauge',
    'derivatives',
    'clamp_alpha',
    'recover_alpha',
    'recover_dual',
    'recover_dual_fields',
    'dual_energy',
    'hj_residual',
    'duality_report',
    'DualityIdentityDrift',
)
