from mfplan.settings.settings import Setting, NumberSetting, IntSetting, FloatSetting, StrSetting, BoolSetting
from mfplan.settings.app_settings import AppSettings, LOG_LEVELS
from mfplan.settings.solver_config import SolverConfig, SolverConfigLoadFail, SolverConfigDumpFail, INIT_STRATEGIES

__all__ = (
    'Setting',
    'NumberSetting',
    'IntSetting',
    'FloatSetting',
    'StrSetting',
    'BoolSetting',
    'AppSettings',
    'LOG_LEVELS',
    'SolverConfig',
    'SolverConfigLoadFail',
    'SolverConfigDumpFail',
    'INIT_STRATEGIES',
)
