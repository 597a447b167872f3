from mfplan.primal.solution import History, Solution, HISTORY_COLUMNS
from mfplan.primal.solver import PlanningSolver, solve_planning
from mfplan.primal.prox import prox_action, prox_cells, prox_objective, prox_stationarity
from mfplan.primal.energy import centered, energy_density, primal_energy
from mfplan.primal.initialize import initialize_flow
from mfplan.primal.checks import recover_velocity, apriori_check
from mfplan.primal.exceptions import (
    StepSizeError,
    ProxConvergenceError,
    NonFiniteEnergy,
    UnsupportedStrategy,
    SolverBusy,
)

__all__ = (
    'History',
    'Solution',
    'HISTORY_COLUMNS',
    'PlanningSolver',
    'solve_planning',
    'prox_action',
    'prox_cells',
    'prox_objective',
    'prox_stationarity',
    'centered',
    'energy_density',
    'primal_energy',
    'initialize_flow',
    'recover_velocity',
    'apriori_check',
    'StepSizeError',
    'ProxConvergenceError',
    'NonFiniteEnergy',
    'UnsupportedStrategy',
    'SolverBusy',
)
