from __future__ import annotations

from typing import Any


class StepSizeError(ValueError):
    def __init__(self, tau: float, sigma: float, norm: float) -> None:
        self.tau = tau
        self.sigma = sigma
        self.norm = norm
        product = tau * sigma * norm**2
        super().__init__(f'Step sizes tau={tau!r}, sigma={sigma!r} give tau*sigma*|K|^2 = {product:.6g} >= 1.')


class ProxConvergenceError(ArithmeticError):
    def __init__(self, cells: Any, iterations: int) -> None:
        self.cells = [tuple(int(i) for i in c) for c in cells]
        self.iterations = iterations
        shown = ', '.join(str(c) for c in self.cells[:5])
        more = f' and {len(self.cells) - 5} more' if len(self.cells) > 5 else ''
        super().__init__(f'Proximal Newton solve did not converge in {iterations} iterations at cells {shown}{more}.')


class NonFiniteEnergy(ArithmeticError):
    def __init__(self, iteration: int, where: str) -> None:
        self.iteration = iteration
        self.where = where
        super().__init__(f'Non-finite values in {where} at iteration {iteration}; check the problem scaling.')


class UnsupportedStrategy(ValueError):
    def __init__(self, strategy: str, reason: str) -> None:
        self.strategy = strategy
        self.reason = reason
        super().__init__(f'Initialization "{strategy}" is not available: {reason}')


class SolverBusy(RuntimeError):
    def __init__(self) -> None:
        super().__init__('The solver is already running; a solver object serves one solve at a time.')
