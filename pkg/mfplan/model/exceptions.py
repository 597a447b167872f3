from __future__ import annotations

from typing import Any


class ModelDomainError(ValueError):
    def __init__(self, name: str, value: float) -> None:
        self.name = name
        self.value = value
        super().__init__(f'{name} is defined for nonnegative densities only, got {value!r}.')


class ModelSpecError(Exception):
    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(f'Ill-formed model: {reason}')


class GrowthBoundViolation(Exception):
    def __init__(self, bound: str, point: Any, slack: float, report: Any = None) -> None:
        self.bound = bound
        self.point = point
        self.slack = slack
        self.report = report
        super().__init__(f'Structural bound "{bound}" is violated at x={point} with slack {slack:.6g}.')


class PositivityConventionError(Exception):
    def __init__(self, term: str, minimum: float) -> None:
        self.term = term
        self.minimum = minimum
        super().__init__(f'The nonnegativity convention fails for {term}: minimum value {minimum:.6g}.')
