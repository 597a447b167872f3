from __future__ import annotations


class UnsupportedDimension(ValueError):
    def __init__(self, operation: str, d: int) -> None:
        self.operation = operation
        self.d = d
        super().__init__(f'{operation} is only available for d = 1, got d = {d}.')


class DensityDomainError(ValueError):
    def __init__(self, name: str, reason: str) -> None:
        self.name = name
        self.reason = reason
        super().__init__(f'Density "{name}" is not admissible: {reason}')


class EmptyParameterGrid(ValueError):
    def __init__(self) -> None:
        super().__init__('The grid of scale parameters is empty.')


class HeatTimeError(ValueError):
    def __init__(self, t: float) -> None:
        self.t = t
        super().__init__(f'Heat flow time must be positive, got {t!r}.')


class TimeRangeError(ValueError):
    def __init__(self, t: float) -> None:
        self.t = t
        super().__init__(f'Interpolation time must lie in [0, 1], got {t!r}.')
