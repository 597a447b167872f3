from __future__ import annotations


class GridSpecError(ValueError):
    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(f'Invalid grid: {reason}')


class FieldShapeError(ValueError):
    def __init__(self, name: str, expected: tuple, got: tuple) -> None:
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f'Field "{name}" has shape {got}, expected {expected}.')


class InfeasibleEndpoints(ValueError):
    def __init__(self, mass0: float, mass1: float) -> None:
        self.mass0 = mass0
        self.mass1 = mass1
        super().__init__(f'Endpoint masses differ: {mass0!r} vs {mass1!r}.')


class FieldFormatError(Exception):
    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f'Cannot read field "{path}": {reason}')
