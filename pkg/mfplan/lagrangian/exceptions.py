from __future__ import annotations


class EmptyDensity(ValueError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f'Cannot sample particles from "{name}": it carries no mass.')
