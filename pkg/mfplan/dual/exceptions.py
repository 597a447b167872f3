from __future__ import annotations


class DualityIdentityDrift(ArithmeticError):
    def __init__(self, gap: float, parts: float) -> None:
        self.gap = gap
        self.parts = parts
        super().__init__(f'Gap {gap!r} differs from defect + Y-integrals {parts!r} by {abs(gap - parts):.3g}.')
