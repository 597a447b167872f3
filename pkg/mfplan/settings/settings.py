from __future__ import annotations

import math
import codecs

from abc import ABC, abstractmethod
from typing import Any, Generic, Optional, TypeVar


N = TypeVar('N', int, float)


class Setting(ABC):
    """One typed, self-validating entry of a settings collection.

    Assigning to `value` validates first and raises TypeError or ValueError with a readable
    sentence; the stored value is never left half-updated.
    """

    __slots__ = (
        '_kind',
        '_choices',
        '_description',
        '_read_only',
    )

    def __init__(
        self,
        kind: type,
        *,
        description: str,
        choices: Optional[tuple] = None,
        read_only=False,
    ) -> None:
        self._kind = kind
        self._description = description
        self._read_only = read_only
        self._choices = self._check_choices(choices)

    def __repr__(self) -> str:
        return f'{type(self).__name__}({self.value!r})'

    @property
    @abstractmethod
    def value(self) -> Any:
        raise NotImplementedError

    @value.setter
    @abstractmethod
    def value(self, v: Any) -> None:
        raise NotImplementedError

    @property
    def description(self) -> str:
        return self._description

    @property
    def read_only(self) -> bool:
        return self._read_only

    @property
    def fixed_values(self) -> Optional[tuple]:
        return self._choices

    def _check_choices(self, choices: Optional[tuple]) -> Optional[tuple]:
        if choices is None:
            return None
        if not isinstance(choices, tuple):
            raise TypeError(f'Allowed values must be given as a tuple, got {type(choices).__name__}.')
        if len(set(choices)) != len(choices):
            raise ValueError(f'Allowed values {choices} contain duplicates.')
        for choice in choices:
            if type(choice) is bool and self._kind is not bool or not isinstance(choice, self._kind):
                raise TypeError(f'Allowed value {choice!r} is not {self._kind.__name__}.')
        return choices

    def _check_choice(self, v: Any) -> None:
        if self._choices and v not in self._choices:
            raise ValueError(f'{v!r} is not one of {", ".join(map(repr, self._choices))}.')


class NumberSetting(Setting, Generic[N]):
    """Shared validation of integer and real settings: sign, zero and a closed range."""

    __slots__ = (
        '_value',
        '_range',
        '_negative',
        '_non_zero',
    )

    def __init__(
        self,
        kind: type,
        value: N,
        *,
        description: str,
        val_range: Optional[tuple[N, N]],
        choices: Optional[tuple] = None,
        negative: bool,
        non_zero: bool,
        read_only: bool,
    ) -> None:
        super().__init__(kind, description=description, choices=choices, read_only=read_only)
        self._negative = negative
        self._non_zero = non_zero
        self._range = self._check_range(val_range)
        self.value = value

    @abstractmethod
    def _coerce(self, v: Any) -> N:
        raise NotImplementedError

    @property
    def value(self) -> N:
        return self._value

    @value.setter
    def value(self, v: Any) -> None:
        v = self._coerce(v)
        if not self._negative and v < 0:
            raise ValueError(f'{v} is negative.')
        if self._non_zero and v == 0:
            raise ValueError('Value cannot be zero.')
        if self._range:
            low, high = self._range
            if v < low:
                raise ValueError(f'{v} is too small (< {low}).')
            if v > high:
                raise ValueError(f'{v} is too big (> {high}).')
        self._check_choice(v)
        self._value = v

    def _check_range(self, bounds: Optional[tuple]) -> Optional[tuple[N, N]]:
        if bounds is None:
            return None
        if not isinstance(bounds, tuple) or len(bounds) != 2:
            raise TypeError('A range is a (low, high) tuple.')
        low, high = (self._coerce(b) for b in bounds)
        if low > high:
            raise ValueError(f'Empty range: {low} > {high}.')
        return low, high


class IntSetting(NumberSetting[int]):
    __slots__ = ()

    def __init__(
        self,
        value: int,
        *,
        description='',
        val_range: Optional[tuple[int, int]] = None,
        fixed_values: Optional[tuple[int, ...]] = None,
        negative=True,
        non_zero=False,
        read_only=False,
    ) -> None:
        super().__init__(
            int,
            value,
            description=description,
            val_range=val_range,
            choices=fixed_values,
            negative=negative,
            non_zero=non_zero,
            read_only=read_only,
        )

    def _coerce(self, v: Any) -> int:
        if type(v) is bool or not isinstance(v, int):
            raise TypeError(f'Expected an int, got {type(v).__name__}.')
        return v


class FloatSetting(NumberSetting[float]):
    __slots__ = ()

    def __init__(
        self,
        value: float,
        *,
        description='',
        val_range: Optional[tuple[float, float]] = None,
        negative=True,
        non_zero=False,
        read_only=False,
    ) -> None:
        super().__init__(
            float,
            value,
            description=description,
            val_range=val_range,
            negative=negative,
            non_zero=non_zero,
            read_only=read_only,
        )

    def _coerce(self, v: Any) -> float:
        # JSON writes 1.0 as 1
        if type(v) is bool or not isinstance(v, (int, float)):
            raise TypeError(f'Expected a float, got {type(v).__name__}.')
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f'{v} is not finite.')
        return v


class StrSetting(Setting):
    __slots__ = (
        '_value',
        '_max_length',
        '_codec',
        '_empty',
    )

    def __init__(
        self,
        value: str,
        *,
        description='',
        fixed_values: Optional[tuple[str, ...]] = None,
        max_length=1000,
        codec=False,
        empty=True,
        read_only=False,
    ) -> None:
        super().__init__(str, description=description, choices=fixed_values, read_only=read_only)
        if max_length < 0:
            raise ValueError('A maximum length cannot be negative.')
        self._max_length = max_length
        self._codec = codec
        self._empty = empty
        self.value = value

    @property
    def value(self) -> str:
        return self._value

    @value.setter
    def value(self, v: str) -> None:
        if not isinstance(v, str):
            raise TypeError(f'Expected a str, got {type(v).__name__}.')
        if not v and not self._empty:
            raise ValueError('Value cannot be an empty string.')
        if self._max_length and len(v) > self._max_length:
            raise ValueError(f'Value is longer than {self._max_length} characters.')
        if self._codec:
            try:
                codecs.lookup(v)
            except LookupError:
                raise ValueError(f'Unknown text encoding: {v}.')
        self._check_choice(v)
        self._value = v

    @property
    def max_length(self) -> int:
        return self._max_length


class BoolSetting(Setting):
    __slots__ = ('_value',)

    def __init__(self, value: bool, *, description='', read_only=False) -> None:
        super().__init__(bool, description=description, read_only=read_only)
        self.value = value

    @property
    def value(self) -> bool:
        return self._value

    @value.setter
    def value(self, v: bool) -> None:
        if not isinstance(v, bool):
            raise TypeError(f'Expected a bool, got {type(v).__name__}.')
        self._value = v
