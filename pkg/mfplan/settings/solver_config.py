from __future__ import annotations

import os
import json

from collections.abc import Iterator
from typing import Any, Optional


from mfplan.settings.settings import Setting, IntSetting, StrSetting, FloatSetting


INIT_STRATEGIES = ('linear-blend', 'displacement', 'heat-connector')


class SolverConfigLoadFail(Exception): ...


class SolverConfigDumpFail(Exception): ...


class SolverConfig:
    """Parameters of the primal-dual planning solver.

    A zero step size or density floor means "pick automatically": steps become 0.95/|K| with |K|
    estimated by power iteration, the floor becomes density_floor_rel * max(m).
    """

    def __init__(self, path: Optional[str] = None, *, load=False, **overrides: Any) -> None:
        self.settings: dict[str, Setting] = {
            'max_iters': IntSetting(5000, negative=False, non_zero=True, description='iteration budget'),
            'tau_primal': FloatSetting(0.0, negative=False, description='0 means automatic'),
            'tau_dual': FloatSetting(0.0, negative=False, description='0 means automatic'),
            'theta': FloatSetting(1.0, val_range=(0.0, 1.0), description='over-relaxation'),
            'stop_gap': FloatSetting(1e-3, negative=False, description='relative duality gap'),
            'stop_dual_slack': FloatSetting(1e-6, negative=False, description='tolerated negative relative gap'),
            'stop_residual': FloatSetting(1e-2, negative=False, description='relative fixed-point residual'),
            'init_strategy': StrSetting('linear-blend', fixed_values=INIT_STRATEGIES),
            'density_floor': FloatSetting(0.0, negative=False, description='absolute, 0 means automatic'),
            'density_floor_rel': FloatSetting(1e-8, negative=False),
            'power_iters': IntSetting(50, negative=False, non_zero=True),
            'check_every': IntSetting(25, negative=False, non_zero=True),
            'log_every': IntSetting(500, negative=False, non_zero=True),
            'newton_max_iters': IntSetting(100, negative=False, non_zero=True),
            'heat_time': FloatSetting(0.05, negative=False, non_zero=True, description='heat-connector time'),
            'threads': IntSetting(1, val_range=(1, 256), description='transform workers'),
        }
        self.path = path
        if load:
            self.load()

        for k, v in overrides.items():
            if k not in self.settings:
                raise KeyError(f'Unknown solver setting: {k}.')
            self.settings[k].value = v

    def __iter__(self) -> Iterator[tuple[str, Setting]]:
        yield from self.settings.items()

    def __getitem__(self, key: str) -> Setting:
        return self.settings[key]

    def __getattr__(self, key: str) -> Any:
        settings = self.__dict__.get('settings')
        if settings is not None and key in settings:
            return settings[key].value
        raise AttributeError(key)

    def __repr__(self) -> str:
        return 'SolverConfig(' + ', '.join(f'{k}={v.value!r}' for k, v in self.settings.items()) + ')'

    def as_dict(self) -> dict[str, Any]:
        return {k: v.value for k, v in self.settings.items()}

    def dump(self, path: Optional[str] = None) -> None:
        path = path or self.path
        try:
            if not path:
                raise ValueError('No path to dump to.')
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(self.as_dict(), f, indent=4)
                f.flush()
                os.fsync(f.fileno())

        except Exception as error:
            raise SolverConfigDumpFail(error)

    def load(self, path: Optional[str] = None) -> None:
        path = path or self.path
        try:
            if not path:
                raise ValueError('No path to load from.')
            with open(path, encoding='utf-8') as f:
                data: dict = json.load(f)
                for k in data:
                    if k not in self.settings:
                        raise KeyError(f'Unknown solver setting: {k}.')
                for k, v in self.settings.items():
                    if v.read_only:
                        continue
                    if (value := data.get(k)) is not None:
                        v.value = value

        except Exception as error:
            raise SolverConfigLoadFail(error)
