from __future__ import annotations

import os
import json
import logging

from collections.abc import Iterator
from typing import Any, Optional
from logging.handlers import RotatingFileHandler, BufferingHandler

from mfplan import __version__ as app_ver
from mfplan.settings.settings import Setting, IntSetting, StrSetting, FloatSetting, BoolSetting


CONFIG_VERSION = 1
LOG_LEVELS = ('CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG')


def default_settings() -> dict[str, Setting]:
    return {
        'config_version': IntSetting(CONFIG_VERSION, fixed_values=(CONFIG_VERSION,)),
        'config_folder': StrSetting('settings', read_only=True),
        'config_name': StrSetting('mfplan.json', read_only=True),
        'wrapper_folder': StrSetting('~/mfplan_data', read_only=True),
        'system_encoding': StrSetting('UTF-8', codec=True),
        'logging_folder': StrSetting('log', empty=False),
        'logging_level': StrSetting('INFO', fixed_values=LOG_LEVELS),
        'logging_file': StrSetting('mfplan.log', empty=False),
        'logging_file_max_size': IntSetting(5 * 1024 * 1024, negative=False, non_zero=True, description='bytes'),
        'logging_max_files': IntSetting(5, negative=False, non_zero=True),
        'logging_buffer_capacity': IntSetting(
            65535,
            negative=False,
            non_zero=True,
            description='records held in memory until the log file is open',
        ),
        'logging_default_format': StrSetting('%(asctime)s %(levelname)s %(name)s %(message)s'),
        'threads': IntSetting(1, val_range=(1, 256), description='default worker count'),
        'tol_gap': FloatSetting(1e-2, negative=False, description='relative duality gap'),
        'tol_residual': FloatSetting(1e-10, negative=False, description='continuity residual, max norm'),
        'tol_hj': FloatSetting(1e-3, negative=False, description='relative HJ violation on the support'),
        'tol_dual': FloatSetting(1e-6, negative=False, description='tolerated negative relative gap and defect'),
        'export_csv': BoolSetting(False, description='also write CSV plots for d = 1'),
    }


class AppSettings:
    """Process-wide settings of the mfplan command.

    Records logged before the log file exists are held by a BufferingHandler and replayed into
    the rotating file once it opens. Any failure to create the folders, read or write the config
    puts the object into alert mode: defaults stay in effect and nothing is written back.
    """

    def __init__(self, wrapper_folder: Optional[str] = None) -> None:
        self.settings = default_settings()
        self.alert = False
        self.logger = logging.getLogger('mfplan')
        self._buffer: Optional[BufferingHandler] = None
        self._file: Optional[RotatingFileHandler] = None

        if wrapper_folder is not None:
            self.settings['wrapper_folder'] = StrSetting(wrapper_folder, read_only=True)

        self._start_buffer()
        self.alert = not all(self._ensure_folder(path) for path in (self.wrapper_path, self.config_folder))
        self.load()
        self._start_file()

        if self.alert:
            self.logger.warning(f'mfplan {app_ver} started with errors, settings are read-only.')
        else:
            self.logger.debug(f'mfplan {app_ver} started.')

    def __iter__(self) -> Iterator[tuple[str, Setting]]:
        yield from self.settings.items()

    def __getitem__(self, key: str) -> Setting:
        return self.settings[key]

    def _format(self) -> logging.Formatter:
        return logging.Formatter(self.settings['logging_default_format'].value)

    @property
    def wrapper_path(self) -> str:
        return os.path.expanduser(self.settings['wrapper_folder'].value)

    @property
    def config_folder(self) -> str:
        return os.path.join(self.wrapper_path, self.settings['config_folder'].value)

    @property
    def config_path(self) -> str:
        return os.path.join(self.config_folder, self.settings['config_name'].value)

    def _ensure_folder(self, path: str) -> bool:
        if os.path.isdir(path):
            return True
        if os.path.exists(path):
            self.logger.error(f'"{path}" exists but is not a folder.')
            return False
        try:
            os.makedirs(path)
        except OSError as error:
            self.logger.error(f'Cannot create "{path}": {error}.')
            return False
        self.logger.debug(f'Created "{path}".')
        return True

    def _start_buffer(self) -> None:
        self.logger.setLevel(self.settings['logging_level'].value)
        self._buffer = BufferingHandler(self.settings['logging_buffer_capacity'].value)
        self._buffer.setFormatter(self._format())
        self.logger.addHandler(self._buffer)

    def _start_file(self) -> None:
        if self.alert:
            self.logger.error('File logging is off, settings are read-only.')
            return

        folder = os.path.join(self.wrapper_path, self.settings['logging_folder'].value)
        if not self._ensure_folder(folder):
            return

        self.logger.setLevel(self.settings['logging_level'].value)
        try:
            handler = RotatingFileHandler(
                filename=os.path.join(folder, self.settings['logging_file'].value),
                maxBytes=self.settings['logging_file_max_size'].value,
                backupCount=self.settings['logging_max_files'].value,
                encoding=self.settings['system_encoding'].value,
            )
        except OSError as error:
            self.logger.error(f'Cannot open the log file: {error}.')
            return

        handler.setFormatter(self._format())
        self.logger.addHandler(handler)
        self._file = handler
        if self._buffer is not None:
            for record in self._buffer.buffer:
                handler.emit(record)
            self._drop(self._buffer)
            self._buffer = None
        self.logger.debug('File logging started.')

    def _drop(self, handler: logging.Handler) -> None:
        self.logger.removeHandler(handler)
        handler.close()

    def load(self) -> None:
        if self.alert:
            return

        path = self.config_path
        if not os.path.exists(path):
            self.logger.info(f'No settings at "{path}", writing the defaults.')
            self.dump()
            return

        try:
            with open(path, encoding=self.settings['system_encoding'].value) as f:
                data = json.load(f)
        except (OSError, ValueError) as error:
            self.logger.error(f'Cannot read "{path}": {error}. Settings are read-only.')
            self.alert = True
            return

        if not isinstance(data, dict) or not data:
            self.logger.error(f'"{path}" does not hold a settings object. Settings are read-only.')
            self.alert = True
        elif data.get('config_version') != CONFIG_VERSION:
            self.logger.error(f'"{path}" has an incompatible config_version, replacing it with the defaults.')
            self.dump()
        else:
            self.apply(data)

    def apply(self, data: dict[str, Any]) -> None:
        for key, value in data.items():
            setting = self.settings.get(key)
            if setting is None:
                self.logger.warning(f'Unknown settings key "{key}" ignored.')
            elif not setting.read_only:
                try:
                    setting.value = value
                except (TypeError, ValueError) as error:
                    self.logger.error(f'Setting "{key}" kept at {setting.value!r}: {error}')

    def dump(self) -> None:
        if self.alert:
            self.logger.error('Settings are read-only, not saving.')
            return

        data = {k: v.value for k, v in self.settings.items() if not v.read_only}
        try:
            with open(self.config_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=4)
                f.flush()
                os.fsync(f.fileno())
        except OSError as error:
            self.logger.error(f'Cannot write "{self.config_path}": {error}. Settings are read-only.')
            self.alert = True

    def close(self) -> None:
        for handler in (self._buffer, self._file):
            if handler is not None:
                self._drop(handler)
        self._buffer = self._file = None
