from __future__ import annotations

from typing import Any, Callable

from mfplan.cli import commands
from mfplan.responses import Response


MAP: dict[str, Callable[..., Response]] = {
    'gen': commands.gen,
    'solve': commands.solve,
    'kl': commands.kl,
    'diagnose': commands.diagnose,
    'trace': commands.trace,
}


def dispatch(**kwargs: Any) -> Response:
    if 'command' not in kwargs or not kwargs['command']:
        raise KeyError('Command must be present.')

    if kwargs['command'] not in MAP:
        raise ValueError(f'Unsupported command: {kwargs["command"]}.')

    handler = MAP[kwargs.pop('command')]

    return handler(**kwargs)
