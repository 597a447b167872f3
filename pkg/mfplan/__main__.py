from __future__ import annotations

import os
import sys
import json
import logging
import argparse

from typing import Any, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from mfplan import __version__ as app_ver
from mfplan import LOGO
from mfplan.cli import GENERATORS, dispatch
from mfplan.responses import Response
from mfplan.settings import AppSettings, LOG_LEVELS
from mfplan.utils import parse_float_list, to_jsonable


HOME_VARIABLE = 'MFPLAN_HOME'


def _param(line: str) -> tuple[str, Any]:
    key, sep, value = line.partition('=')
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f'expected key=value, got "{line}".')
    try:
        numbers = parse_float_list(value)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))
    return key.strip(), numbers[0] if len(numbers) == 1 else numbers


def _floats(line: str) -> list[float]:
    try:
        return parse_float_list(line)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))


def build_parser(settings: AppSettings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=settings['threads'].value, help='worker count')
    common.add_argument('--out', help='output folder')
    common.add_argument('--log-level', default=settings['logging_level'].value, choices=LOG_LEVELS)
    common.add_argument('--tol-gap', type=float, default=settings['tol_gap'].value)
    common.add_argument('--tol-residual', type=float, default=settings['tol_residual'].value)
    common.add_argument('--tol-hj', type=float, default=settings['tol_hj'].value)
    common.add_argument('--tol-dual', type=float, default=settings['tol_dual'].value)
    common.add_argument('--json', action='store_true', help='print the result as JSON')

    parser = argparse.ArgumentParser(prog='mfplan', description='Deterministic mean field planning solver.')
    parser.add_argument('--version', action='version', version=f'mfplan {app_ver}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen', parents=[common], help='write an endpoint density')
    p.add_argument('--kind', required=True, choices=GENERATORS)
    p.add_argument('--grid', required=True)
    p.add_argument('--param', type=_param, action='append', default=[], help='key=value[,value]')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--name')
    p.add_argument('--csv', action='store_true', default=settings['export_csv'].value)

    p = sub.add_parser('solve', parents=[common], help='solve a planning instance')
    p.add_argument('--model', required=True)
    p.add_argument('--grid', required=True)
    p.add_argument('--m0', required=True)
    p.add_argument('--m1', required=True)
    p.add_argument('--config')
    p.add_argument('--csv', action='store_true', default=settings['export_csv'].value)

    p = sub.add_parser('kl', parents=[common], help='Kantorovich-Lebesgue costs and distance')
    p.add_argument('--grid', required=True)
    p.add_argument('--m0', required=True)
    p.add_argument('--m1', required=True)
    p.add_argument('--p', type=float, default=2.0)
    p.add_argument('--a', type=_floats, default=[0.5, 1.0, 2.0])
    p.add_argument('--refine', action='store_true')
    p.add_argument('--config')

    p = sub.add_parser('diagnose', parents=[common], help='recompute the certificates of a run')
    p.add_argument('--run', required=True)

    p = sub.add_parser('trace', parents=[common], help='trace particles through a run')
    p.add_argument('--run', required=True)
    p.add_argument('--n', type=int, default=10000)
    p.add_argument('--seed', type=int, default=7)
    p.add_argument('--steps', type=int)
    p.add_argument('--paths')

    return parser


def _render(console: Console, command: str, response: Response, as_json: bool) -> None:
    payload = to_jsonable(response.payload())

    if response.is_error or as_json:
        print(json.dumps(payload, sort_keys=True))
        return

    table = Table(title=f'mfplan {command}')
    table.add_column('key')
    table.add_column('value')
    for key, item in (payload['value'] or {}).items():
        if isinstance(item, dict):
            item = ', '.join(f'{k}={v:.4g}' if isinstance(v, float) else f'{k}={v}' for k, v in item.items())
        elif isinstance(item, float):
            item = f'{item:.8g}'
        table.add_row(str(key), str(item))
    console.print(table)


def main(argv: Optional[list[str]] = None) -> int:
    settings = AppSettings(os.environ.get(HOME_VARIABLE))
    args = build_parser(settings).parse_args(argv)

    logger = logging.getLogger('mfplan')
    handler = RichHandler(console=Console(stderr=True), show_path=False)
    handler.setLevel(args.log_level)
    logger.addHandler(handler)
    if logging.getLevelName(args.log_level) < logger.level:
        logger.setLevel(args.log_level)
    logger.debug(LOGO.format(app_ver))

    kwargs = dict(vars(args))
    command = kwargs['command']
    as_json = kwargs.pop('json')
    kwargs.pop('log_level')
    kwargs['tolerances'] = {
        'gap': kwargs.pop('tol_gap'),
        'residual': kwargs.pop('tol_residual'),
        'hj': kwargs.pop('tol_hj'),
        'weak_duality': kwargs['tol_dual'],
        'defect': kwargs.pop('tol_dual'),
    }
    if 'param' in kwargs:
        kwargs['params'] = dict(kwargs.pop('param'))
    if kwargs['out'] is None:
        kwargs.pop('out')
    kwargs['argv'] = to_jsonable({k: v for k, v in kwargs.items() if k != 'tolerances'})

    try:
        response = dispatch(**kwargs)
    except Exception as error:
        logger.error(f'{type(error).__name__}: {error}')
        response = Response.from_exception(error)
    finally:
        logger.removeHandler(handler)
        settings.close()

    _render(Console(), command, response, as_json)

    return response.exit_code


if __name__ == '__main__':
    sys.exit(main())
