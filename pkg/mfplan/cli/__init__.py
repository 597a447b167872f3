from mfplan.cli.generators import GENERATORS, generate
from mfplan.cli.commands import build_report, load_grid, dump_grid, load_slice, load_run
from mfplan.cli.dispatcher import MAP, dispatch

__all__ = (
    'GENERATORS',
    'generate',
    'build_report',
    'load_grid',
    'dump_grid',
    'load_slice',
    'load_run',
    'MAP',
    'dispatch',
)
