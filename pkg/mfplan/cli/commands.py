from __future__ import annotations

import os
import sys
import json
import logging

from typing import Any, Optional

import numpy as np
import scipy

from mfplan import __version__ as app_ver
from mfplan.cli.generators import generate
from mfplan.grid import GridSpec, FieldHeader, read_field, write_field, export_csv
from mfplan.grid.exceptions import FieldFormatError, GridSpecError
from mfplan.model import ModelSpec, load_model, dump_model, model_to_dict
from mfplan.primal import Solution, solve_planning, apriori_check
from mfplan.primal.solution import HISTORY_COLUMNS
from mfplan.primal.solver import POWER_SEED
from mfplan.dual import duality_report
from mfplan.metrics import kl_distance
from mfplan.lagrangian import (
    sample_particles,
    trace_ensemble,
    verify_superposition,
    path_optimality_check,
    transport_plan_summary,
)
from mfplan.responses import Response, CertificateResponse
from mfplan.settings import SolverConfig
from mfplan.utils import config_hash, file_sha256, write_csv, to_jsonable


logger = logging.getLogger(__name__)

RUN_FILES = {
    'model': 'model.json',
    'grid': 'grid.json',
    'solver': 'solver.json',
    'm0': 'm0.field',
    'm1': 'm1.field',
    'm': 'm.field',
    'w': 'w.field',
    'u': 'u.field',
    'alpha': 'alpha.field',
    'history': 'history.csv',
    'report': 'report.json',
    'manifest': 'manifest.json',
}


def _error(error: Exception) -> Response:
    logger.error(f'{type(error).__name__}: {error}')
    return Response.from_exception(error)


def _dump_json(path: str, data: Any) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(data), f, indent=4, sort_keys=True)
        f.flush()
        os.fsync(f.fileno())


def _load_json(path: str) -> Any:
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def load_grid(path: str) -> GridSpec:
    try:
        data = _load_json(path)
    except (OSError, json.JSONDecodeError) as error:
        raise GridSpecError(f'cannot read "{path}": {error}')
    if not isinstance(data, dict):
        raise GridSpecError(f'"{path}" must hold a JSON object.')
    return GridSpec.from_dict(data)


def dump_grid(grid: GridSpec, path: str) -> None:
    _dump_json(path, grid.to_dict())


def _check_header(path: str, header: FieldHeader, grid: GridSpec, kind: str, is_slice: bool) -> None:
    if header.kind != kind or header.is_slice != is_slice:
        raise FieldFormatError(path, f'expected a {"slice" if is_slice else "space-time"} {kind} field.')
    if (header.d, header.nx, header.R) != (grid.d, grid.nx, grid.R) or (not is_slice and header.nt != grid.nt):
        raise FieldFormatError(path, f'the field does not live on {grid}.')


def load_slice(path: str, grid: GridSpec) -> np.ndarray:
    header, data = read_field(path)
    _check_header(path, header, grid, 'density', True)
    return data  # type: ignore


def _load_run_field(run: str, name: str, grid: GridSpec, kind: str) -> Any:
    path = os.path.join(run, RUN_FILES[name])
    header, data = read_field(path)
    _check_header(path, header, grid, kind, False)
    return data


def _solver_config(path: Optional[str], threads: Optional[int]) -> SolverConfig:
    config = SolverConfig(path, load=True) if path else SolverConfig()
    if threads:
        config['threads'].value = threads
    return config


def _certificates(report: dict[str, Any], tolerances: dict[str, float]) -> list[str]:
    values = report['certificates']
    return [name for name, limit in tolerances.items() if not values[name] <= limit]


def build_report(model: ModelSpec, solution: Solution, tolerances: dict[str, float]) -> dict[str, Any]:
    """The report of a solved run; it depends on the stored fields and the density floor only."""
    diagnostics = duality_report(model, solution)
    report = {
        'diagnostics': diagnostics.to_dict(),
        'certificates': diagnostics.certificates(),
        'tolerances': dict(tolerances),
        'apriori': apriori_check(model, solution),
    }
    return to_jsonable(report)


def load_run(run: str) -> tuple[Solution, dict[str, Any]]:
    """Rebuild the solution stored in a run folder written by `solve`."""
    manifest = _load_json(os.path.join(run, RUN_FILES['manifest']))
    grid = load_grid(os.path.join(run, RUN_FILES['grid']))
    model = load_model(os.path.join(run, RUN_FILES['model']))
    solution = Solution(
        model=model,
        grid=grid,
        m0=load_slice(os.path.join(run, RUN_FILES['m0']), grid),
        m1=load_slice(os.path.join(run, RUN_FILES['m1']), grid),
        m=_load_run_field(run, 'm', grid, 'density'),
        w=_load_run_field(run, 'w', grid, 'momentum'),
        u=_load_run_field(run, 'u', grid, 'scalar'),
        alpha=_load_run_field(run, 'alpha', grid, 'scalar'),
        density_floor=float(manifest['density_floor']),
        iterations=int(manifest.get('iterations', 0)),
        converged=bool(manifest.get('converged', False)),
        config=_load_json(os.path.join(run, RUN_FILES['solver'])),
    )
    return solution, manifest


def _versions() -> dict[str, str]:
    return {
        'mfplan': app_ver,
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'python': sys.version.split()[0],
    }


def gen(
    *,
    kind: str,
    grid: str,
    params: dict[str, Any],
    seed: int = 0,
    name: Optional[str] = None,
    out: str = '.',
    csv=False,
    **_: Any,
) -> Response:
    try:
        spec = load_grid(grid)
        m = generate(kind, spec, params, seed)
        os.makedirs(out, exist_ok=True)
        path = os.path.join(out, f'{name or kind}.field')
        write_field(path, spec, m, 'density')
        if csv and spec.d == 1:
            export_csv(os.path.splitext(path)[0] + '.csv', spec, m)
    except Exception as error:
        return _error(error)

    logger.info(f'Density "{kind}" written to "{path}".')
    return Response.success({'path': path, 'kind': kind, 'mass': spec.mass(m), 'seed': seed})


def solve(
    *,
    model: str,
    grid: str,
    m0: str,
    m1: str,
    config: Optional[str] = None,
    out: str = 'run',
    threads: Optional[int] = None,
    tolerances: dict[str, float],
    csv=False,
    argv: Optional[dict[str, Any]] = None,
    **_: Any,
) -> Response:
    try:
        spec = load_grid(grid)
        model_spec = load_model(model)
        start = load_slice(m0, spec)
        end = load_slice(m1, spec)
        solver_config = _solver_config(config, threads)

        solution = solve_planning(model_spec, spec, start, end, solver_config)
        report = build_report(model_spec, solution, tolerances)

        os.makedirs(out, exist_ok=True)
        paths = {key: os.path.join(out, value) for key, value in RUN_FILES.items()}
        write_field(paths['m'], spec, solution.m, 'density')
        write_field(paths['w'], spec, solution.w, 'momentum')
        write_field(paths['u'], spec, solution.u, 'scalar')
        write_field(paths['alpha'], spec, solution.alpha, 'scalar')
        write_field(paths['m0'], spec, solution.m0, 'density')
        write_field(paths['m1'], spec, solution.m1, 'density')
        dump_model(model_spec, paths['model'])
        dump_grid(spec, paths['grid'])
        solver_config.dump(paths['solver'])
        write_csv(paths['history'], HISTORY_COLUMNS, solution.history.rows())
        if csv and spec.d == 1:
            export_csv(os.path.join(out, 'm.csv'), spec, solution.m)
            export_csv(os.path.join(out, 'u.csv'), spec, solution.u)
        _dump_json(paths['report'], report)

        manifest = {
            'version': app_ver,
            'command': 'solve',
            'parameters': argv or {},
            'config_hash': config_hash(
                {
                    'solver': solver_config.as_dict(),
                    'grid': spec.to_dict(),
                    'model': model_to_dict(model_spec, paths['model']),
                }
            ),
            'inputs': {name: file_sha256(paths[name]) for name in ('m0', 'm1')},
            'seeds': {'power_iteration': POWER_SEED},
            'versions': _versions(),
            'density_floor': solution.density_floor,
            'iterations': solution.iterations,
            'converged': solution.converged,
        }
        _dump_json(paths['manifest'], manifest)
    except Exception as error:
        return _error(error)

    failed = _certificates(report, tolerances)
    if failed:
        logger.warning(f'Certificates failed: {", ".join(failed)}.')
    value = {
        'run': out,
        'iterations': solution.iterations,
        'converged': solution.converged,
        'B': report['diagnostics']['B'],
        'A': report['diagnostics']['A'],
        'certificates': report['certificates'],
        'tolerances': tolerances,
    }
    return CertificateResponse(value, failed)


def kl(
    *,
    grid: str,
    m0: str,
    m1: str,
    p: float,
    a: list[float],
    refine=False,
    config: Optional[str] = None,
    threads: Optional[int] = None,
    out: Optional[str] = None,
    **_: Any,
) -> Response:
    try:
        spec = load_grid(grid)
        start = load_slice(m0, spec)
        end = load_slice(m1, spec)
        solver_config = _solver_config(config, None)
        report = to_jsonable(kl_distance(spec, start, end, a, p, solver_config, refine=refine, threads=threads or 1))
        if out:
            os.makedirs(out, exist_ok=True)
            _dump_json(os.path.join(out, 'kl.json'), report)
    except Exception as error:
        return _error(error)

    return Response.success(report)


def diagnose(*, run: str, tolerances: dict[str, float], out: Optional[str] = None, **_: Any) -> Response:
    try:
        solution, _manifest = load_run(run)
        report = build_report(solution.model, solution, tolerances)
        target = out or run
        os.makedirs(target, exist_ok=True)
        _dump_json(os.path.join(target, 'diagnose.json'), report)
    except Exception as error:
        return _error(error)

    failed = _certificates(report, tolerances)
    return CertificateResponse(report, failed)


def trace(
    *,
    run: str,
    n: int = 10000,
    seed: int = 7,
    steps: Optional[int] = None,
    paths: Optional[str] = None,
    out: Optional[str] = None,
    **_: Any,
) -> Response:
    try:
        solution, _manifest = load_run(run)
        grid = solution.grid
        steps = 4 * int(np.ceil((steps or 4 * grid.nt) / 4))
        ensemble = trace_ensemble(sample_particles(grid, solution.m0, n, seed), solution, steps)

        superposition = verify_superposition(solution, n, seed, ensemble=ensemble)
        optimality = path_optimality_check(solution, ensemble, seed=seed)
        plan = transport_plan_summary(ensemble, grid)
        optimality.pop('residuals')

        target = out or run
        os.makedirs(target, exist_ok=True)
        paths = paths or os.path.join(target, 'paths.csv')
        axes = ['x'] if grid.d == 1 else ['x', 'y']
        rows = (
            (i, float(t), *ensemble.positions[k, :, i].tolist(), float(ensemble.cost_so_far[k, i]))
            for i in range(len(ensemble))
            for k, t in enumerate(ensemble.times)
        )
        write_csv(paths, ('id', 't', *axes, 'cost_so_far'), rows)

        summary = {
            'seed': seed,
            'particles': n,
            'steps': steps,
            'superposition': superposition,
            'optimality': optimality,
            'plan': {
                'marginal0': plan['marginal0'],
                'marginal1': plan['marginal1'],
                'mean_displacement': plan['mean_displacement'],
                'std_displacement': plan['std_displacement'],
            },
        }
        _dump_json(os.path.join(target, 'summary.json'), summary)
    except Exception as error:
        return _error(error)

    return Response.success(to_jsonable({'paths': paths, **ensemble.summary()}))
