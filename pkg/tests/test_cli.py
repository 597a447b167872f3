import json

import numpy as np
import pytest

from mfplan.__main__ import main
from mfplan.cli import dispatch, generate, load_run
from mfplan.cli.commands import RUN_FILES
from mfplan.grid import read_field
from mfplan.grid.exceptions import GridSpecError

LOOSE = ['--tol-gap', '1e9', '--tol-hj', '1e9', '--tol-residual', '1e-6', '--tol-dual', '1e9']


@pytest.fixture
def workspace(tmp_path, home):
    (tmp_path / 'grid.json').write_text(json.dumps({'d': 1, 'nt': 8, 'nx': 16, 'R': 2.0}))
    (tmp_path / 'model.json').write_text(json.dumps({'p': 2.0}))
    (tmp_path / 'solver.json').write_text(json.dumps({'max_iters': 30, 'check_every': 10}))
    return tmp_path


def _gen(workspace, name):
    return main(
        [
            'gen',
            '--kind', 'box',
            '--grid', str(workspace / 'grid.json'),
            '--param', 'center=0',
            '--param', 'width=4',
            '--name', name,
            '--out', str(workspace),
        ]
    )  # fmt: skip


def _solve(workspace, *extra):
    return main(
        [
            'solve',
            '--model', str(workspace / 'model.json'),
            '--grid', str(workspace / 'grid.json'),
            '--m0', str(workspace / 'm0.field'),
            '--m1', str(workspace / 'm1.field'),
            '--config', str(workspace / 'solver.json'),
            '--out', str(workspace / 'run'),
            *extra,
        ]
    )  # fmt: skip


def _last_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


@pytest.fixture
def run(workspace):
    assert _gen(workspace, 'm0') == 0
    assert _gen(workspace, 'm1') == 0
    assert _solve(workspace, *LOOSE) == 0
    return workspace / 'run'


def test_gen_writes_a_unit_mass_slice(workspace):
    assert _gen(workspace, 'm0') == 0
    header, data = read_field(str(workspace / 'm0.field'))
    assert header.is_slice
    assert np.allclose(data, 0.25)


def test_solve_writes_the_run_folder(run):
    for name in RUN_FILES.values():
        assert (run / name).is_file()

    manifest = json.loads((run / 'manifest.json').read_text())
    assert manifest['iterations'] <= 30
    assert len(manifest['config_hash']) == 64
    assert set(manifest['inputs']) == {'m0', 'm1'}

    history = (run / 'history.csv').read_text().splitlines()
    assert history[0] == 'iteration,B,A,gap,rel_gap,residual,continuity'

    solution, _ = load_run(str(run))
    assert np.allclose(solution.m, 0.25, atol=1e-12)


def test_diagnose_reproduces_the_report(run):
    assert main(['diagnose', '--run', str(run), *LOOSE]) == 0
    report = json.loads((run / 'report.json').read_text())
    again = json.loads((run / 'diagnose.json').read_text())
    assert again['diagnostics'] == report['diagnostics']
    assert again['certificates'] == report['certificates']


def test_trace_writes_paths(run):
    assert main(['trace', '--run', str(run), '--n', '200', '--steps', '8']) == 0
    lines = (run / 'paths.csv').read_text().splitlines()
    assert lines[0] == 'id,t,x,cost_so_far'
    assert len(lines) == 1 + 200 * 9
    summary = json.loads((run / 'summary.json').read_text())
    assert summary['particles'] == 200
    assert summary['steps'] == 8


def test_kl_prints_json(workspace, capsys):
    assert _gen(workspace, 'm0') == 0
    assert _gen(workspace, 'm1') == 0
    capsys.readouterr()
    code = main(
        [
            'kl',
            '--grid', str(workspace / 'grid.json'),
            '--m0', str(workspace / 'm0.field'),
            '--m1', str(workspace / 'm1.field'),
            '--a', '0.5,1,2',
            '--config', str(workspace / 'solver.json'),
            '--json',
        ]
    )  # fmt: skip
    assert code == 0
    result = _last_json(capsys)
    assert result['status'] == 'success'
    assert result['value']['d_KL'] == pytest.approx(0.3125, abs=1e-9)
    assert result['value']['argmin'] == 2.0


def test_errors_exit_with_two(workspace, capsys):
    assert _gen(workspace, 'm0') == 0
    assert _gen(workspace, 'm1') == 0
    (workspace / 'model.json').unlink()
    capsys.readouterr()
    assert _solve(workspace) == 2
    result = _last_json(capsys)
    assert result['status'] == 'error'
    assert result['error'] == 'ModelSpecError'


def test_failed_certificates_exit_with_one(workspace, capsys):
    assert _gen(workspace, 'm0') == 0
    assert _gen(workspace, 'm1') == 0
    capsys.readouterr()
    assert _solve(workspace, '--tol-gap=-1') == 1
    result = _last_json(capsys)
    assert result['error'] == 'CertificateFailure'
    assert (workspace / 'run' / 'report.json').is_file()


def test_generators(grid1, grid2):
    with pytest.raises(GridSpecError):
        generate('ring', grid1, {})
    with pytest.raises(ValueError):
        generate('spiral', grid1, {})
    with pytest.raises(GridSpecError):
        generate('gaussian', grid1, {'noise': 1.5})

    noisy = generate('gaussian', grid2, {'noise': 0.2}, seed=4)
    assert grid2.mass(noisy) == pytest.approx(1.0)
    assert np.array_equal(noisy, generate('gaussian', grid2, {'noise': 0.2}, seed=4))
    assert not np.array_equal(noisy, generate('gaussian', grid2, {'noise': 0.2}, seed=5))


def test_dispatch_errors():
    with pytest.raises(KeyError):
        dispatch()
    with pytest.raises(ValueError):
        dispatch(command='fly')
