import numpy as np
import pytest

from mfplan.responses import CertificateResponse, Response
from mfplan.utils import config_hash, file_sha256, parse_float_list, to_jsonable, write_csv


def test_config_hash_ignores_key_order():
    a = {'grid': {'d': 1, 'nx': 16}, 'solver': {'theta': 1.0}}
    b = {'solver': {'theta': 1.0}, 'grid': {'nx': 16, 'd': 1}}
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    assert config_hash(a) != config_hash({'grid': {'d': 1, 'nx': 32}, 'solver': {'theta': 1.0}})


def test_parse_float_list():
    assert parse_float_list('0.5, 1,2') == [0.5, 1.0, 2.0]
    with pytest.raises(ValueError):
        parse_float_list(' , ')
    with pytest.raises(ValueError):
        parse_float_list('1,two')


def test_to_jsonable():
    value = to_jsonable({1: np.arange(3), 'x': (np.float64(0.5), float('inf')), 'n': np.int64(4)})
    assert value == {'1': [0, 1, 2], 'x': [0.5, 'inf'], 'n': 4}


def test_write_csv_and_digest(tmp_path):
    path = str(tmp_path / 'rows.csv')
    write_csv(path, ('a', 'b'), [(1, 0.1), (2, 0.2)])
    with open(path, encoding='utf-8') as f:
        assert f.read().splitlines() == ['a,b', '1,0.1', '2,0.2']
    assert file_sha256(path) == file_sha256(path)


def test_responses():
    assert Response.success({'a': 1}).status == 'success'
    assert Response.error('boom').is_error
    ok = CertificateResponse({'gap': 0.0})
    assert not ok.is_error and ok.mode == 'certificate'
    failed = CertificateResponse({'gap': 1.0}, ['gap'])
    assert failed.is_error and failed.failed == ['gap']


def test_response_payloads():
    assert Response.success({'a': 1}).exit_code == 0
    error = Response.from_exception(ValueError('bad grid'))
    assert error.exit_code == 2
    assert error.payload() == {'status': 'error', 'error': 'ValueError', 'message': 'bad grid'}
    assert Response.error('boom').payload()['message'] == 'boom'

    failed = CertificateResponse({'gap': 1.0}, ['gap', 'hj'])
    assert failed.exit_code == 1
    payload = failed.payload()
    assert payload['error'] == 'CertificateFailure'
    assert payload['value'] == {'gap': 1.0}
    assert CertificateResponse({'gap': 0.0}).payload() == {'status': 'success', 'value': {'gap': 0.0}}
