import numpy as np
import pytest

from singular_monge_ampere.exceptions import ParameterError
from singular_monge_ampere.export import emit_csv, format_value


def test_format_value():
    assert format_value(True) == 'true'
    assert format_value(np.bool_(False)) == 'false'
    assert format_value(1.0 / 3.0) == '0.333333333333333'
    assert format_value(np.float64(2.5)) == '2.5'
    assert format_value(np.int64(3)) == '3'
    assert format_value('ball(radius=1,n=2)') == 'ball(radius=1,n=2)'


def test_floats_parse_back(tmp_path):
    values = [np.pi, -1e-300, 6.02214076e23, 2.0 / 3.0]
    path = emit_csv([{'x': v} for v in values], str(tmp_path / 'floats.csv'))
    with open(path, encoding='utf-8') as f:
        parsed = [float(line) for line in f.read().splitlines()[1:]]
    np.testing.assert_allclose(parsed, values, rtol=1e-14)


def test_header_only_file(tmp_path):
    path = emit_csv([], str(tmp_path / 'empty.csv'), ['a', 'b'])
    with open(path, 'rb') as f:
        assert f.read() == b'a,b\n'


def test_line_endings_and_nested_directories(tmp_path):
    path = emit_csv([{'check': 'x', 'pass': True}, {'check': 'y', 'pass': False}],
                    str(tmp_path / 'nested' / 'dir' / 'rows.csv'))
    with open(path, 'rb') as f:
        assert f.read() == b'check,pass\nx,true\ny,false\n'


def test_rows_must_be_homogeneous(tmp_path):
    with pytest.raises(ParameterError):
        emit_csv([], str(tmp_path / 'rows.csv'))
    with pytest.raises(ParameterError):
        emit_csv([{'a': 1}, {'b': 2}], str(tmp_path / 'rows.csv'))
    with pytest.raises(ParameterError):
        emit_csv([{'a': 1}], str(tmp_path / 'rows.csv'), ['a', 'b'])
