import json
import math

import pytest

from app import energy_grid, fig1_config, main
from config import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_RESOURCE
from support_functions import read_csv, validate_config

FREE_FACTOR_2D = (1.0 + (2.0 * math.pi) ** -0.5) ** 2


def _write_config(tmp_path, config, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def _run(tmp_path, *argv):
    return main(['--log-file', str(tmp_path / 'lab.log'), *argv])


@pytest.fixture
def alloy_config():
    return {
        'schema_version': 1,
        'field': {'kind': 'alloy', 'law': 'uniform'},
        'grid': {'dimension': 2, 'cells': 4, 'spacing': 1.0, 'origin': -0.5},
        'gauge': {'B': 1.0},
        'ensemble': {'realizations': 3, 'base_seed': 2},
    }


def test_verify_decoupling_passes(tmp_path):
    out = tmp_path / 'out'
    assert _run(tmp_path, 'verify', 'decoupling', '--out', str(out)) == EXIT_OK
    lines = (out / 'reports.jsonl').read_text().splitlines()
    assert lines[0].startswith('# manifest: ')
    record = json.loads(lines[1])
    assert record['name'] == 'decoupling'
    assert record['pass'] is True
    assert set(record['margin']) == {'worst_violation', 'slack'}
    manifest = json.loads((out / 'manifest.json').read_text())
    assert lines[0].endswith(manifest['digest'])


def test_zero_tolerance_override_fails(tmp_path):
    assert _run(tmp_path, 'verify', 'decoupling', '--tol', '0', '--out', str(tmp_path / 'out')) == EXIT_CHECK_FAILED


def test_unknown_check_is_a_config_error(tmp_path):
    assert _run(tmp_path, 'verify', 'no-such-check', '--out', str(tmp_path / 'out')) == EXIT_CONFIG


def test_field_sample_is_byte_reproducible(tmp_path):
    config = _write_config(tmp_path, {
        'schema_version': 1,
        'field': {'kind': 'none'},
        'grid': {'dimension': 1, 'cells': 5, 'spacing': 0.5},
    })
    first, second = tmp_path / 'a', tmp_path / 'b'
    assert _run(tmp_path, 'field', 'sample', '--config', config, '--out', str(first)) == EXIT_OK
    assert _run(tmp_path, 'field', 'sample', '--config', config, '--out', str(second)) == EXIT_OK
    assert (first / 'field.csv').read_bytes() == (second / 'field.csv').read_bytes()
    frame = read_csv(first / 'field.csv')
    assert len(frame) == 5
    assert (frame.iloc[:, -1] == 0).all()


def test_bad_schema_version(tmp_path, alloy_config):
    config = _write_config(tmp_path, dict(alloy_config, schema_version=2))
    assert _run(tmp_path, 'field', 'sample', '--config', config, '--out', str(tmp_path / 'out')) == EXIT_CONFIG


def test_missing_config(tmp_path):
    assert _run(tmp_path, 'ids', 'run', '--out', str(tmp_path / 'out')) == EXIT_CONFIG
    assert _run(tmp_path, 'ids', 'run', '--config', str(tmp_path / 'absent.json')) == EXIT_CONFIG


def test_alloy_uniform_eval(tmp_path):
    config = _write_config(tmp_path, {
        'schema_version': 1,
        'field': {'kind': 'alloy', 'law': 'uniform', 'dimension': 2},
        'wegner': {'family': 'alloy-uniform', 'energies': [0.5, 0.5, 1], 'beta': 1.0},
    })
    out = tmp_path / 'out'
    assert _run(tmp_path, 'wegner', 'eval', '--config', config, '--out', str(out)) == EXIT_OK
    frame = read_csv(out / 'wegner_eval.csv')
    assert list(frame.columns) == ['E', 'W', 'beta_star', 'ell_star', 's_star', 'family']
    assert len(frame) == 1
    assert frame['W'].iloc[0] == pytest.approx(FREE_FACTOR_2D * math.exp(0.5), rel=1e-12)


def test_wegner_needs_a_dimension(tmp_path):
    config = _write_config(tmp_path, {'schema_version': 1, 'field': {'kind': 'alloy', 'law': 'uniform'}})
    assert _run(tmp_path, 'wegner', '--config', config, '--out', str(tmp_path / 'out')) == EXIT_CONFIG


def test_asymptotics_need_gaussian_model(tmp_path):
    config = _write_config(tmp_path, {'schema_version': 1, 'field': {'kind': 'alloy', 'dimension': 2}})
    assert _run(tmp_path, 'wegner', 'asymptotics', '--config', config, '--out', str(tmp_path / 'out')) == EXIT_CONFIG


def test_gaussian_asymptotics(tmp_path):
    config = _write_config(tmp_path, {
        'schema_version': 1,
        'field': {'kind': 'gaussian', 'c0': 1.0, 'tau': 1.0, 'dimension': 2},
    })
    out = tmp_path / 'out'
    assert _run(tmp_path, 'wegner', 'asymptotics', '--config', config, '--out', str(out)) == EXIT_OK
    frame = read_csv(out / 'wegner_asymptotics.csv')
    assert list(frame.columns) == ['E', 'regime', 'ell', 'beta', 'W', 'ratio', 'limit']
    assert set(frame['regime']) == {'low', 'high'}


def test_large_box_exits_with_resource_code(tmp_path):
    config = _write_config(tmp_path, {
        'schema_version': 1,
        'field': {'kind': 'none'},
        'grid': {'dimension': 2, 'cells': 91, 'spacing': 1.0},
        'boundary': ['N'],
    })
    assert _run(tmp_path, 'ids', 'run', '--config', config, '--out', str(tmp_path / 'out')) == EXIT_RESOURCE


def test_ids_run_with_staircase(tmp_path, alloy_config):
    config = _write_config(tmp_path, dict(alloy_config, ids={'energies': [0.0, 3.0, 7], 'staircase': True}))
    out = tmp_path / 'out'
    assert _run(tmp_path, 'ids', 'run', '--config', config, '--out', str(out)) == EXIT_OK
    frame = read_csv(out / 'ids.csv')
    assert list(frame.columns) == ['size', 'boundary', 'E', 'mean', 'stderr', 'R', 'cauchy', 'staircase']
    dirichlet = frame[frame['boundary'] == 'D']['mean'].to_numpy()
    neumann = frame[frame['boundary'] == 'N']['mean'].to_numpy()
    assert len(dirichlet) == len(neumann) == 7
    assert (dirichlet <= neumann).all()
    assert (frame['R'] == 3).all()
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['seeds'] == [2, 3, 0]


def test_seed_flag_overrides_config(tmp_path, alloy_config):
    config = _write_config(tmp_path, alloy_config)
    out = tmp_path / 'out'
    assert _run(tmp_path, 'ids', 'run', '--config', config, '--seed', '8', '--out', str(out)) == EXIT_OK
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['config']['ensemble']['base_seed'] == 8
    assert manifest['seeds'] == [8, 9, 10]


def test_energy_grid():
    assert list(energy_grid([0.0, 1.0, 3])) == [0.0, 0.5, 1.0]
    with pytest.raises(ValueError):
        energy_grid([0.0, 1.0, 0])


def test_fig1_preset_is_valid():
    config = validate_config(fig1_config())
    assert config['field']['c0'] == pytest.approx(0.04)
    assert config['grid']['origin'] == -32.0


@pytest.mark.slow
def test_fig1_curve(tmp_path):
    out = tmp_path / 'out'
    assert _run(tmp_path, 'wegner', '--fig1', '--out', str(out)) == EXIT_OK
    frame = read_csv(out / 'wegner_minimize.csv')
    assert len(frame) == 61
    assert frame['W'].is_monotonic_increasing
    assert (frame['family'] == 'gauss').all()
