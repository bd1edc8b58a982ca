import csv
import json
import warnings

import numpy as np
import pytest

from .. import cli, models
from ..config import RunConfig
from ..errors import ConfigError, HypothesisWarning
from ..output import CSV_COLUMNS, read_curve_csv


def _run_config(**changes):
    data = {
        'name': 'unforced',
        'problem': {'family': 'lazer_solimini', 'c': 0.5, 'T': 1.0, 'p': 1.0, 'e': 0.0},
        'continuation': {'xi_start': 1.0, 'xi_end': 3.0, 'delta_xi': 0.25, 'grid_N': 128, 'newton_iters': 4},
        'analysis': {'expected_shape': 'monotone-decreasing'},
    }
    for block, values in changes.items():
        data.setdefault(block, {}).update(values)
    return data

@pytest.fixture
def write_config(tmp_path):
    def write(**changes):
        path = tmp_path/'run.json'
        path.write_text(json.dumps(_run_config(**changes)))
        return path
    return write


def test_trace_writes_artifacts(tmp_path, write_config):
    config = write_config()
    out = tmp_path/'out'
    assert cli.main(['trace', '--config', str(config), '--out-dir', str(out)]) == cli.EXIT_OK

    with open(out/'curve.csv', newline='') as file:
        rows = list(csv.reader(file))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 10

    table = read_curve_csv(out/'curve.csv')
    np.testing.assert_allclose(table.xi, np.linspace(1.0, 3.0, 9), atol=1e-12)
    np.testing.assert_allclose(table.mu, 1.0/table.xi, rtol=1e-10)

    assert (out/'curve.svg').read_text().lstrip().startswith('<?xml')
    report = json.loads((out/'report.json').read_text())
    assert report['points'] == 9
    assert report['shape']['classification'] == 'monotone-decreasing'
    assert report['warm_start_rate'] == 1.0


def test_outputs_are_reproducible(tmp_path, write_config):
    config = write_config()
    for name in ('first', 'second'):
        assert cli.main(['trace', '--config', str(config), '--out-dir', str(tmp_path/name)]) == cli.EXIT_OK
    for artifact in ('curve.csv', 'curve.svg'):
        assert (tmp_path/'first'/artifact).read_bytes() == (tmp_path/'second'/artifact).read_bytes()


def test_command_line_overrides(tmp_path, write_config):
    config = write_config()
    out = tmp_path/'out'
    args = ['trace', '--config', str(config), '--out-dir', str(out), '--delta-xi', '0.5', '--grid-n', '64']
    assert cli.main(args) == cli.EXIT_OK
    assert read_curve_csv(out/'curve.csv').rows == 5
    report = json.loads((out/'report.json').read_text())
    assert report['continuation']['grid_N'] == 64


def test_trace_both_ways_from_xi0(tmp_path, write_config):
    config = write_config(continuation={'xi0': 2.0, 'delta_xi': 0.5})
    out = tmp_path/'out'
    assert cli.main(['trace', '--config', str(config), '--out-dir', str(out)]) == cli.EXIT_OK
    table = read_curve_csv(out/'curve.csv')
    np.testing.assert_allclose(table.xi, [1.0, 1.5, 2.0, 2.5, 3.0], atol=1e-12)


def test_verify_and_analyze(tmp_path, write_config):
    config = write_config()
    out = str(tmp_path)
    assert cli.main(['trace', '--config', str(config), '--out-dir', out]) == cli.EXIT_OK
    assert cli.main(['verify', '--config', str(config), '--out-dir', out]) == cli.EXIT_OK
    report = json.loads((tmp_path/'report_verify.json').read_text())
    assert report['failures'] == 0
    assert report['rows'] == 9
    assert report['steps'] == 3*128

    assert cli.main(['analyze', '--config', str(config), '--out-dir', out]) == cli.EXIT_OK
    report = json.loads((tmp_path/'report_analyze.json').read_text())
    assert report['problems'] == []


def test_verify_detects_tampered_data(tmp_path, write_config):
    config = write_config()
    assert cli.main(['trace', '--config', str(config), '--out-dir', str(tmp_path)]) == cli.EXIT_OK

    path = tmp_path/'curve.csv'
    rows = list(csv.reader(path.read_text().splitlines()))
    rows[3][1] = repr(float(rows[3][1]) + 0.1)
    tampered = tmp_path/'tampered.csv'
    tampered.write_text('\n'.join(','.join(row) for row in rows) + '\n')

    args = ['verify', '--config', str(config), '--out-dir', str(tmp_path), '--csv', str(tampered)]
    assert cli.main(args) == cli.EXIT_VERIFICATION
    report = json.loads((tmp_path/'report_verify.json').read_text())
    assert report['failures'] == 1
    assert not report['results'][2]['passed']


def test_shape_mismatch(tmp_path, write_config):
    config = write_config(analysis={'expected_shape': 'single-interior-minimum'})
    out = str(tmp_path)
    assert cli.main(['trace', '--config', str(config), '--out-dir', out]) == cli.EXIT_OK
    assert cli.main(['analyze', '--config', str(config), '--out-dir', out]) == cli.EXIT_VERIFICATION


def test_analyze_locates_solutions_at_mu(tmp_path, write_config):
    config = write_config(analysis={'mu_star': [0.45, 2.0]})
    out = str(tmp_path)
    assert cli.main(['trace', '--config', str(config), '--out-dir', out]) == cli.EXIT_OK
    assert cli.main(['analyze', '--config', str(config), '--out-dir', out]) == cli.EXIT_OK
    report = json.loads((tmp_path/'report_analyze.json').read_text())
    counts = [entry['count'] for entry in report['solutions_at_mu']]
    assert counts == [1, 0]
    assert report['solutions_at_mu'][0]['solutions'][0]['xi'] == pytest.approx(1/0.45, rel=1e-8)


def test_bad_expression(tmp_path, write_config, caplog):
    config = write_config(problem={'e': '6*sin(2*pi*t'})
    assert cli.main(['trace', '--config', str(config), '--out-dir', str(tmp_path)]) == cli.EXIT_CONFIG
    assert 'problem.e' in caplog.text
    assert 'offset 12' in caplog.text


@pytest.mark.parametrize('changes', [
    {'continuation': {'xi0': 5.0}},
    {'continuation': {'grid_N': 2}},
    {'problem': {'b': 1.0}},
    {'output': {'format': 'png'}},
])
def test_config_errors(tmp_path, write_config, changes):
    config = write_config(**changes)
    assert cli.main(['trace', '--config', str(config), '--out-dir', str(tmp_path)]) == cli.EXIT_CONFIG


def test_missing_inputs(tmp_path, write_config):
    assert cli.main(['trace', '--config', str(tmp_path/'none.json'), '--out-dir', str(tmp_path)]) == cli.EXIT_CONFIG
    config = write_config()
    assert cli.main(['verify', '--config', str(config), '--out-dir', str(tmp_path)]) == cli.EXIT_CONFIG


def test_numerical_failure(tmp_path, write_config, caplog):
    config = write_config(continuation={'positivity_floor': 1.5})
    assert cli.main(['trace', '--config', str(config), '--out-dir', str(tmp_path)]) == cli.EXIT_NUMERICAL
    assert 'numerical failure' in caplog.text


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        cli.main(['trace'])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(['reproduce', 'fig9'])


def test_xi0_outside_range():
    run = RunConfig.from_dict(_run_config(continuation={'xi0': 0.5}))
    with pytest.raises(ConfigError) as info:
        cli.trace_from_config(run)
    assert info.value.path == 'continuation.xi0'


def test_xi0_at_an_end():
    run = RunConfig.from_dict(_run_config(continuation={'xi0': 3.0, 'xi_start': 1.0, 'delta_xi': 0.5}))
    curve = cli.trace_from_config(run)
    np.testing.assert_allclose(curve.xi, [1.0, 1.5, 2.0, 2.5, 3.0], atol=1e-12)


def test_hypothesis_warnings():
    stiff = models.make_problem('mems', c=0.5, T=1.0, e=0.0, b=50.0, p=3.0, a=2.0)
    with pytest.warns(HypothesisWarning, match='b_below_omega2'):
        report = cli.warn_hypotheses(stiff)
    assert not report.passed

    fine = models.make_problem('mems', c=0.5, T=1.0, e=0.0, b=2.0, p=3.0, a=2.0)
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        assert cli.warn_hypotheses(fine).passed


def test_check_bounds(fast_config, lazer_solimini_unforced):
    from ..continuation import trace_curve
    curve = trace_curve(lazer_solimini_unforced, 1.0, 2.0, fast_config)
    records, failures = cli.check_bounds(curve)
    assert failures == 0
    assert len(records) == len(curve)
    assert {check['name'] for check in records[0]['checks']} >= {'mu_identity', 'mu_bound', 'lower_bound'}
