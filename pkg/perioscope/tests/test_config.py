import json

import pytest

from .. import config
from ..config import ContinuationBlock, ProblemBlock, RunConfig, load_config
from ..errors import ConfigError, ExpressionSyntaxError, ProblemDefinitionError
from ..figures import FIGURES, figure_config, figure_names

MINIMAL = {
    'problem': {'family': 'lazer_solimini', 'c': 0.5, 'T': 1.0, 'p': 1.0, 'e': 0.0},
    'continuation': {'xi_start': 1.0, 'xi_end': 2.0},
}


def _with(block, **changes):
    data = json.loads(json.dumps(MINIMAL))
    data[block].update(changes)
    return data


def test_defaults():
    run = RunConfig.from_dict(MINIMAL)
    assert run.continuation.delta_xi == 0.1
    assert run.continuation.newton_iters == 2
    assert run.continuation.grid_N == 2048
    assert run.continuation.init_mode == 'cold'
    assert run.output.csv == 'curve.csv'
    assert run.analysis.verify_tol == 1e-5
    assert run.analysis.mu_star == ()


def test_config_fields_are_collected():
    fields = ProblemBlock.get_config_fields()
    assert fields[:4] == ['family', 'c', 'T', 'e']
    assert ProblemBlock.family.__doc__ == "Name of a registered problem family."


@pytest.mark.parametrize('data, path', [
    (_with('problem', q=1.0), 'problem'),
    (_with('continuation', delta=0.2), 'continuation'),
    ({**MINIMAL, 'plots': {}}, None),
])
def test_unknown_keys_rejected(data, path):
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(data)
    assert 'no config' in str(info.value)
    assert info.value.path == path


def test_missing_block_and_field():
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict({'problem': MINIMAL['problem']})
    assert info.value.path == 'continuation'

    data = json.loads(json.dumps(MINIMAL))
    del data['problem']['c']
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(data)
    assert info.value.path == 'problem.c'


@pytest.mark.parametrize('data, path', [
    (_with('problem', c=float('inf')), 'problem.c'),
    (_with('problem', T=-1.0), 'problem.T'),
    (_with('problem', family='duffing'), 'problem.family'),
    (_with('problem', e={'k': 1}), 'problem.e'),
    (_with('continuation', grid_N=512.0), 'continuation.grid_N'),
    (_with('continuation', init_mode='warm'), 'continuation.init_mode'),
    (_with('continuation', predictor='linear'), 'continuation.predictor'),
    (_with('continuation', init_mode={'homotopy': 0}), 'continuation.init_mode.homotopy'),
    ({**MINIMAL, 'analysis': {'expected_shape': 'u-shaped'}}, 'analysis.expected_shape'),
])
def test_invalid_values(data, path):
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(data)
    assert info.value.path == path


def test_unparsable_expression_reports_offset():
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(_with('problem', e='6*sin(2*pi*t'))
    assert info.value.path == 'problem.e'
    assert isinstance(info.value.__cause__, ExpressionSyntaxError)
    assert info.value.__cause__.offset == 12
    assert 'offset 12' in str(info.value)


def test_family_parameters_checked_on_build():
    run = RunConfig.from_dict(_with('problem', a=2.0))
    with pytest.raises(ProblemDefinitionError) as info:
        run.build_problem()
    assert info.value.path == 'problem.a'


def test_continuation_settings_checked_on_build():
    run = RunConfig.from_dict(_with('continuation', newton_iters=0))
    with pytest.raises(ConfigError) as info:
        run.build_continuation()
    assert info.value.path == 'continuation.newton_iters'


@pytest.mark.parametrize('mode, expected, steps', [
    ('cold', 'cold', 10),
    ('homotopy', 'homotopy', 10),
    ({'homotopy': 4}, 'homotopy', 4),
])
def test_init_mode(mode, expected, steps):
    cfg = RunConfig.from_dict(_with('continuation', init_mode=mode)).build_continuation()
    assert cfg.init_mode == expected
    assert cfg.homotopy_steps == steps


def test_overrides():
    run = RunConfig.from_dict(_with('continuation', xi0=1.5))
    changed = run.with_overrides(grid_N=256, delta_xi=0.5)
    assert changed.continuation.grid_N == 256
    assert changed.continuation.delta_xi == 0.5
    assert changed.continuation.xi0 == 1.5
    assert run.continuation.grid_N == 2048
    assert run.with_overrides().continuation == run.continuation


def test_xi_range():
    block = ContinuationBlock({'xi_start': 3.0, 'xi_end': 1.0})
    assert block.xi_range == (1.0, 3.0)


def test_build_problem():
    prob = RunConfig.from_dict({**MINIMAL, 'name': 'demo'}).build_problem()
    assert prob.name == 'demo'
    assert prob.family.p == 1.0


def test_save_and_load(tmp_path):
    run = figure_config('fig2')
    path = tmp_path/'fig2.json'
    config.save_config(run, path)
    again = load_config(path)
    assert again.to_dict() == run.to_dict()
    assert again.continuation == run.continuation


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path/'missing.json')
    bad = tmp_path/'bad.json'
    bad.write_text('{"problem": ')
    with pytest.raises(ConfigError) as info:
        load_config(bad)
    assert 'invalid JSON' in str(info.value)


@pytest.mark.parametrize('name', figure_names())
def test_figures_are_valid(name):
    run = figure_config(name)
    assert run.name == name
    prob = run.build_problem()
    assert prob.family.family == FIGURES[name]['problem']['family']
    run.build_continuation()


def test_figure_config_is_a_copy():
    run = figure_config('fig3')
    run.analysis.mu_star = [1.0]
    assert figure_config('fig3').analysis.mu_star == (0.0,)
    with pytest.raises(KeyError):
        figure_config('fig4')
