"""The worked examples, traced on coarser grids than the defaults."""

import copy

import numpy as np
import pytest

from .. import models, verify
from ..cli import trace_from_config
from ..config import RunConfig
from ..figures import FIGURES

pytestmark = pytest.mark.slow

COARSE = {'grid_N': 512, 'delta_xi': 0.25, 'newton_iters': 4}

# default delta_xi and newton_iters, reduced grid
DEFAULT_STEPPING = {'grid_N': 512}


def _trace(name, **continuation):
    data = copy.deepcopy(FIGURES[name])
    data['continuation'].update(continuation)
    run = RunConfig.from_dict(data)
    return run, trace_from_config(run)

@pytest.fixture(scope='module')
def fig1_curve():
    return _trace('fig1', **COARSE)[1]

@pytest.fixture(scope='module')
def fig2_curve():
    return _trace('fig2', **COARSE)[1]

@pytest.fixture(scope='module')
def fig3_curve():
    return _trace('fig3', **COARSE)[1]

@pytest.fixture(scope='module', params=sorted(FIGURES))
def default_run(request):
    return _trace(request.param, **DEFAULT_STEPPING)


def _assert_bounds_hold(curve, every=4):
    for point in curve[::every]:
        for check in verify.bound_checks(curve.problem, point):
            assert check.passed, (point.xi, check)


## Default stepping

def test_default_stepping_covers_window(default_run):
    run, curve = default_run
    assert curve.stop_reason == 'completed', curve.stops
    assert curve.xi[0] == pytest.approx(min(run.continuation.xi_range))
    assert curve.xi[-1] == pytest.approx(max(run.continuation.xi_range))

def test_default_stepping_converges_warm(default_run):
    _, curve = default_run
    cfg = curve.config
    assert (cfg.newton_iters, cfg.delta_xi) == (2, 0.1)
    for point in curve:
        assert point.residual <= cfg.newton_tol, point.xi
    assert curve.warm_start_rate >= 0.95

def test_default_stepping_every_point_verifies(default_run):
    _, curve = default_run
    results = verify.verify_curve(curve, verify.VERIFY_TOL)
    failed = [(point.xi, result) for point, result in zip(curve, results) if not result.passed]
    assert not failed
    _assert_bounds_hold(curve, every=1)

def test_fig2_traces_down_to_lower_end():
    # the basis grows by about e^8 over a period at xi = 0.5
    _, curve = _trace('fig2', grid_N=1024, xi_start=0.5, xi_end=1.0, xi0=1.0)
    assert curve.stop_reason == 'completed', curve.stops
    assert curve.xi[0] == pytest.approx(0.5)
    assert verify.verify_ivp(curve.problem, curve[0]).passed


@pytest.mark.parametrize('name', ['fig2', 'fig3'])
def test_shape_is_stable_under_grid_refinement(name):
    reports = [verify.shape_report(_trace(name, **{**COARSE, 'grid_N': steps})[1])
               for steps in (1024, 2048, 4096)]
    assert [report.classification for report in reports] == [verify.SINGLE_INTERIOR_MINIMUM]*3
    assert reports[0].mu_min == pytest.approx(reports[-1].mu_min, abs=1e-6)


## Coarse stepping

def test_fig1_monotone(fig1_curve):
    assert fig1_curve.stop_reason == 'completed'
    assert fig1_curve.xi[0] == pytest.approx(0.4)
    assert fig1_curve.xi[-1] == pytest.approx(12.0)

    shape = verify.shape_report(fig1_curve)
    assert shape.classification == verify.MONOTONE_DECREASING
    assert shape.zero_crossings == ()
    assert fig1_curve.mu[-1] <= 0.5
    assert np.all(fig1_curve.mu > 0)

def test_fig1_points_verify(fig1_curve):
    results = verify.verify_curve(fig1_curve[::3], verify.VERIFY_TOL)
    assert all(result.passed for result in results), [r for r in results if not r.passed]
    _assert_bounds_hold(fig1_curve)


def test_fig2_single_minimum(fig2_curve):
    shape = verify.shape_report(fig2_curve)
    assert shape.classification == verify.SINGLE_INTERIOR_MINIMUM
    assert shape.mu_min > 0
    assert shape.second_diff_at_min > 0
    assert verify.convexity_at_minimum(fig2_curve) > 0

def test_fig2_solution_count(fig2_curve):
    mu_min = float(np.min(fig2_curve.mu))
    assert verify.solve_at_mu(fig2_curve, mu_min - 1.0) == []

    found = verify.solve_at_mu(fig2_curve, mu_min + 1.0)
    assert len(found) == 2
    for solution in found:
        assert solution.mu == pytest.approx(mu_min + 1.0, abs=1e-7)
        assert verify.verify_ivp(fig2_curve.problem, solution, verify.VERIFY_TOL).passed

def test_fig2_bounds(fig2_curve):
    _assert_bounds_hold(fig2_curve)


def test_fig3_sign_change(fig3_curve):
    shape = verify.shape_report(fig3_curve)
    assert shape.classification == verify.SINGLE_INTERIOR_MINIMUM
    assert shape.mu_min < 0
    assert fig3_curve.mu[0] > 0 > fig3_curve.mu[-1]
    assert shape.zero_crossings
    assert shape.zero_crossings[-1] > 1.0

    found = verify.solve_at_mu(fig3_curve, 0.0)
    assert len(found) == 1
    assert found[0].xi == pytest.approx(shape.zero_crossings[-1], abs=0.05)

def test_fig3_hypotheses(fig3_curve):
    report = models.validate(fig3_curve.problem)
    assert report['p2'].passed
    assert not report['p3'].passed
    _assert_bounds_hold(fig3_curve)
