import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from .. import models
from ..errors import DomainError, ProblemDefinitionError
from ..models import CondensedMatter, LazerSolimini, Mems, make_problem
from ..signals import signal_from_expression


def test_registered_families():
    assert set(models.family_names()) == {'lazer_solimini', 'mems', 'condensed_matter'}
    assert LazerSolimini.family == 'lazer_solimini'


@pytest.mark.parametrize('family, params, u, expected', [
    ('lazer_solimini', {'p': 0.5}, 4.0, 0.5),
    ('lazer_solimini', {'p': 2.0}, 2.0, 0.25),
    ('mems', {'b': 2.0, 'p': 3.0, 'a': 3.0}, 1.0, 5.0),
    ('condensed_matter', {'a': 3.0}, 1.0, 0.0),
    ('condensed_matter', {'a': 2.0}, 0.5, 2.0*(16.0 - 8.0)),
])
def test_g_values(family, params, u, expected):
    prob = make_problem(family, c=0.0, T=1.0, e=0.0, **params)
    assert prob.g(0.3, u) == pytest.approx(expected)


def test_g_rejects_nonpositive_u():
    prob = make_problem('lazer_solimini', c=0.0, T=1.0, e=0.0, p=1.0)
    for u in (0.0, -1.0, np.array([1.0, 0.0])):
        with pytest.raises(DomainError):
            prob.g(0.0, u)


def test_g_broadcasts_time_and_state():
    prob = make_problem('mems', c=0.5, T=0.8, e=0.0, b=2.0, p=3.0, a='2 + cos(2*pi*t/0.8)^3')
    times = np.linspace(0.0, 0.8, 5)
    values = prob.g(times, 1.0)
    assert values.shape == times.shape
    a = 2.0 + np.cos(2*np.pi*times/0.8)**3
    np.testing.assert_allclose(values, 2.0 + a)


_families = st.sampled_from([
    LazerSolimini(0.5),
    LazerSolimini(3.0),
    Mems(2.0, 3.0, signal_from_expression('2 + cos(2*pi*t)^3')),
    CondensedMatter(3.0),
])

@given(_families, st.floats(min_value=0.2, max_value=5.0), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=100, deadline=None)
def test_derivatives_match_finite_differences(family, u, t):
    h = 1e-6*u
    slope = (family.g(t, u + h) - family.g(t, u - h))/(2*h)
    curvature = (family.g_u(t, u + h) - family.g_u(t, u - h))/(2*h)
    assert family.g_u(t, u) == pytest.approx(slope, rel=1e-5, abs=1e-6)
    assert family.g_uu(t, u) == pytest.approx(curvature, rel=1e-5, abs=1e-6)


def test_condensed_matter_sign_changes():
    family = CondensedMatter(3.0)
    signs_below = (1.0, -1.0, 1.0)
    for func, point, sign in zip((family.g, family.g_u, family.g_uu), family.sign_change_points, signs_below):
        assert func(0.0, point) == pytest.approx(0.0, abs=1e-12)
        assert sign*func(0.0, point*0.9) > 0.0
        assert sign*func(0.0, point*1.1) < 0.0


def test_condensed_matter_slope_bound():
    family = CondensedMatter(3.0)
    u = np.linspace(0.5, 10.0, 20001)
    assert np.max(family.g_u(0.0, u)) == pytest.approx(family.sup_g_u(), rel=1e-5)
    assert CondensedMatter(-1.0).sup_g_u() == float('inf')


def test_homotopy_scaling():
    prob = make_problem('lazer_solimini', c=0.0, T=1.0, e=0.0, p=1.0)
    assert models.g_homotopy(prob, 0.5, 0.0, 2.0) == pytest.approx(0.25)
    assert models.g_u_homotopy(prob, 0.0, 0.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        models.g_homotopy(prob, 1.5, 0.0, 2.0)


@pytest.mark.parametrize('kwargs, path', [
    (dict(family='lazer_solimini', c=0.0, T=0.0, e=0.0, p=1.0), 'T'),
    (dict(family='lazer_solimini', c=0.0, T=1.0, e=0.0, p=-1.0), 'p'),
    (dict(family='lazer_solimini', c=float('nan'), T=1.0, e=0.0, p=1.0), 'c'),
    (dict(family='lazer_solimini', c=0.0, T=1.0, e='1 + sin(2*pi*t)', p=1.0), 'e'),
    (dict(family='lazer_solimini', c=0.0, T=1.0, e=0.0), 'p'),
    (dict(family='lazer_solimini', c=0.0, T=1.0, e=0.0, p=1.0, b=2.0), 'b'),
    (dict(family='mems', c=0.0, T=1.0, e=0.0, b=1.0, p=1.0, a='cos(2*pi*t)'), 'a'),
    (dict(family='duffing', c=0.0, T=1.0, e=0.0), 'family'),
])
def test_problem_definition_errors(kwargs, path):
    with pytest.raises(ProblemDefinitionError) as info:
        make_problem(**kwargs)
    assert info.value.path == path


def test_problem_describe():
    prob = make_problem('mems', c=0.5, T=0.8, e='5*sin(2*pi*t/0.8)', b=2.0, p=3.0, a=2.0, name='demo')
    data = prob.describe()
    assert data['family'] == 'mems'
    assert data['T'] == 0.8
    assert data['e'] == '5*sin(2*pi*t/0.8)'
    assert data['name'] == 'demo'
    assert prob.omega == pytest.approx(2*np.pi/0.8)


def test_validate_lazer_solimini(fig1_problem):
    report = models.validate(fig1_problem)
    assert report.passed
    assert report['g_u_below_omega2'].value == 0.0
    assert 'zero_average_forcing' in report


def test_validate_mems(fig2_problem):
    report = models.validate(fig2_problem)
    assert report.passed
    assert report['b_below_omega2'].limit == pytest.approx((2*np.pi/0.8)**2)


def test_validate_mems_large_b():
    prob = make_problem('mems', c=0.5, T=0.8, e=0.0, b=100.0, p=3.0, a=1.0)
    report = models.validate(prob)
    assert not report.passed
    assert [check.name for check in report.failures] == ['g_u_below_omega2', 'b_below_omega2']


def test_validate_condensed_matter(fig3_problem):
    report = models.validate(fig3_problem)
    assert report['p2'].passed
    assert not report['p3'].passed
    assert report['p3'].value == pytest.approx(np.sqrt(3.0)*8.0*np.sqrt(0.5)/0.3, rel=1e-8)
    assert report.to_dict()['passed'] is False


def test_validate_condensed_matter_without_damping():
    prob = make_problem('condensed_matter', c=0.0, T=1.0, e='cos(2*pi*t)', a=1.0)
    assert models.validate(prob)['p3'].value == float('inf')


def test_lower_bound_guard(fig1_problem):
    assert models.lower_bound_guard(fig1_problem, 3.0) == pytest.approx((3.0 + 6.0)**-2, rel=1e-6)
    assert models.lower_bound_guard(fig1_problem, -10.0) is None


def test_lower_bound_guard_other_families(fig3_problem):
    assert models.lower_bound_guard(fig3_problem, 1.0) is None
