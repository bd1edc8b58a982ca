import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from .. import ivp
from ..errors import IntegrationBlowupError
from ..ivp import DenseTrajectory


def exponential(t, y):
    return y

def oscillator(t, y):
    return np.array([y[1], -y[0]])

def gaussian(t, y):
    return -2.0*t*y


def test_even_steps():
    assert ivp.even_steps(5) == 6
    assert ivp.even_steps(1) == ivp.MIN_STEPS
    assert ivp.even_steps(2048) == 2048


def test_exponential_growth():
    traj = ivp.integrate(exponential, 1.0, 1.0, 64)
    assert traj.steps == 64
    assert traj.states[-1] == pytest.approx(np.e, abs=1e-7)
    np.testing.assert_allclose(traj.derivs, traj.states)


# (rhs, y0, T, exact y(T))
ORDER_CORPUS = [
    (oscillator, [1.0, 0.0], 2*np.pi, [1.0, 0.0]),
    (gaussian, 1.0, 1.0, np.exp(-1.0)),
    (exponential, 1.0, 2.0, np.exp(2.0)),
]

@pytest.mark.parametrize('rhs, y0, period, exact', ORDER_CORPUS)
def test_fourth_order_convergence(rhs, y0, period, exact):
    coarse = ivp.integrate(rhs, y0, period, 32)
    fine = ivp.integrate(rhs, y0, period, 64)
    error_coarse = np.max(np.abs(coarse.states[-1] - exact))
    error_fine = np.max(np.abs(fine.states[-1] - exact))
    assert 12.0 <= error_coarse/error_fine <= 20.0


def test_dense_output_between_grid_points():
    traj = ivp.integrate(exponential, 1.0, 1.0, 64)
    t = 0.5 + 0.5*traj.step
    assert traj.sample(t) == pytest.approx(np.exp(t), abs=1e-8)
    assert traj.sample_derivative(t) == pytest.approx(np.exp(t), abs=1e-6)


def test_sample_is_exact_on_grid():
    traj = ivp.integrate(oscillator, [1.0, 0.0], 2*np.pi, 16)
    np.testing.assert_array_equal(traj.sample(traj.grid), traj.states)
    np.testing.assert_array_equal(traj.sample(traj.period), traj.states[-1])
    assert traj.sample(0.3).shape == (2,)


def test_sample_error_shrinks_at_fourth_order():
    # y' = 4 y: integration and interpolation errors share a sign and stay above roundoff
    growth = lambda t, y: 4.0*y
    times = np.random.default_rng(7).uniform(0.0, 1.0, 100)
    errors = [np.max(np.abs(ivp.integrate(growth, 1.0, 1.0, steps).sample(times) - np.exp(4.0*times)))
              for steps in (500, 1000)]
    assert 12.0 <= errors[0]/errors[1] <= 20.0


_amplitude = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)

@given(st.integers(min_value=1, max_value=16), _amplitude, _amplitude, _amplitude,
       st.floats(min_value=0.5, max_value=4.0))
@settings(max_examples=100, deadline=None)
def test_mean_exact_for_trig_polynomials(degree, offset, a, b, period):
    # 64 steps: Simpson's rule is exact up to degree 16
    grid = ivp.uniform_grid(period, 64)
    phase = 2*np.pi*degree*grid/period
    omega = 2*np.pi*degree/period
    states = offset + a*np.cos(phase) + b*np.sin(phase)
    derivs = omega*(b*np.cos(phase) - a*np.sin(phase))
    traj = DenseTrajectory(period, states, derivs)
    assert traj.mean() == pytest.approx(offset, abs=1e-13)


@pytest.mark.parametrize('t', [-0.1, 1.1, float('nan')])
def test_sample_outside_period(t):
    traj = ivp.integrate(exponential, 1.0, 1.0, 8)
    with pytest.raises(ValueError):
        traj.sample(t)


def test_blowup_reports_time():
    with pytest.raises(IntegrationBlowupError) as info:
        ivp.integrate(lambda t, y: y*y, 1.0, 2.0, 64)
    assert 0.9 <= info.value.time <= 1.2


def test_trajectory_is_read_only():
    traj = ivp.integrate(exponential, 1.0, 1.0, 8)
    with pytest.raises(ValueError):
        traj.states[0] = 2.0


def test_mean_and_combine():
    grid = ivp.uniform_grid(1.0, 8)
    states = np.stack([np.ones_like(grid), grid], axis=-1)
    derivs = np.stack([np.zeros_like(grid), np.ones_like(grid)], axis=-1)
    traj = DenseTrajectory(1.0, states, derivs)
    assert traj.mean(0) == pytest.approx(1.0)
    assert traj.mean(1) == pytest.approx(0.5)

    combined = traj.combine([2.0, 3.0])
    np.testing.assert_allclose(combined.states, 2.0 + 3.0*grid)
    np.testing.assert_allclose(combined.derivs, np.full_like(grid, 3.0))


def test_trajectory_rejects_odd_steps():
    with pytest.raises(ValueError):
        DenseTrajectory(1.0, np.zeros(4), np.zeros(4))


def test_spectral_derivative():
    period = 2.0
    times = np.arange(64)*(period/64)
    values = np.sin(np.pi*times) + 0.5*np.cos(3*np.pi*times)
    first = ivp.spectral_derivative(values, period)
    second = ivp.spectral_derivative(values, period, 2)
    np.testing.assert_allclose(first, np.pi*np.cos(np.pi*times) - 1.5*np.pi*np.sin(3*np.pi*times), atol=1e-10)
    np.testing.assert_allclose(second, -np.pi**2*np.sin(np.pi*times) - 4.5*np.pi**2*np.cos(3*np.pi*times), atol=1e-9)


def test_tabulate():
    traj = ivp.tabulate(lambda t: np.sin(2*np.pi*t), 1.0, 128)
    np.testing.assert_allclose(traj.states[:, 1], 2*np.pi*np.cos(2*np.pi*traj.grid), atol=1e-9)
    np.testing.assert_allclose(traj.derivs[:, 1], -(2*np.pi)**2*np.sin(2*np.pi*traj.grid), atol=1e-8)
    assert traj.mean(0) == pytest.approx(0.0, abs=1e-14)
