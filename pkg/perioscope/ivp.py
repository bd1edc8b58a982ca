"""Fixed-step integration of first-order systems over one period, with dense output.

:func:`integrate` runs the classical fourth-order Runge-Kutta method with ``N`` equal steps on
``[0, T]`` and returns a :class:`DenseTrajectory`. The trajectory stores the state *and* the
right-hand side at every grid time, so it can be sampled anywhere on ``[0, T]`` by cubic
Hermite interpolation with error of the same order as the integrator.

Because the grid is fixed and uniform, every trajectory computed with the same ``T`` and ``N``
shares the same grid. The linear periodic solver relies on this to combine basis solutions
and to take averages by composite Simpson quadrature.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline

from perioscope.errors import IntegrationBlowupError

if TYPE_CHECKING:
    from typing import Any, Callable, Optional, Union
    from numpy.typing import ArrayLike, NDArray

    VectorField = Callable[[float, NDArray], NDArray]
    Component = Union[int, tuple]

#: Default number of integration steps per period.
DEFAULT_STEPS = 2048

#: Smallest step count accepted by :func:`integrate`.
MIN_STEPS = 4

#: States with a magnitude above this are treated as a blow-up.
BLOWUP_LIMIT = 1e10


def even_steps(steps: int) -> int:
    """Round a step count up to an even number no smaller than :data:`MIN_STEPS`."""
    steps = max(int(steps), MIN_STEPS)
    return steps + (steps % 2)

def uniform_grid(period: float, steps: int) -> NDArray:
    """The ``steps + 1`` grid times ``0, h, 2h, ..., T`` with ``h = T/steps``."""
    return np.linspace(0.0, period, steps + 1)


class DenseTrajectory:
    """A solution sampled on a uniform grid over ``[0, T]``.

    ``states[n]`` is the state at ``grid[n]`` and ``derivs[n]`` the right-hand side there. The
    leading axis of both arrays runs over the grid; the remaining axes are the state shape.

    Parameters:
        period: the length ``T`` of the time interval.
        states: array of shape ``(N + 1, ...)``.
        derivs: array with the same shape as ``states``.

    Raises:
        ValueError: if the shapes disagree or ``N`` is not even.
    """

    __slots__ = ('_period', '_grid', '_states', '_derivs', '_spline')

    def __init__(self, period: float, states: ArrayLike, derivs: ArrayLike):
        states = np.array(states, dtype=np.float64)
        derivs = np.array(derivs, dtype=np.float64)
        if states.shape != derivs.shape:
            raise ValueError(f"states {states.shape} and derivs {derivs.shape} must have the same shape")
        steps = states.shape[0] - 1
        if steps < 2 or steps % 2:
            raise ValueError(f"a trajectory needs an even number of steps, got {steps}")
        if not period > 0:
            raise ValueError(f"period must be positive, got {period!r}")

        states.setflags(write=False)
        derivs.setflags(write=False)
        self._period = float(period)
        self._grid = uniform_grid(self._period, steps)
        self._grid.setflags(write=False)
        self._states = states
        self._derivs = derivs
        self._spline = CubicHermiteSpline(self._grid, states, derivs, axis=0)

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}: T={self._period!r}, N={self.steps}, shape={self.shape}>'

    @property
    def period(self) -> float:
        return self._period

    @property
    def steps(self) -> int:
        """The number of grid intervals ``N``."""
        return self._grid.size - 1

    @property
    def step(self) -> float:
        """The grid spacing ``h = T/N``."""
        return self._period/self.steps

    @property
    def grid(self) -> NDArray:
        return self._grid

    @property
    def states(self) -> NDArray:
        return self._states

    @property
    def derivs(self) -> NDArray:
        return self._derivs

    @property
    def shape(self) -> tuple:
        """The shape of a single state."""
        return self._states.shape[1:]

    @property
    def dim(self) -> int:
        """The number of scalar components in a state."""
        return int(np.prod(self.shape, dtype=int))

    def _check_times(self, t: ArrayLike) -> NDArray:
        times = np.asarray(t, dtype=np.float64)
        slack = 1e-12*self._period
        if np.any(times < -slack) or np.any(times > self._period + slack) or np.any(np.isnan(times)):
            raise ValueError(f"sample time outside [0, {self._period!r}]")
        return np.clip(times, 0.0, self._period)

    def sample(self, t: ArrayLike) -> NDArray:
        """Interpolated state at time(s) ``t`` in ``[0, T]``.

        Exact at grid times.

        Raises:
            ValueError: if any ``t`` lies outside ``[0, T]``.
        """
        times = self._check_times(t)
        flat = np.atleast_1d(times)
        values = np.array(self._spline(flat))

        # the spline evaluates the last interval at its right end, so pin grid times to the stored states
        index = np.clip(np.rint(flat/self.step).astype(int), 0, self.steps)
        on_grid = self._grid[index] == flat
        values[on_grid] = self._states[index[on_grid]]

        if times.ndim == 0:
            return values[0]
        return values

    def sample_derivative(self, t: ArrayLike) -> NDArray:
        """Time derivative of the interpolant at ``t``."""
        return self._spline(self._check_times(t), 1)

    def mean(self, component: Component = 0) -> float:
        """Average of one state component over ``[0, T]`` by composite Simpson quadrature."""
        if self._states.ndim == 1:
            values = self._states
        else:
            values = self._states[(slice(None),) + np.index_exp[component]]
        return float(simpson(values, x=self._grid)/self._period)

    def combine(self, weights: ArrayLike) -> DenseTrajectory:
        """Form a linear combination of trajectories stacked along the last state axis.

        For states of shape ``(..., m)`` and ``m`` weights, the result has states
        ``states @ weights`` and derivatives ``derivs @ weights``.
        """
        weights = np.asarray(weights, dtype=np.float64)
        states = self._states @ weights
        derivs = self._derivs @ weights
        return DenseTrajectory(self._period, states, derivs)


def integrate(rhs: VectorField, y0: ArrayLike, period: float, steps: int = DEFAULT_STEPS, *,
              blowup_limit: float = BLOWUP_LIMIT) -> DenseTrajectory:
    """Integrate ``y' = rhs(t, y)`` from ``y(0) = y0`` over ``[0, period]``.

    Classical RK4 with fixed step ``h = period/N``. ``steps`` is rounded up to an even number
    of at least 4; the actual value is available as :attr:`DenseTrajectory.steps`.

    ``y0`` may be a scalar, a vector or any array; ``rhs`` must return an array of the same
    shape.

    Raises:
        IntegrationBlowupError: if a state stops being finite or exceeds ``blowup_limit`` in
            magnitude. The error carries the time at the end of the failing step.
    """
    steps = even_steps(steps)
    times = uniform_grid(period, steps)
    h = period/steps

    y = np.array(y0, dtype=np.float64)
    states = np.empty((steps + 1,) + y.shape)
    derivs = np.empty_like(states)
    states[0] = y

    with np.errstate(all='ignore'):
        for n in range(steps):
            t = times[n]
            k1 = np.asarray(rhs(t, y))
            k2 = np.asarray(rhs(t + 0.5*h, y + 0.5*h*k1))
            k3 = np.asarray(rhs(t + 0.5*h, y + 0.5*h*k2))
            k4 = np.asarray(rhs(times[n + 1], y + h*k3))
            derivs[n] = k1
            y = y + (h/6.0)*(k1 + 2.0*k2 + 2.0*k3 + k4)
            if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > blowup_limit:
                raise IntegrationBlowupError(float(times[n + 1]))
            states[n + 1] = y
        derivs[steps] = rhs(times[steps], y)

    if not np.all(np.isfinite(derivs)):
        raise IntegrationBlowupError(float(period), "right-hand side is not finite on the trajectory")
    return DenseTrajectory(period, states, derivs)


def spectral_derivative(values: ArrayLike, period: float, order: int = 1) -> NDArray:
    """Differentiate periodic samples taken at ``n`` equispaced points of ``[0, T)``.

    The Nyquist mode is dropped for odd orders so the result stays real.
    """
    values = np.asarray(values, dtype=np.float64)
    count = values.shape[0]
    wavenumbers = 2.0*np.pi*np.fft.rfftfreq(count, d=period/count)
    factor = (1j*wavenumbers)**order
    if order % 2 and count % 2 == 0:
        factor[-1] = 0.0
    return np.fft.irfft(factor*np.fft.rfft(values), n=count)

def tabulate(func: Callable[[NDArray], Any], period: float, steps: int = DEFAULT_STEPS,
             dfunc: Optional[Callable[[NDArray], Any]] = None,
             ddfunc: Optional[Callable[[NDArray], Any]] = None) -> DenseTrajectory:
    """Build a trajectory ``(f, f')`` from a T-periodic function given in closed form.

    The result has the same layout as the solution of a second-order equation written as a
    first-order system: state ``(f, f')`` with derivative ``(f', f'')``. Derivatives that are
    not supplied are computed spectrally from the samples, which is exact for trigonometric
    polynomials resolved by the grid.
    """
    steps = even_steps(steps)
    grid = uniform_grid(period, steps)
    values = np.broadcast_to(np.asarray(func(grid), dtype=np.float64), grid.shape)

    def periodic_extend(inner):
        return np.append(inner, inner[0])

    if dfunc is not None:
        first = np.broadcast_to(np.asarray(dfunc(grid), dtype=np.float64), grid.shape)
    else:
        first = periodic_extend(spectral_derivative(values[:-1], period, 1))
    if ddfunc is not None:
        second = np.broadcast_to(np.asarray(ddfunc(grid), dtype=np.float64), grid.shape)
    else:
        second = periodic_extend(spectral_derivative(values[:-1], period, 2))

    states = np.stack([values, first], axis=-1)
    derivs = np.stack([first, second], axis=-1)
    return DenseTrajectory(period, states, derivs)


## Functional interface

def sample(traj: DenseTrajectory, t: ArrayLike) -> NDArray:
    """Interpolated state of ``traj`` at ``t``; see :meth:`DenseTrajectory.sample`."""
    return traj.sample(t)

def mean(traj: DenseTrajectory, component: Component = 0) -> float:
    """Average of a state component; see :meth:`DenseTrajectory.mean`."""
    return traj.mean(component)


__all__ = [
    'DenseTrajectory',
    'integrate',
    'sample',
    'mean',
    'tabulate',
    'spectral_derivative',
    'even_steps',
    'uniform_grid',
    'DEFAULT_STEPS',
    'BLOWUP_LIMIT',
]
