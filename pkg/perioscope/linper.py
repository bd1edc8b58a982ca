"""Linear periodic problems.

Two problems are solved for ``L[y] = y'' + c y' + b(t) y``:

* :func:`solve_periodic` finds the T-periodic solution of ``L[y] = f``.
* :func:`solve_zero_average` finds the constant ``mu`` and the T-periodic ``y`` of zero
  average with ``L[y] = mu + f``. This is the linear solver behind every Newton step.

Both work by shooting: a few initial value problems are integrated on one shared grid and the
periodicity (and average) conditions become a small dense linear system. The basis solutions
are integrated together as columns of one matrix-valued state, so they see identical steps.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy import linalg

from perioscope import ivp
from perioscope.errors import ResonanceError, SingularSystemError

if TYPE_CHECKING:
    from typing import Callable, Sequence, Union
    from numpy.typing import ArrayLike, NDArray
    from perioscope.ivp import DenseTrajectory

    #: a coefficient given as a callable of t, a constant, or samples on the half-step grid
    Coefficient = Union[Callable[[NDArray], ArrayLike], float, NDArray]

logger = logging.getLogger(__name__)

#: Systems whose scaled determinant falls below this are treated as singular.
SINGULAR_THRESHOLD = 1e-10


def half_step_grid(period: float, steps: int) -> NDArray:
    """The ``2N + 1`` times ``0, h/2, h, ..., T`` at which RK4 evaluates a right-hand side."""
    return np.linspace(0.0, period, 2*steps + 1)

def _tabulate_coefficient(coeff: Coefficient, period: float, steps: int) -> NDArray:
    times = half_step_grid(period, steps)
    if callable(coeff):
        values = coeff(times)
    else:
        values = coeff
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 0:
        return np.full(times.shape, float(values))
    if values.shape != times.shape:
        raise ValueError(f"coefficient samples must have shape {times.shape}, got {values.shape}")
    return values


class LinearPeriodicProblem:
    """The data of ``y'' + c y' + b(t) y = f(t)`` on one period.

    ``b`` and ``f`` may be callables of ``t`` (evaluated on arrays), constants, or arrays already
    sampled on :func:`half_step_grid`. They are tabulated once on construction.

    Parameters:
        b: coefficient of ``y``.
        c: damping constant.
        f: right-hand side.
        period: the period ``T > 0``.
        steps: number of RK4 steps; rounded up to an even number.
    """

    def __init__(self, b: Coefficient, c: float, f: Coefficient, period: float,
                 steps: int = ivp.DEFAULT_STEPS):
        if not period > 0:
            raise ValueError(f"period must be positive, got {period!r}")
        self.c = float(c)
        self.period = float(period)
        self.steps = ivp.even_steps(steps)
        self.b = _tabulate_coefficient(b, self.period, self.steps)
        self.f = _tabulate_coefficient(f, self.period, self.steps)
        if not (np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.f))):
            raise ValueError("coefficients must be finite on [0, T]")

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}: c={self.c!r}, T={self.period!r}, N={self.steps}>'

    def with_rhs(self, f: Coefficient) -> LinearPeriodicProblem:
        """The same operator with a different right-hand side."""
        return LinearPeriodicProblem(self.b, self.c, f, self.period, self.steps)

    def integrate_basis(self, forcings: Sequence[Coefficient], initial: ArrayLike) -> DenseTrajectory:
        """Integrate ``L[y] = forcing`` for several forcings and initial data at once.

        Returns a trajectory with states of shape ``(2, m)``: row 0 holds ``y``, row 1 holds
        ``y'``, and column ``j`` belongs to ``forcings[j]`` with initial data ``initial[:, j]``.
        """
        h = self.period/self.steps
        loads = np.stack([_tabulate_coefficient(f, self.period, self.steps) for f in forcings], axis=-1)
        b, c = self.b, self.c

        def rhs(t: float, y: NDArray) -> NDArray:
            k = int(round(2.0*t/h))
            return np.stack([y[1], loads[k] - c*y[1] - b[k]*y[0]])

        return ivp.integrate(rhs, initial, self.period, self.steps)


class LinearSolution(NamedTuple):
    """Result of a linear periodic solve."""
    mu: float                #: the constant ``mu`` (always ``0.0`` for :func:`solve_periodic`)
    y: DenseTrajectory       #: states ``(y, y')`` on the shared grid
    residual: float          #: ``|y(T) - y(0)| + |y'(T) - y'(0)|``
    determinant: float       #: scaled determinant of the boundary system


def _scaled_determinant(matrix: NDArray) -> float:
    """``|det| / max(1, s_max)^(n-1)``, with ``s_max`` the largest singular value.

    Close to the smallest singular value when the basis grows exponentially over a period,
    and still ``|det|`` itself when every entry is small, as at an exact resonance.
    """
    largest = float(np.linalg.svd(matrix, compute_uv=False)[0])
    scale = max(1.0, largest)
    return abs(float(linalg.det(matrix)))/scale**(matrix.shape[0] - 1)

def _periodicity_residual(traj: DenseTrajectory) -> float:
    jump = traj.states[-1] - traj.states[0]
    return float(np.sum(np.abs(jump)))


def solve_periodic(prob: LinearPeriodicProblem) -> LinearSolution:
    """Find the T-periodic solution of ``y'' + c y' + b(t) y = f(t)``.

    A particular solution ``Y`` (``Y(0) = 0``, ``Y'(0) = 1``) and the homogeneous solutions
    ``y1`` (``y1(0) = 0``, ``y1'(0) = 1``) and ``y2`` (``y2(0) = 1``, ``y2'(0) = 0``) are
    integrated, then ``c1``, ``c2`` are chosen so that ``y = Y + c1 y1 + c2 y2`` satisfies
    ``y(T) = y(0)`` and ``y'(T) = y'(0)``.

    Raises:
        ResonanceError: if the 2x2 boundary system is singular, i.e. the homogeneous problem
            has a nontrivial periodic solution.
    """
    initial = np.array([[0.0, 0.0, 1.0],
                        [1.0, 1.0, 0.0]])
    basis = prob.integrate_basis([prob.f, 0.0, 0.0], initial)

    jump = basis.states[-1] - basis.states[0]   # (2, 3): rows y, y'; columns Y, y1, y2
    matrix = jump[:, 1:]
    determinant = _scaled_determinant(matrix)
    if determinant < SINGULAR_THRESHOLD:
        raise ResonanceError(determinant)

    c1, c2 = linalg.solve(matrix, -jump[:, 0])
    y = basis.combine([1.0, c1, c2])
    residual = _periodicity_residual(y)
    logger.debug("periodic solve: det=%.3e residual=%.3e", determinant, residual)
    return LinearSolution(0.0, y, residual, determinant)


def solve_zero_average(prob: LinearPeriodicProblem) -> LinearSolution:
    """Find ``mu`` and the T-periodic, zero-average ``y`` with ``y'' + c y' + b(t) y = mu + f(t)``.

    ``Y_f`` and ``Y_1`` solve ``L[y] = f`` and ``L[y] = 1`` from zero initial data, ``y1`` and
    ``y2`` are the homogeneous solutions of :func:`solve_periodic`. Writing
    ``y = Y_f + mu Y_1 + c1 y1 + c2 y2``, the three conditions ``y(T) = y(0)``,
    ``y'(T) = y'(0)`` and ``mean(y) = 0`` form one 3x3 system in ``(c1, c2, mu)``. Unlike the
    two-stage form ``L^-1[f] + mu L^-1[1]`` this stays well posed when ``L`` itself is singular
    on periodic functions (``b = 0``).

    Raises:
        SingularSystemError: if the 3x3 system is singular.
    """
    initial = np.array([[0.0, 0.0, 0.0, 1.0],
                        [0.0, 0.0, 1.0, 0.0]])
    basis = prob.integrate_basis([prob.f, 1.0, 0.0, 0.0], initial)

    jump = basis.states[-1] - basis.states[0]   # (2, 4): columns Y_f, Y_1, y1, y2
    means = np.array([basis.mean((0, j)) for j in range(4)])

    # unknowns ordered (c1, c2, mu)
    matrix = np.array([
        [jump[0, 2], jump[0, 3], jump[0, 1]],
        [jump[1, 2], jump[1, 3], jump[1, 1]],
        [means[2],   means[3],   means[1]],
    ])
    rhs = -np.array([jump[0, 0], jump[1, 0], means[0]])

    determinant = _scaled_determinant(matrix)
    if determinant < SINGULAR_THRESHOLD:
        raise SingularSystemError(abs(float(linalg.det(matrix))))

    c1, c2, mu = linalg.solve(matrix, rhs)
    y = basis.combine([1.0, mu, c1, c2])
    residual = _periodicity_residual(y)
    logger.debug("zero-average solve: mu=%.12g det=%.3e residual=%.3e", mu, determinant, residual)
    return LinearSolution(float(mu), y, residual, determinant)


def solve_zero_average_two_stage(prob: LinearPeriodicProblem) -> LinearSolution:
    """Solve the zero-average problem as ``y = L^-1[f] + mu L^-1[1]``.

    Only valid when ``L`` is nonresonant; kept as an independent cross-check of
    :func:`solve_zero_average`.

    Raises:
        ResonanceError: if ``L`` is resonant.
        SingularSystemError: if ``L^-1[1]`` has zero average.
    """
    forced = solve_periodic(prob)
    unit = solve_periodic(prob.with_rhs(1.0))
    unit_mean = unit.y.mean(0)
    if abs(unit_mean) < SINGULAR_THRESHOLD:
        raise SingularSystemError(abs(unit_mean))

    mu = -forced.y.mean(0)/unit_mean
    y = ivp.DenseTrajectory(
        prob.period,
        forced.y.states + mu*unit.y.states,
        forced.y.derivs + mu*unit.y.derivs,
    )
    return LinearSolution(float(mu), y, _periodicity_residual(y), min(forced.determinant, unit.determinant))


def ode_defect(prob: LinearPeriodicProblem, sol: LinearSolution) -> float:
    """Plug a solution back into its equation.

    Returns the largest ``|y'' + c y' + b y - mu - f|`` over the half-step grid, with ``y''``
    taken from the derivative of the interpolant of ``y'`` (so midpoints are a genuine test,
    not an identity).
    """
    times = half_step_grid(prob.period, prob.steps)
    state = sol.y.sample(times)
    second = sol.y.sample_derivative(times)[:, 1]
    defect = second + prob.c*state[:, 1] + prob.b*state[:, 0] - sol.mu - prob.f
    return float(np.max(np.abs(defect)))


__all__ = [
    'LinearPeriodicProblem',
    'LinearSolution',
    'solve_periodic',
    'solve_zero_average',
    'solve_zero_average_two_stage',
    'ode_defect',
    'half_step_grid',
    'SINGULAR_THRESHOLD',
]
