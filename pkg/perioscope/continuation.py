"""Newton correction and continuation of periodic solutions in their average ``xi``.

Write a solution as ``u = xi + U`` with ``U`` of zero average. For fixed ``xi`` the pair
``(mu, U)`` solves ``U'' + c U' + g(t, xi + U) = mu + e(t)``. Linearizing ``g`` around the
previous iterate turns each Newton step into one call of
:func:`perioscope.linper.solve_zero_average` with ``b = g_u(t, xi + U_prev)`` and
``f = e - g(t, xi + U_prev) + g_u(t, xi + U_prev) U_prev``.

A curve is traced by stepping ``xi`` and warm-starting each Newton solve from a secant
extrapolation of the previous two ``U``; because ``xi`` is a global parameter there are no folds
to go around.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from perioscope import ivp, linper
from perioscope.errors import ConfigError, ConvergenceError, NumericalError, PositivityError

if TYPE_CHECKING:
    from typing import Any, Dict, Iterator, List, Optional, Tuple
    from numpy.typing import NDArray
    from perioscope.ivp import DenseTrajectory
    from perioscope.models import ProblemDef

logger = logging.getLogger(__name__)

INIT_MODES = ('cold', 'homotopy')
PREDICTORS = ('secant', 'previous')


@dataclass(frozen=True)
class ContinuationConfig:
    """Settings for Newton correction and curve tracing.

    Raises:
        ConfigError: if a setting is out of range.
    """

    delta_xi: float = 0.1           #: step in xi
    newton_iters: int = 2           #: Newton iterations per continuation step
    newton_tol: float = 1e-9        #: residual at which Newton stops early
    accept_tol: float = 1e-3        #: largest residual accepted after the last iteration
    grid_N: int = ivp.DEFAULT_STEPS #: integration steps per period
    positivity_floor: float = 1e-4  #: smallest admissible value of u on the grid
    init_mode: str = 'cold'         #: 'cold' or 'homotopy'
    homotopy_steps: int = 10        #: number of k-steps in homotopy mode
    cold_iters: int = 25            #: Newton budget when no warm start is available
    mu_cap: float = 1e4             #: tracing stops once |mu| exceeds this
    max_halvings: int = 6           #: step halvings allowed before a trace gives up
    predictor: str = 'secant'       #: how a step guesses U: 'secant' or 'previous'

    def __post_init__(self):
        if not self.delta_xi > 0:
            raise ConfigError(f"must be positive, got {self.delta_xi!r}", 'delta_xi')
        for name in ('newton_iters', 'homotopy_steps', 'cold_iters'):
            if getattr(self, name) < 1:
                raise ConfigError(f"must be at least 1, got {getattr(self, name)!r}", name)
        if self.max_halvings < 0:
            raise ConfigError(f"must not be negative, got {self.max_halvings!r}", 'max_halvings')
        if not 0 < self.newton_tol <= self.accept_tol:
            raise ConfigError("need 0 < newton_tol <= accept_tol", 'newton_tol')
        if self.grid_N < ivp.MIN_STEPS:
            raise ConfigError(f"must be at least {ivp.MIN_STEPS}, got {self.grid_N!r}", 'grid_N')
        if not self.positivity_floor > 0:
            raise ConfigError(f"must be positive, got {self.positivity_floor!r}", 'positivity_floor')
        if not self.mu_cap > 0:
            raise ConfigError(f"must be positive, got {self.mu_cap!r}", 'mu_cap')
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"expected one of {', '.join(INIT_MODES)}, got {self.init_mode!r}", 'init_mode')
        if self.predictor not in PREDICTORS:
            raise ConfigError(f"expected one of {', '.join(PREDICTORS)}, got {self.predictor!r}", 'predictor')

    @property
    def steps(self) -> int:
        """``grid_N`` rounded up to the even step count actually used."""
        return ivp.even_steps(self.grid_N)

    def replace(self, **changes: Any) -> ContinuationConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class PeriodicSolution:
    """A periodic solution ``u = xi + U`` at forcing offset ``mu``.

    ``U`` is a trajectory with states ``(U, U')`` on the solver grid.
    """

    xi: float
    mu: float
    U: DenseTrajectory
    residual: float             #: sup-norm defect of the periodic problem at this solution
    newton_iters_used: int
    last_update: float = 0.0    #: sup-norm of the last Newton update of U
    k: float = 1.0              #: homotopy parameter the solution belongs to

    @property
    def u0(self) -> float:
        """``u(0)``."""
        return float(self.xi + self.U.states[0, 0])

    @property
    def du0(self) -> float:
        """``u'(0)``."""
        return float(self.U.states[0, 1])

    @property
    def period(self) -> float:
        return self.U.period

    def u(self, t: Any = None) -> NDArray:
        """Values of ``u`` at ``t`` (on the solver grid if ``t`` is omitted)."""
        if t is None:
            return self.xi + self.U.states[:, 0]
        return self.xi + self.U.sample(t)[..., 0]

    @property
    def min_u(self) -> float:
        return float(np.min(self.u()))

    @property
    def max_u(self) -> float:
        return float(np.max(self.u()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'xi': self.xi,
            'mu': self.mu,
            'u0': self.u0,
            'du0': self.du0,
            'min_u': self.min_u,
            'max_u': self.max_u,
            'residual': self.residual,
            'newton_iters_used': self.newton_iters_used,
        }


def _check_positive(times: NDArray, u: NDArray, floor: float) -> None:
    index = int(np.argmin(u))
    if not u[index] > floor:
        raise PositivityError(float(times[index]), float(u[index]))

def newton_correct(prob: ProblemDef, xi: float, U_init: Optional[DenseTrajectory], cfg: ContinuationConfig, *,
                   k: float = 1.0, max_iters: Optional[int] = None) -> PeriodicSolution:
    """Solve for ``(mu, U)`` at fixed average ``xi`` by Newton's method.

    Parameters:
        prob: the problem.
        xi: the prescribed average of ``u``.
        U_init: initial guess for the zero-average part (``None`` means ``U = 0``). Any
            trajectory with states ``(U, U')`` works; it is resampled onto the solver grid.
        cfg: continuation settings (``newton_iters``, ``newton_tol``, ``accept_tol``,
            ``grid_N``, ``positivity_floor``).
        k: homotopy parameter, the nonlinearity is scaled to ``k g``.
        max_iters: overrides ``cfg.newton_iters``.

    Iteration stops when the residual drops to ``newton_tol`` or the budget is used up. The
    residual is the sup-norm defect of the nonlinear equation at the new iterate, i.e. the
    linearization remainder ``k |g(u_new) - g(u_old) - g_u(u_old)(u_new - u_old)|`` on the
    half-step grid plus the periodicity defect of the linear solve.

    Raises:
        PositivityError: if ``xi + U`` drops to ``positivity_floor`` or below.
        SingularSystemError: if a linearized problem is singular.
        ConvergenceError: if the residual is still above ``accept_tol`` at the end.
    """
    steps = cfg.steps
    period = prob.period
    times = linper.half_step_grid(period, steps)
    forcing = np.asarray(prob.e(times), dtype=np.float64)
    budget = max_iters or cfg.newton_iters

    if U_init is None:
        U_prev = np.zeros_like(times)
    else:
        U_prev = np.asarray(U_init.sample(times))[:, 0]
    _check_positive(times, xi + U_prev, cfg.positivity_floor)

    residual = update = float('inf')
    solution = None
    iteration = 0
    for iteration in range(1, budget + 1):
        u_prev = xi + U_prev
        g_prev = k*prob.g(times, u_prev)
        slope = k*prob.g_u(times, u_prev)
        lin = linper.LinearPeriodicProblem(slope, prob.c, forcing - g_prev + slope*U_prev, period, steps)
        solution = linper.solve_zero_average(lin)

        U_next = np.asarray(solution.y.sample(times))[:, 0]
        _check_positive(times, xi + U_next, cfg.positivity_floor)

        remainder = k*prob.g(times, xi + U_next) - g_prev - slope*(U_next - U_prev)
        residual = float(np.max(np.abs(remainder))) + solution.residual
        update = float(np.max(np.abs(U_next - U_prev)))
        U_prev = U_next
        logger.debug("newton xi=%.6g k=%.3g iter=%d mu=%.15g residual=%.3e update=%.3e",
                     xi, k, iteration, solution.mu, residual, update)
        if residual <= cfg.newton_tol:
            break

    if not residual <= cfg.accept_tol:
        raise ConvergenceError(residual, iteration)
    return PeriodicSolution(float(xi), solution.mu, solution.y, residual, iteration, update, k)

def converge(prob: ProblemDef, xi: float, U_init: Optional[DenseTrajectory], cfg: ContinuationConfig, *,
             k: float = 1.0, max_iters: Optional[int] = None) -> PeriodicSolution:
    """:func:`newton_correct`, continued up to ``cfg.cold_iters`` more iterations if needed.

    The returned solution always meets ``newton_tol``; ``newton_iters_used`` counts the
    iterations of both rounds.

    Raises:
        ConvergenceError: if the residual is still above ``newton_tol`` after the second round.
    """
    solution = newton_correct(prob, xi, U_init, cfg, k=k, max_iters=max_iters)
    if solution.residual <= cfg.newton_tol:
        return solution

    logger.debug("xi=%.6g not converged after %d iterations (residual %.3e), continuing",
                 xi, solution.newton_iters_used, solution.residual)
    polished = newton_correct(prob, xi, solution.U, cfg, k=k, max_iters=cfg.cold_iters)
    used = solution.newton_iters_used + polished.newton_iters_used
    if not polished.residual <= cfg.newton_tol:
        raise ConvergenceError(polished.residual, used)
    return dataclasses.replace(polished, newton_iters_used=used)


def homotopy_path(prob: ProblemDef, xi0: float, cfg: ContinuationConfig) -> Iterator[PeriodicSolution]:
    """Continue the solution of average ``xi0`` from ``k = 0`` to ``k = 1``.

    At ``k = 0`` the problem is linear, ``U'' + c U' = mu + e``, whose zero-average periodic
    solution has ``mu = 0``. Each following ``k = j/K`` starts Newton from the previous ``U``.
    Yields the solution at every ``k`` including both ends.
    """
    solution = newton_correct(prob, xi0, None, cfg, k=0.0, max_iters=1)
    yield solution
    for j in range(1, cfg.homotopy_steps + 1):
        k = j/cfg.homotopy_steps
        solution = newton_correct(prob, xi0, solution.U, cfg, k=k, max_iters=cfg.cold_iters)
        yield solution

def init_solution(prob: ProblemDef, xi0: float, cfg: ContinuationConfig) -> PeriodicSolution:
    """First point of a curve, by cold start or by homotopy in ``k`` (``cfg.init_mode``).

    A cold start runs Newton from ``U = 0`` with the enlarged budget ``cfg.cold_iters``. Either
    way the result meets ``newton_tol``.

    Raises:
        NumericalError: as :func:`converge`.
    """
    if cfg.init_mode == 'homotopy':
        for solution in homotopy_path(prob, xi0, cfg):
            pass
        if solution.residual > cfg.newton_tol:
            solution = converge(prob, xi0, solution.U, cfg, max_iters=cfg.cold_iters)
        logger.info("homotopy start at xi=%.6g: mu=%.12g (%d k-steps)", xi0, solution.mu, cfg.homotopy_steps)
        return solution
    solution = converge(prob, xi0, None, cfg, max_iters=cfg.cold_iters)
    logger.info("cold start at xi=%.6g: mu=%.12g (%d iterations)", xi0, solution.mu, solution.newton_iters_used)
    return solution


## Solution Curves

class TraceStop(NamedTuple):
    """Why a trace in one direction ended."""
    direction: str   #: 'up' or 'down'
    reason: str      #: 'completed', 'step-limit' or 'mu-cap'
    xi: float        #: the last accepted xi
    detail: str = ''
    steps: int = 0       #: accepted continuation steps
    warm_hits: int = 0   #: steps that met newton_tol within newton_iters


class SolutionCurve(Sequence):
    """An ordered sequence of periodic solutions with strictly monotone ``xi``.

    Supports indexing, slicing and iteration over :class:`PeriodicSolution` objects. The
    :attr:`xi` and :attr:`mu` properties give the curve as arrays.

    Raises:
        ValueError: if the ``xi`` values are not strictly monotone.
    """

    def __init__(self, points: Sequence[PeriodicSolution], problem: ProblemDef, config: ContinuationConfig,
                 stops: Tuple[TraceStop, ...] = ()):
        self._points = tuple(points)
        self.problem = problem
        self.config = config
        self.stops = tuple(stops)

        xi = self.xi
        if xi.size > 1:
            diffs = np.diff(xi)
            if not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValueError("curve points must have strictly monotone xi")

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}: {len(self)} points, stop={self.stop_reason!r}>'

    def __len__(self) -> int:
        return len(self._points)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return SolutionCurve(self._points[index], self.problem, self.config, self.stops)
        return self._points[index]

    @property
    def points(self) -> Tuple[PeriodicSolution, ...]:
        return self._points

    @property
    def xi(self) -> NDArray:
        return np.array([point.xi for point in self._points], dtype=np.float64)

    @property
    def mu(self) -> NDArray:
        return np.array([point.mu for point in self._points], dtype=np.float64)

    @property
    def stop_reason(self) -> str:
        """'completed' if every direction ran to its end, else the first other reason."""
        for stop in self.stops:
            if stop.reason != 'completed':
                return stop.reason
        return 'completed'

    @property
    def warm_start_rate(self) -> Optional[float]:
        """Fraction of accepted steps that converged within newton_iters, or None."""
        steps = sum(stop.steps for stop in self.stops)
        if not steps:
            return None
        return sum(stop.warm_hits for stop in self.stops)/steps

    def ascending(self) -> SolutionCurve:
        """The same curve ordered by increasing ``xi``."""
        if len(self) > 1 and self._points[0].xi > self._points[-1].xi:
            return SolutionCurve(self._points[::-1], self.problem, self.config, self.stops)
        return self


def _predict(previous: Optional[PeriodicSolution], current: PeriodicSolution, xi: float,
             cfg: ContinuationConfig) -> DenseTrajectory:
    # Secant extrapolation of U; falls back to the current U near the positivity floor.
    if cfg.predictor == 'previous' or previous is None:
        return current.U
    ratio = (xi - current.xi)/(current.xi - previous.xi)
    states = current.U.states + ratio*(current.U.states - previous.U.states)
    if not np.min(xi + states[:, 0]) > cfg.positivity_floor:
        return current.U
    derivs = current.U.derivs + ratio*(current.U.derivs - previous.U.derivs)
    return ivp.DenseTrajectory(current.period, states, derivs)


def trace_curve(prob: ProblemDef, xi_start: float, xi_end: float, cfg: ContinuationConfig, *,
                initial: Optional[PeriodicSolution] = None) -> SolutionCurve:
    """Trace the curve ``mu(xi)`` from ``xi_start`` toward ``xi_end``.

    Each step moves ``xi`` by ``delta_xi`` (the last step may be shorter) and starts Newton
    from a secant extrapolation of the last two ``U`` (``cfg.predictor``). A step that does
    not reach ``newton_tol`` within ``newton_iters`` iterations gets up to ``cold_iters`` more.
    When a step still fails (loss of positivity, no convergence, ...), the step is halved and
    retried; after ``max_halvings`` halvings the trace stops and the partial curve is returned.
    A reduced step is kept for the rest of the trace. The trace also stops once ``|mu|``
    exceeds ``mu_cap``. Every stored point meets ``newton_tol``.

    Parameters:
        initial: a solution at ``xi_start`` to begin from; computed by :func:`init_solution`
            when omitted.

    Raises:
        NumericalError: only if the initial solution cannot be computed.
    """
    current = initial if initial is not None else init_solution(prob, xi_start, cfg)
    previous = None
    points: List[PeriodicSolution] = [current]
    direction = 1.0 if xi_end >= xi_start else -1.0
    label = 'up' if direction > 0 else 'down'
    step = cfg.delta_xi
    halvings = warm_hits = 0
    end_slack = 1e-12*max(1.0, abs(xi_end))

    logger.info("tracing %s from xi=%.6g to xi=%.6g", label, xi_start, xi_end)
    while direction*(xi_end - current.xi) > end_slack:
        remaining = abs(xi_end - current.xi)
        if remaining - step <= end_slack:
            xi = xi_end
        else:
            xi = current.xi + direction*step
        try:
            solution = converge(prob, xi, _predict(previous, current, xi, cfg), cfg)
        except NumericalError as err:
            if halvings >= cfg.max_halvings:
                reason, detail = 'step-limit', str(err)
                break
            halvings += 1
            step /= 2.0
            logger.warning("step to xi=%.6g failed (%s); halving step to %.3g", xi, err, step)
            continue

        if solution.newton_iters_used <= cfg.newton_iters:
            warm_hits += 1
        points.append(solution)
        previous, current = current, solution
        if abs(solution.mu) > cfg.mu_cap:
            reason, detail = 'mu-cap', f"|mu| = {abs(solution.mu):.3g}"
            break
    else:
        reason, detail = 'completed', ''

    stop = TraceStop(label, reason, current.xi, detail, len(points) - 1, warm_hits)
    logger.info("trace %s stopped at xi=%.6g: %s %s (%d/%d steps warm)",
                label, stop.xi, stop.reason, stop.detail, stop.warm_hits, stop.steps)
    return SolutionCurve(points, prob, cfg, (stop,))


def trace_both(prob: ProblemDef, xi0: float, xi_lo: float, xi_hi: float, cfg: ContinuationConfig) -> SolutionCurve:
    """Trace upward from ``xi0`` to ``xi_hi``, then downward from ``xi0`` to ``xi_lo``.

    Both traces share the initial solution at ``xi0``. The result is ordered by increasing
    ``xi`` and records both stop reasons.
    """
    if not xi_lo <= xi0 <= xi_hi:
        raise ValueError(f"need xi_lo <= xi0 <= xi_hi, got {xi_lo!r}, {xi0!r}, {xi_hi!r}")
    initial = init_solution(prob, xi0, cfg)
    upward = trace_curve(prob, xi0, xi_hi, cfg, initial=initial)
    downward = trace_curve(prob, xi0, xi_lo, cfg, initial=initial)
    points = list(reversed(downward.points[1:])) + list(upward.points)
    return SolutionCurve(points, prob, cfg, upward.stops + downward.stops)


__all__ = [
    'ContinuationConfig',
    'PeriodicSolution',
    'SolutionCurve',
    'TraceStop',
    'newton_correct',
    'converge',
    'homotopy_path',
    'init_solution',
    'trace_curve',
    'trace_both',
    'INIT_MODES',
    'PREDICTORS',
]
