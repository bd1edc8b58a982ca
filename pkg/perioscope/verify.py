"""Independent checks on computed solutions and curves.

* :func:`verify_ivp` re-integrates the full nonlinear equation from ``(u(0), u'(0))`` at the
  computed ``mu`` on a finer, unrelated grid and checks periodicity and the average.
* :func:`wirtinger_check` measures the Wirtinger ratio of a zero-average periodic function.
* :func:`shape_report` classifies the discrete curve ``mu(xi)``.
* :func:`solve_at_mu` finds every solution on a curve with a prescribed ``mu``.
* :func:`bound_checks` compares a solution against the a priori bounds of the theory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, asdict
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from perioscope import ivp, linper, models
from perioscope.continuation import SolutionCurve, newton_correct
from perioscope.errors import NumericalError
from perioscope.models import CondensedMatter, LazerSolimini

if TYPE_CHECKING:
    from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union
    from numpy.typing import ArrayLike, NDArray
    from perioscope.continuation import PeriodicSolution
    from perioscope.ivp import DenseTrajectory
    from perioscope.models import ProblemDef

logger = logging.getLogger(__name__)

#: Default tolerance of the re-integration check.
VERIFY_TOL = 1e-5

#: Grid refinement of the re-integration relative to the solver grid.
VERIFY_REFINEMENT = 3

#: |delta mu| at or below this counts as flat when classifying curves.
PLATEAU_TOL = 1e-9

MONOTONE_DECREASING = 'monotone-decreasing'
SINGLE_INTERIOR_MINIMUM = 'single-interior-minimum'
OTHER = 'other'


## Re-integration

class VerificationResult(NamedTuple):
    """Outcome of re-integrating a solution as an initial value problem."""
    passed: bool
    u_jump: float      #: ``|u(T) - u(0)|``
    du_jump: float     #: ``|u'(T) - u'(0)|``
    mean_defect: float #: ``|mean(u) - xi|``
    tol: float
    message: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return self._asdict()


def _reintegrate(prob: ProblemDef, mu: NDArray, u0: NDArray, du0: NDArray, steps: int) -> DenseTrajectory:
    # States have shape (2, n): one column per set of initial data.
    h = prob.period/steps
    times = linper.half_step_grid(prob.period, steps)
    forcing = np.asarray(prob.e(times), dtype=np.float64)
    c = prob.c

    def rhs(t: float, y: NDArray) -> NDArray:
        k = int(round(2.0*t/h))
        return np.stack([y[1], mu + forcing[k] - c*y[1] - prob.g(t, y[0])])

    return ivp.integrate(rhs, np.stack([u0, du0]), prob.period, steps)

def verify_initial_data_batch(prob: ProblemDef, xi: ArrayLike, mu: ArrayLike, u0: ArrayLike, du0: ArrayLike, *,
                              steps: int = VERIFY_REFINEMENT*ivp.DEFAULT_STEPS,
                              tol: float = VERIFY_TOL) -> List[VerificationResult]:
    """:func:`verify_initial_data` for many sets of initial data at once.

    All sets are integrated together as one vector system. If that fails (a blow-up or a visit
    to ``u <= 0`` by any of them), each set is integrated on its own so the failure is charged
    to the right one.
    """
    xi, mu, u0, du0 = (np.asarray(values, dtype=np.float64).ravel() for values in (xi, mu, u0, du0))
    if not xi.size:
        return []
    steps = ivp.even_steps(steps)
    try:
        traj = _reintegrate(prob, mu, u0, du0, steps)
    except NumericalError as err:
        if xi.size == 1:
            inf = float('inf')
            return [VerificationResult(False, inf, inf, inf, tol, str(err))]
        logger.debug("batch re-integration failed (%s), checking %d points one by one", err, xi.size)
        return [result
                for args in zip(xi, mu, u0, du0)
                for result in verify_initial_data_batch(prob, *args, steps=steps, tol=tol)]

    u_jump, du_jump = np.abs(traj.states[-1] - traj.states[0])
    means = simpson(traj.states[:, 0], x=traj.grid, axis=0)/prob.period
    mean_defect = np.abs(means - xi)
    return [VerificationResult(bool(max(row) <= tol), *(float(value) for value in row), tol)
            for row in zip(u_jump, du_jump, mean_defect)]

def verify_initial_data(prob: ProblemDef, xi: float, mu: float, u0: float, du0: float, *,
                        steps: int = VERIFY_REFINEMENT*ivp.DEFAULT_STEPS,
                        tol: float = VERIFY_TOL) -> VerificationResult:
    """Integrate ``u'' + c u' + g(t, u) = mu + e(t)`` from ``u(0) = u0``, ``u'(0) = du0``.

    Passes iff ``|u(T) - u(0)|``, ``|u'(T) - u'(0)|`` and ``|mean(u) - xi|`` are all at most
    ``tol``. A blow-up or a visit to ``u <= 0`` fails the check instead of raising.
    """
    return verify_initial_data_batch(prob, xi, mu, u0, du0, steps=steps, tol=tol)[0]

def verify_ivp(prob: ProblemDef, sol: PeriodicSolution, tol: float = VERIFY_TOL,
               steps: Optional[int] = None) -> VerificationResult:
    """Re-check a computed solution by integrating from its ``u(0)``, ``u'(0)``.

    The default grid has :data:`VERIFY_REFINEMENT` times as many steps as the solver grid, so
    agreement does not come from sharing the discretization error.
    """
    if steps is None:
        steps = VERIFY_REFINEMENT*sol.U.steps
    return verify_initial_data(prob, sol.xi, sol.mu, sol.u0, sol.du0, steps=steps, tol=tol)

def verify_curve(curve: SolutionCurve, tol: float = VERIFY_TOL,
                 steps: Optional[int] = None) -> List[VerificationResult]:
    """:func:`verify_ivp` for every point of a curve, integrated as one batch."""
    if not len(curve):
        return []
    if steps is None:
        steps = VERIFY_REFINEMENT*curve[0].U.steps
    columns = zip(*((point.xi, point.mu, point.u0, point.du0) for point in curve))
    return verify_initial_data_batch(curve.problem, *columns, steps=steps, tol=tol)


## Wirtinger's inequality

def wirtinger_check(f: Union[Callable[[NDArray], ArrayLike], DenseTrajectory], period: Optional[float] = None,
                    samples: int = 1024) -> Optional[float]:
    """The ratio ``integral(f'^2) / (omega^2 integral(f^2))`` for a zero-average T-periodic ``f``.

    Wirtinger's inequality says the ratio is at least 1, with equality exactly for first
    harmonics. ``f`` is either a callable (sampled at ``samples`` points and differentiated
    spectrally) or a trajectory with states ``(f, f')``, whose period is used.

    Returns:
        The ratio, or ``None`` if ``f`` vanishes identically.

    Raises:
        ValueError: if ``f`` does not have zero average.
    """
    if isinstance(f, ivp.DenseTrajectory):
        period = f.period
        values = f.states[:-1, 0]
        slopes = f.states[:-1, 1]
    else:
        if period is None:
            raise ValueError("a period is required when f is a callable")
        times = np.arange(samples)*(period/samples)
        values = np.broadcast_to(np.asarray(f(times), dtype=np.float64), times.shape)
        slopes = ivp.spectral_derivative(values, period)

    # on a uniform periodic grid the plain average is the trapezoidal rule
    scale = max(1.0, float(np.max(np.abs(values))))
    if abs(np.mean(values)) > 1e-8*scale:
        raise ValueError(f"f must have zero average, mean is {np.mean(values):.3e}")
    energy = float(np.mean(values**2))
    if energy == 0.0:
        return None
    omega = 2.0*np.pi/period
    return float(np.mean(slopes**2)/(omega**2*energy))


## Curve Shape

@dataclass(frozen=True)
class ShapeReport:
    """Qualitative shape of a discrete curve ``mu(xi)`` (ordered by increasing ``xi``)."""

    classification: str                     #: 'monotone-decreasing', 'single-interior-minimum' or 'other'
    xi_min: float                           #: location of the discrete minimum of mu
    mu_min: float
    second_diff_at_min: Optional[float]     #: central second difference there, if the minimum is interior
    monotone_violations: int
    endpoint_trends: Tuple[str, str]        #: trend of mu at the left and right end
    zero_crossings: Tuple[float, ...]       #: xi where mu changes sign
    xi_range: Tuple[float, float]
    mu_ends: Tuple[float, float]            #: mu at the left and right end
    points: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _trend(sign: float) -> str:
    if sign > 0:
        return 'increasing'
    if sign < 0:
        return 'decreasing'
    return 'flat'

def shape_report_from_data(xi: ArrayLike, mu: ArrayLike, plateau: float = PLATEAU_TOL) -> ShapeReport:
    """Classify the curve through the points ``(xi[i], mu[i])``.

    Differences of ``mu`` within ``plateau`` count as neither increase nor decrease. A curve
    with no increases is monotone-decreasing; a curve that decreases to an interior minimum and
    increases after it, with no violations, has a single interior minimum.

    Raises:
        ValueError: if there are fewer than 5 points.
    """
    xi = np.asarray(xi, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if xi.size < 5:
        raise ValueError(f"shape analysis needs at least 5 points, got {xi.size}")
    order = np.argsort(xi)
    xi, mu = xi[order], mu[order]

    diffs = np.diff(mu)
    signs = np.where(np.abs(diffs) <= plateau, 0.0, np.sign(diffs))
    imin = int(np.argmin(mu))

    if not np.any(signs > 0) and np.any(signs < 0):
        classification = MONOTONE_DECREASING
        violations = 0
    else:
        violations = int(np.count_nonzero(signs[:imin] > 0) + np.count_nonzero(signs[imin:] < 0))
        interior = 0 < imin < xi.size - 1
        if interior and violations == 0 and np.any(signs[:imin] < 0) and np.any(signs[imin:] > 0):
            classification = SINGLE_INTERIOR_MINIMUM
        else:
            classification = OTHER

    second_diff = None
    if 0 < imin < xi.size - 1:
        h1 = xi[imin] - xi[imin - 1]
        h2 = xi[imin + 1] - xi[imin]
        second_diff = float(2.0*(mu[imin - 1]/(h1*(h1 + h2)) - mu[imin]/(h1*h2) + mu[imin + 1]/(h2*(h1 + h2))))

    crossings = []
    for i in range(xi.size):
        if mu[i] == 0.0:
            crossings.append(float(xi[i]))
        elif i + 1 < xi.size and mu[i]*mu[i + 1] < 0.0:
            crossings.append(float(xi[i] - mu[i]*(xi[i + 1] - xi[i])/(mu[i + 1] - mu[i])))

    return ShapeReport(
        classification = classification,
        xi_min = float(xi[imin]),
        mu_min = float(mu[imin]),
        second_diff_at_min = second_diff,
        monotone_violations = violations,
        endpoint_trends = (_trend(signs[0]), _trend(signs[-1])),
        zero_crossings = tuple(crossings),
        xi_range = (float(xi[0]), float(xi[-1])),
        mu_ends = (float(mu[0]), float(mu[-1])),
        points = int(xi.size),
    )

def shape_report(curve: SolutionCurve, plateau: float = PLATEAU_TOL) -> ShapeReport:
    """Classify a traced curve, see :func:`shape_report_from_data`."""
    return shape_report_from_data(curve.xi, curve.mu, plateau)


def convexity_at_minimum(curve: SolutionCurve) -> Optional[float]:
    """Smallest ``g_uu(t, u(t))`` over the grid at the curve's discrete interior minimum.

    A positive value means ``g`` is convex along the minimizing solution, the property that
    makes the minimum of ``mu(xi)`` nondegenerate. ``None`` if the minimum is at an end.
    """
    curve = curve.ascending()
    mu = curve.mu
    imin = int(np.argmin(mu))
    if not 0 < imin < len(curve) - 1:
        return None
    point = curve[imin]
    return float(np.min(curve.problem.g_uu(point.U.grid, point.u())))


## Solutions at a Prescribed mu

def _refine_crossing(curve: SolutionCurve, left: PeriodicSolution, right: PeriodicSolution,
                     mu_star: float, tol: float) -> PeriodicSolution:
    prob, cfg = curve.problem, curve.config
    trials: Dict[float, PeriodicSolution] = {}

    def offset(xi: float) -> float:
        start = left if abs(xi - left.xi) <= abs(xi - right.xi) else right
        solution = newton_correct(prob, xi, start.U, cfg, max_iters=cfg.cold_iters)
        trials[xi] = solution
        return solution.mu - mu_star

    root = brentq(offset, left.xi, right.xi, xtol=1e-14, rtol=4.0*np.finfo(float).eps, maxiter=200)
    solution = trials.get(root)
    if solution is None:
        offset(root)
        solution = trials[root]
    if abs(solution.mu - mu_star) > tol:
        logger.warning("crossing near xi=%.12g only resolved to |mu - mu*| = %.3e", root, abs(solution.mu - mu_star))
    return solution

def solve_at_mu(curve: SolutionCurve, mu_star: float, tol: float = 1e-7) -> List[PeriodicSolution]:
    """All solutions on ``curve`` with ``mu = mu_star``.

    Every sign change of ``mu(xi) - mu_star`` between neighbouring points is refined by a
    bracketing root finder on ``xi`` (Brent's method, which falls back to bisection), running
    Newton at each trial ``xi``. Returns the refined solutions in order of increasing ``xi``;
    the list is empty when the curve never reaches ``mu_star``. A crossing whose refinement
    fails numerically is logged and left out.
    """
    points = curve.ascending().points
    found = []
    for left, right in zip(points, points[1:]):
        if left.mu == mu_star:
            found.append(left)
        elif (left.mu - mu_star)*(right.mu - mu_star) < 0.0:
            try:
                found.append(_refine_crossing(curve, left, right, mu_star, tol))
            except NumericalError as err:
                logger.warning("skipping crossing of mu=%.12g between xi=%.6g and xi=%.6g: %s",
                               mu_star, left.xi, right.xi, err)
    if points and points[-1].mu == mu_star:
        found.append(points[-1])
    return found


## A Priori Bounds

class BoundCheck(NamedTuple):
    """One measured quantity compared against a bound."""
    name: str
    measured: float
    bound: float
    passed: bool
    description: str

    def to_dict(self) -> Dict[str, Any]:
        return {key: (bool(value) if key == 'passed' else value) for key, value in self._asdict().items()}


def mu_identity_defect(prob: ProblemDef, sol: PeriodicSolution) -> float:
    """``|mu - (1/T) integral g(t, u(t)) dt|``, which vanishes for exact solutions."""
    grid = sol.U.grid
    average = simpson(np.asarray(prob.g(grid, sol.u()), dtype=np.float64), x=grid)/prob.period
    return float(abs(sol.mu - average))

def bound_checks(prob: ProblemDef, sol: PeriodicSolution) -> Tuple[BoundCheck, ...]:
    """Compare a solution against the bounds that hold for every exact solution.

    Always: the identity ``mu = (1/T) integral g(t, u)`` (tolerance 1e-7) and
    ``|mu| <= max |g(t, u(t))|``. Lazer-Solimini: ``min u >= (mu + max e)^(-1/p)``. Condensed
    matter with ``c != 0``: ``sup|U| <= sqrt(T) ||e||_2 / (2 sqrt(3) |c|)``, and ``sup|U| < 1/6``
    when condition (p3) holds.
    """
    grid = sol.U.grid
    g_values = np.asarray(prob.g(grid, sol.u()), dtype=np.float64)
    g_max = float(np.max(np.abs(g_values)))
    identity = mu_identity_defect(prob, sol)
    checks = [
        BoundCheck('mu_identity', identity, 1e-7, identity <= 1e-7, "|mu - mean g(t, u)|"),
        BoundCheck('mu_bound', abs(sol.mu), g_max + 1e-9, abs(sol.mu) <= g_max + 1e-9, "|mu| <= max |g(t, u)|"),
    ]

    if isinstance(prob.family, LazerSolimini):
        eps = models.lower_bound_guard(prob, sol.mu)
        if eps is not None:
            checks.append(BoundCheck('lower_bound', sol.min_u, eps, sol.min_u >= eps, "min u >= (mu + max e)^(-1/p)"))

    if isinstance(prob.family, CondensedMatter) and prob.c != 0.0:
        sup_U = float(np.max(np.abs(sol.U.states[:, 0])))
        bound = np.sqrt(prob.period)*prob.e.l2_norm(prob.period)/(2.0*np.sqrt(3.0)*abs(prob.c))
        checks.append(BoundCheck('U_sup_bound', sup_U, float(bound), sup_U <= bound,
                                 "sup|U| <= sqrt(T) ||e||_2 / (2 sqrt(3) |c|)"))
        if bound < 1.0/6.0:
            checks.append(BoundCheck('U_below_sixth', sup_U, 1.0/6.0, sup_U < 1.0/6.0, "sup|U| < 1/6 under (p3)"))

    return tuple(checks)


__all__ = [
    'VerificationResult',
    'verify_initial_data',
    'verify_initial_data_batch',
    'verify_ivp',
    'verify_curve',
    'wirtinger_check',
    'ShapeReport',
    'shape_report',
    'shape_report_from_data',
    'convexity_at_minimum',
    'solve_at_mu',
    'BoundCheck',
    'bound_checks',
    'mu_identity_defect',
    'VERIFY_TOL',
    'MONOTONE_DECREASING',
    'SINGLE_INTERIOR_MINIMUM',
    'OTHER',
]
