"""Periodic solutions of singular forced equations, continued in their average value.

For ``u'' + c u' + g(t, u) = mu + e(t)`` with T-periodic, zero-average ``e`` and ``g`` singular
at ``u = 0``, every periodic solution is determined by its average ``xi``. This package computes
the curve ``mu(xi)`` by Newton continuation in ``xi``, re-checks the computed solutions
independently and classifies the shape of the curve.
"""

from __future__ import annotations

__version__ = '0.1.0'

from perioscope.errors import (
    PerioscopeError,
    HypothesisWarning,
    ConfigError,
    NumericalError,
)
from perioscope.models import (
    ProblemDef,
    make_problem,
    validate,
)
from perioscope.continuation import (
    ContinuationConfig,
    PeriodicSolution,
    SolutionCurve,
    newton_correct,
    init_solution,
    trace_curve,
    trace_both,
)
from perioscope.verify import (
    verify_ivp,
    shape_report,
    solve_at_mu,
    bound_checks,
)


__all__ = [
    '__version__',
    'PerioscopeError',
    'HypothesisWarning',
    'ConfigError',
    'NumericalError',
    'ProblemDef',
    'make_problem',
    'validate',
    'ContinuationConfig',
    'PeriodicSolution',
    'SolutionCurve',
    'newton_correct',
    'init_solution',
    'trace_curve',
    'trace_both',
    'verify_ivp',
    'shape_report',
    'solve_at_mu',
    'bound_checks',
]
