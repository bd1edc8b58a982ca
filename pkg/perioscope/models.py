"""Problem families and their hypotheses.

Every problem has the form ``u'' + c u' + g(t, u) = mu + e(t)`` with T-periodic, zero-average
forcing ``e`` and a nonlinearity ``g`` that is singular at ``u = 0``. Three families of ``g``
are built in:

========================  ===============================  ==============================
family                    ``g(t, u)``                      parameters
========================  ===============================  ==============================
``lazer_solimini``        ``u^-p``                         ``p > 0``
``mems``                  ``b u + a(t) u^-p``              ``b``, ``p > 0``, ``a(t) > 0``
``condensed_matter``      ``a (u^-4 - u^-3)``              ``a``
========================  ===============================  ==============================

A :class:`ProblemDef` bundles a family with ``c``, ``T`` and ``e``. Its invariants are checked
on construction; the hypotheses of the existence theory are *reported* by :func:`validate`,
never enforced.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from numbers import Real
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from perioscope import signals
from perioscope.errors import DomainError, ProblemDefinitionError
from perioscope.signals import PeriodicSignal

if TYPE_CHECKING:
    from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Type, Union
    from numpy.typing import ArrayLike, NDArray

    Value = Union[float, NDArray[np.float64]]

#: Largest allowed magnitude of the numerical mean of the forcing ``e``.
ZERO_AVERAGE_TOL = 1e-8

#: ``max g'(u) / a`` for the condensed matter nonlinearity, attained at ``u = 5/3``.
CONDENSED_MATTER_SLOPE = 3.0**5/5.0**5


## Family Registry

_FAMILIES: Dict[str, Type[Nonlinearity]] = {}

def _register_family(name: str) -> Callable:
    """Associate a :class:`Nonlinearity` subclass with the family name used in configuration."""
    def decorator(cls: Type[Nonlinearity]):
        if name in _FAMILIES:
            raise ValueError(f"'{name}' is already registered to {_FAMILIES[name]!r}")
        cls.family = name
        _FAMILIES[name] = cls
        return cls
    return decorator

def family_names() -> Tuple[str, ...]:
    """Names of the registered problem families."""
    return tuple(_FAMILIES)

def family_from_params(name: str, params: Mapping[str, Any], period: float) -> Nonlinearity:
    """Build a nonlinearity from its family name and parameter mapping.

    Raises:
        ProblemDefinitionError: for an unknown family, missing or extraneous parameters, or
            parameters that violate the family's invariants.
    """
    cls = _FAMILIES.get(name)
    if cls is None:
        raise ProblemDefinitionError(f"unknown family '{name}', expected one of {', '.join(_FAMILIES)}", 'family')

    present = {key for key, value in params.items() if value is not None}
    missing = [key for key in cls.parameters if key not in present]
    if missing:
        raise ProblemDefinitionError(f"family '{name}' needs parameter '{missing[0]}'", missing[0])
    extra = sorted(present - set(cls.parameters))
    if extra:
        raise ProblemDefinitionError(f"family '{name}' has no parameter '{extra[0]}'", extra[0])
    return cls.from_params({key: params[key] for key in cls.parameters}, period)


def _check_domain(u: ArrayLike) -> NDArray:
    u = np.asarray(u, dtype=np.float64)
    if not np.all(u > 0.0):
        bad = float(np.min(u)) if u.size else float('nan')
        raise DomainError(f"singular nonlinearity evaluated at u = {bad:.6g} <= 0")
    return u

def _shaped(t: ArrayLike, values: NDArray) -> Value:
    shape = np.broadcast_shapes(np.shape(t), np.shape(values))
    values = np.broadcast_to(values, shape)
    if values.ndim == 0:
        return float(values)
    return np.array(values)

def _positive_number(value: Any, name: str) -> float:
    if not isinstance(value, Real) or isinstance(value, bool) or not np.isfinite(value) or value <= 0:
        raise ProblemDefinitionError(f"must be a positive finite number, got {value!r}", name)
    return float(value)

def _finite_number(value: Any, name: str) -> float:
    if not isinstance(value, Real) or isinstance(value, bool) or not np.isfinite(value):
        raise ProblemDefinitionError(f"must be a finite number, got {value!r}", name)
    return float(value)


## Nonlinearities

class Nonlinearity(ABC):
    """Base class for the built-in nonlinearities ``g(t, u)``.

    Subclasses implement the raw formulas; the public methods check that ``u > 0`` and shape
    the result like ``t`` and ``u`` broadcast together.
    """

    family: str = ''                      #: registered family name
    parameters: Tuple[str, ...] = ()      #: configuration keys the family takes

    @classmethod
    @abstractmethod
    def from_params(cls, params: Mapping[str, Any], period: float) -> Nonlinearity:
        ...

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Parameters as JSON-compatible values."""
        ...

    @abstractmethod
    def _g(self, t: NDArray, u: NDArray) -> NDArray: ...

    @abstractmethod
    def _g_u(self, t: NDArray, u: NDArray) -> NDArray: ...

    @abstractmethod
    def _g_uu(self, t: NDArray, u: NDArray) -> NDArray: ...

    @abstractmethod
    def sup_g_u(self) -> float:
        """``sup g_u(t, u)`` over all ``t`` and ``u > 0``."""
        ...

    def check(self, period: float) -> None:
        """Check family invariants that depend on the period. Raises ProblemDefinitionError."""
        pass

    def hypotheses(self, prob: ProblemDef) -> Tuple[HypothesisCheck, ...]:
        """Family-specific theory hypotheses, see :func:`validate`."""
        return ()

    def __repr__(self) -> str:
        args = ', '.join(f'{key}={value!r}' for key, value in self.params().items())
        return f'<{self.__class__.__qualname__}({args})>'

    def g(self, t: ArrayLike, u: ArrayLike) -> Value:
        u = _check_domain(u)
        return _shaped(t, self._g(np.asarray(t, dtype=np.float64), u))

    def g_u(self, t: ArrayLike, u: ArrayLike) -> Value:
        u = _check_domain(u)
        return _shaped(t, self._g_u(np.asarray(t, dtype=np.float64), u))

    def g_uu(self, t: ArrayLike, u: ArrayLike) -> Value:
        u = _check_domain(u)
        return _shaped(t, self._g_uu(np.asarray(t, dtype=np.float64), u))


@_register_family('lazer_solimini')
class LazerSolimini(Nonlinearity):
    """``g(u) = u^-p`` with ``p > 0``."""

    parameters = ('p',)

    def __init__(self, p: float):
        self.p = _positive_number(p, 'p')

    @classmethod
    def from_params(cls, params: Mapping[str, Any], period: float) -> LazerSolimini:
        return cls(params['p'])

    def params(self) -> Dict[str, Any]:
        return {'p': self.p}

    def _g(self, t, u):
        return u**-self.p

    def _g_u(self, t, u):
        return -self.p*u**(-self.p - 1.0)

    def _g_uu(self, t, u):
        return self.p*(self.p + 1.0)*u**(-self.p - 2.0)

    def sup_g_u(self) -> float:
        return 0.0


@_register_family('mems')
class Mems(Nonlinearity):
    """``g(t, u) = b u + a(t) u^-p`` with ``p > 0`` and ``a(t) > 0``."""

    parameters = ('b', 'p', 'a')

    def __init__(self, b: float, p: float, a: PeriodicSignal):
        self.b = _finite_number(b, 'b')
        self.p = _positive_number(p, 'p')
        self.a = a

    @classmethod
    def from_params(cls, params: Mapping[str, Any], period: float) -> Mems:
        a = params['a']
        if not isinstance(a, PeriodicSignal):
            a = signals.signal_from_config(a, period)
        return cls(params['b'], params['p'], a)

    def params(self) -> Dict[str, Any]:
        return {'b': self.b, 'p': self.p, 'a': self.a.to_config()}

    def check(self, period: float) -> None:
        if not self.a.min(period) > 0.0:
            raise ProblemDefinitionError("a(t) must be positive on [0, T]", 'a')

    def _g(self, t, u):
        return self.b*u + self.a(t)*u**-self.p

    def _g_u(self, t, u):
        return self.b - self.p*self.a(t)*u**(-self.p - 1.0)

    def _g_uu(self, t, u):
        return self.p*(self.p + 1.0)*self.a(t)*u**(-self.p - 2.0)

    def sup_g_u(self) -> float:
        return self.b

    def hypotheses(self, prob: ProblemDef) -> Tuple[HypothesisCheck, ...]:
        omega2 = prob.omega_squared
        return (
            HypothesisCheck('b_positive', self.b > 0.0, self.b, 0.0, "0 < b"),
            HypothesisCheck('b_below_omega2', self.b < omega2, self.b, omega2, "b < omega^2"),
            HypothesisCheck('a_positive', True, self.a.min(prob.period), 0.0, "a(t) > 0 on the grid"),
        )


@_register_family('condensed_matter')
class CondensedMatter(Nonlinearity):
    """``g(u) = a (u^-4 - u^-3)``.

    For ``a > 0``, ``g``, ``g_u`` and ``g_uu`` change sign exactly once on ``(0, inf)``, at
    ``u = 1``, ``4/3`` and ``5/3`` respectively.
    """

    parameters = ('a',)

    #: where g, g_u and g_uu change sign
    sign_change_points = (1.0, 4.0/3.0, 5.0/3.0)

    def __init__(self, a: float):
        self.a = _finite_number(a, 'a')

    @classmethod
    def from_params(cls, params: Mapping[str, Any], period: float) -> CondensedMatter:
        return cls(params['a'])

    def params(self) -> Dict[str, Any]:
        return {'a': self.a}

    def _g(self, t, u):
        return self.a*(u**-4.0 - u**-3.0)

    def _g_u(self, t, u):
        return self.a*(-4.0*u**-5.0 + 3.0*u**-4.0)

    def _g_uu(self, t, u):
        return self.a*(20.0*u**-6.0 - 12.0*u**-5.0)

    def sup_g_u(self) -> float:
        if self.a < 0.0:
            return float('inf')
        return self.a*CONDENSED_MATTER_SLOPE

    def hypotheses(self, prob: ProblemDef) -> Tuple[HypothesisCheck, ...]:
        omega2 = prob.omega_squared
        slope = self.a*CONDENSED_MATTER_SLOPE
        e_norm = prob.e.l2_norm(prob.period)
        if prob.c != 0.0:
            p3 = np.sqrt(3.0*prob.period)*e_norm/abs(prob.c)
        else:
            p3 = float('inf')
        return (
            HypothesisCheck('p2', slope < omega2, slope, omega2, "a 3^5/5^5 < omega^2"),
            HypothesisCheck('p3', p3 < 1.0, p3, 1.0, "sqrt(3T) ||e||_2 / |c| < 1, equivalently sup|U| < 1/6"),
        )


## Problem Definition

@dataclass(frozen=True)
class ProblemDef:
    """One periodic problem ``u'' + c u' + g(t, u) = mu + e(t)``.

    Raises:
        ProblemDefinitionError: if ``T <= 0``, ``c`` is not finite, ``e`` does not have zero
            average, or a family invariant fails.
    """

    family: Nonlinearity
    c: float
    period: float
    e: PeriodicSignal
    name: str = field(default='', compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'period', _positive_number(self.period, 'T'))
        object.__setattr__(self, 'c', _finite_number(self.c, 'c'))
        e_mean = self.e.mean(self.period)
        if not abs(e_mean) <= ZERO_AVERAGE_TOL:
            raise ProblemDefinitionError(f"forcing must have zero average, mean is {e_mean:.3e}", 'e')
        self.family.check(self.period)

    @property
    def omega(self) -> float:
        """``2 pi / T``."""
        return 2.0*np.pi/self.period

    @property
    def omega_squared(self) -> float:
        return self.omega**2

    def g(self, t: ArrayLike, u: ArrayLike) -> Value:
        return self.family.g(t, u)

    def g_u(self, t: ArrayLike, u: ArrayLike) -> Value:
        return self.family.g_u(t, u)

    def g_uu(self, t: ArrayLike, u: ArrayLike) -> Value:
        return self.family.g_uu(t, u)

    def describe(self) -> Dict[str, Any]:
        """JSON-compatible summary of the problem."""
        return {
            'name': self.name,
            'family': self.family.family,
            'c': self.c,
            'T': self.period,
            'e': self.e.to_config(),
            **self.family.params(),
        }


def make_problem(family: str, *, c: float, T: float, e: Any, name: str = '', **params: Any) -> ProblemDef:
    """Convenience constructor taking configuration-style values.

    ``e`` (and the MEMS ``a``) may be :class:`~perioscope.signals.PeriodicSignal` objects,
    expression text, numbers or Fourier lists.
    """
    period = _positive_number(T, 'T')
    if not isinstance(e, PeriodicSignal):
        e = signals.signal_from_config(e, period)
    return ProblemDef(family_from_params(family, params, period), c, period, e, name)


## Functional Interface

def g(prob: ProblemDef, t: ArrayLike, u: ArrayLike) -> Value:
    """The nonlinearity ``g(t, u)``. Raises DomainError for ``u <= 0``."""
    return prob.g(t, u)

def g_u(prob: ProblemDef, t: ArrayLike, u: ArrayLike) -> Value:
    """The partial derivative ``g_u(t, u)``. Raises DomainError for ``u <= 0``."""
    return prob.g_u(t, u)

def g_homotopy(prob: ProblemDef, k: float, t: ArrayLike, u: ArrayLike) -> Value:
    """``k g(t, u)`` for the homotopy parameter ``0 <= k <= 1``."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"homotopy parameter must lie in [0, 1], got {k!r}")
    return k*prob.g(t, u)

def g_u_homotopy(prob: ProblemDef, k: float, t: ArrayLike, u: ArrayLike) -> Value:
    """``k g_u(t, u)``, the u-derivative of :func:`g_homotopy`."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"homotopy parameter must lie in [0, 1], got {k!r}")
    return k*prob.g_u(t, u)


## Hypotheses

class HypothesisCheck(NamedTuple):
    """Outcome of one hypothesis check."""
    name: str
    passed: bool
    value: float        #: the computed quantity
    limit: float        #: the bound it is compared against
    description: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'passed': bool(self.passed),
            'value': float(self.value),
            'limit': float(self.limit),
            'description': self.description,
        }


@dataclass(frozen=True)
class ValidationReport:
    """All hypothesis checks that apply to a problem."""

    checks: Tuple[HypothesisCheck, ...]
    omega_squared: float
    sup_g_u: float
    e_l2_norm: float

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> Tuple[HypothesisCheck, ...]:
        return tuple(check for check in self.checks if not check.passed)

    def __getitem__(self, name: str) -> HypothesisCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(check.name == name for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'passed': self.passed,
            'omega_squared': self.omega_squared,
            'sup_g_u': self.sup_g_u,
            'e_l2_norm': self.e_l2_norm,
            'checks': [check.to_dict() for check in self.checks],
        }


def validate(prob: ProblemDef) -> ValidationReport:
    """Check the hypotheses that guarantee the shape of the solution curve.

    Always reported: zero-average forcing, and ``sup g_u < omega^2`` (the condition that makes
    ``xi`` a global parameter). Family checks: ``0 < b < omega^2`` and ``a(t) > 0`` for MEMS,
    conditions (p2) and (p3) for the condensed matter family.

    Failures are reported, never raised.
    """
    omega2 = prob.omega_squared
    sup_slope = prob.family.sup_g_u()
    e_mean = prob.e.mean(prob.period)
    checks = (
        HypothesisCheck('zero_average_forcing', abs(e_mean) <= ZERO_AVERAGE_TOL, abs(e_mean), ZERO_AVERAGE_TOL,
                        "|mean e| is numerically zero"),
        HypothesisCheck('g_u_below_omega2', sup_slope < omega2, sup_slope, omega2, "sup g_u < omega^2"),
    ) + prob.family.hypotheses(prob)
    return ValidationReport(checks, omega2, sup_slope, prob.e.l2_norm(prob.period))


def lower_bound_guard(prob: ProblemDef, mu: float) -> Optional[float]:
    """A priori lower bound ``eps`` with ``u(t) > eps`` for every solution at this ``mu``.

    Only available for the Lazer-Solimini family, where evaluating the equation at the minimum
    of ``u`` gives ``eps = (mu + max e)^(-1/p)``. Returns ``None`` when no bound is available
    (other families, or ``mu + max e <= 0``).
    """
    if not isinstance(prob.family, LazerSolimini):
        return None
    level = mu + prob.e.max(prob.period)
    if not level > 0.0:
        return None
    return float(level**(-1.0/prob.family.p))


__all__ = [
    'Nonlinearity',
    'LazerSolimini',
    'Mems',
    'CondensedMatter',
    'ProblemDef',
    'make_problem',
    'family_names',
    'family_from_params',
    'g',
    'g_u',
    'g_homotopy',
    'g_u_homotopy',
    'HypothesisCheck',
    'ValidationReport',
    'validate',
    'lower_bound_guard',
    'ZERO_AVERAGE_TOL',
    'CONDENSED_MATTER_SLOPE',
]
