"""Periodic scalar signals used for forcing terms and coefficients.

A :class:`PeriodicSignal` is a T-periodic function of ``t`` that can be evaluated on a whole
time grid at once. Two encodings are supported: expression text (see :mod:`perioscope.expr`)
and an explicit Fourier list of ``(k, cos-coefficient, sin-coefficient)`` triples.

The ``signal_from_*`` constructor functions should be preferred over instantiating the
signal classes directly.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from numbers import Real
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.integrate import simpson

from perioscope import expr
from perioscope.errors import ConfigError

if TYPE_CHECKING:
    from typing import Any, Iterable, Tuple, Union
    from numpy.typing import ArrayLike, NDArray
    from perioscope.expr import Expression

    TimeValue = Union[float, NDArray[np.float64]]

#: Default number of grid intervals used when a signal is summarized by quadrature.
SAMPLE_INTERVALS = 2048


class PeriodicSignal(ABC):
    """Abstract base class for T-periodic signals."""

    @abstractmethod
    def __call__(self, t: ArrayLike) -> TimeValue:
        """Evaluate the signal at a time or an array of times."""
        ...

    @abstractmethod
    def to_config(self) -> Any:
        """A JSON-compatible value that :func:`signal_from_config` turns back into this signal."""
        ...

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}: {self}>'

    def sample(self, period: float, intervals: int = SAMPLE_INTERVALS) -> Tuple[NDArray, NDArray]:
        """Return ``(t, values)`` on a uniform grid of ``intervals`` steps over one period."""
        times = np.linspace(0.0, period, intervals + 1)
        return times, np.asarray(self(times), dtype=np.float64)

    def mean(self, period: float, intervals: int = SAMPLE_INTERVALS) -> float:
        """Average over one period (composite Simpson)."""
        times, values = self.sample(period, intervals)
        return float(simpson(values, x=times) / period)

    def l2_norm(self, period: float, intervals: int = SAMPLE_INTERVALS) -> float:
        """The L2 norm over one period, ``sqrt(integral of f^2 from 0 to T)``."""
        times, values = self.sample(period, intervals)
        return float(np.sqrt(simpson(values*values, x=times)))

    def max(self, period: float, intervals: int = SAMPLE_INTERVALS) -> float:
        """Largest value on the sampling grid."""
        return float(np.max(self.sample(period, intervals)[1]))

    def min(self, period: float, intervals: int = SAMPLE_INTERVALS) -> float:
        """Smallest value on the sampling grid."""
        return float(np.min(self.sample(period, intervals)[1]))


class ExpressionSignal(PeriodicSignal):
    """A signal defined by expression text."""

    def __init__(self, expression: Expression):
        self.expression = expression

    def __call__(self, t: ArrayLike) -> TimeValue:
        return self.expression(t)

    def __str__(self) -> str:
        return self.expression.source

    def to_config(self) -> str:
        return self.expression.source


class FourierTerm(NamedTuple):
    """One harmonic ``a cos(k w t) + b sin(k w t)`` of a :class:`FourierSignal`."""
    k: int      #: harmonic number, ``k = 0`` is the constant term
    cos: float  #: cosine coefficient
    sin: float  #: sine coefficient


class FourierSignal(PeriodicSignal):
    """A finite Fourier series with base frequency ``2*pi/period``."""

    def __init__(self, terms: Iterable[FourierTerm], period: float):
        self.terms = tuple(terms)
        self.period = period
        self.omega = 2.0*np.pi/period

    def __call__(self, t: ArrayLike) -> TimeValue:
        times = np.asarray(t, dtype=np.float64)
        values = np.zeros_like(times)
        for k, a, b in self.terms:
            values = values + a*np.cos(k*self.omega*times) + b*np.sin(k*self.omega*times)
        if values.ndim == 0:
            return float(values)
        return values

    def __str__(self) -> str:
        parts = [f'{a!r}*cos({k}*w*t) + {b!r}*sin({k}*w*t)' for k, a, b in self.terms]
        return ' + '.join(parts) or '0'

    def to_config(self) -> list:
        return [[k, a, b] for k, a, b in self.terms]


## Constructors

def signal_from_expression(source: str) -> ExpressionSignal:
    """Create a signal from expression text such as ``'6*sin(2*pi*t/1.2)'``."""
    return ExpressionSignal(expr.parse(source))

def signal_from_constant(value: float) -> ExpressionSignal:
    """Create a constant signal."""
    return ExpressionSignal(expr.parse(repr(float(value))))

def signal_from_fourier(terms: Iterable[Any], period: float) -> FourierSignal:
    """Create a signal from a Fourier list.

    Each term may be a ``(k, cos, sin)`` sequence or a mapping with keys ``'k'``, ``'cos'`` and
    ``'sin'`` (missing coefficients default to zero).

    Raises:
        ConfigError: if a term is malformed or ``k`` is not a non-negative integer.
    """
    parsed = []
    for index, term in enumerate(terms):
        if isinstance(term, dict):
            unknown = set(term) - {'k', 'cos', 'sin'}
            if unknown:
                raise ConfigError(f"no Fourier field named '{sorted(unknown)[0]}'", f'[{index}]')
            values = (term.get('k'), term.get('cos', 0.0), term.get('sin', 0.0))
        else:
            values = tuple(term)
            if len(values) != 3:
                raise ConfigError("Fourier terms need exactly three entries [k, cos, sin]", f'[{index}]')

        k, a, b = values
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise ConfigError(f"harmonic number must be a non-negative integer, got {k!r}", f'[{index}]')
        if not all(isinstance(v, Real) and np.isfinite(v) for v in (a, b)):
            raise ConfigError("Fourier coefficients must be finite numbers", f'[{index}]')
        parsed.append(FourierTerm(k, float(a), float(b)))
    return FourierSignal(parsed, period)

def signal_from_config(value: Any, period: float) -> PeriodicSignal:
    """Create a signal from a configuration value: expression text, a number or a Fourier list.

    Raises:
        ConfigError: if the value has none of these forms.
        ExpressionSyntaxError: if expression text does not parse.
    """
    if isinstance(value, str):
        return signal_from_expression(value)
    if isinstance(value, Real) and not isinstance(value, bool):
        if not np.isfinite(value):
            raise ConfigError(f"signal value must be finite, got {value!r}")
        return signal_from_constant(value)
    if isinstance(value, (list, tuple)):
        return signal_from_fourier(value, period)
    raise ConfigError(f"expected expression text, a number or a Fourier list, got {value!r}")


__all__ = [
    'PeriodicSignal',
    'ExpressionSignal',
    'FourierSignal',
    'FourierTerm',
    'signal_from_expression',
    'signal_from_constant',
    'signal_from_fourier',
    'signal_from_config',
    'SAMPLE_INTERVALS',
]
