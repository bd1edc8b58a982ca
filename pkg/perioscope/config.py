"""Run configuration: a JSON document with ``problem``, ``continuation``, ``output`` and
``analysis`` blocks.

Each block is a :class:`ConfigBlock` subclass whose fields are declared with the
:class:`ConfigField` descriptor. Fields are collected per class on first use, values are
checked as they are assigned, and keys that do not name a field are rejected so that typos in a
config file never pass silently.

.. code-block:: json

    {
        "name": "fig1",
        "problem": {"family": "lazer_solimini", "c": 0.5, "T": 1.2, "p": 0.5,
                    "e": "6*sin(2*pi*t/1.2)"},
        "continuation": {"xi_start": 0.4, "xi_end": 12, "xi0": 8},
        "output": {"csv": "fig1.csv", "svg": "fig1.svg", "report": "fig1_report.json"}
    }
"""

from __future__ import annotations

import json
import logging
from numbers import Real
from typing import TYPE_CHECKING

import numpy as np

from perioscope import expr, models
from perioscope.continuation import PREDICTORS, ContinuationConfig
from perioscope.errors import ConfigError, ExpressionError

if TYPE_CHECKING:
    from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, Type, Union
    from os import PathLike
    from perioscope.models import ProblemDef

    FieldParser = Callable[[Any, str], Any]

logger = logging.getLogger(__name__)

#: Marks a field without a default.
REQUIRED = object()

SHAPE_CLASSES = ('monotone-decreasing', 'single-interior-minimum', 'other')


## Value Parsers

def _number(value: Any, path: str) -> float:
    if not isinstance(value, Real) or isinstance(value, bool) or not np.isfinite(value):
        raise ConfigError(f"must be a finite number, got {value!r}", path)
    return float(value)

def _positive(value: Any, path: str) -> float:
    value = _number(value, path)
    if not value > 0:
        raise ConfigError(f"must be positive, got {value!r}", path)
    return value

def _integer(value: Any, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"must be an integer, got {value!r}", path)
    return value

def _string(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"must be a string, got {value!r}", path)
    return value

def _optional(parse: FieldParser) -> FieldParser:
    def parse_optional(value: Any, path: str) -> Any:
        if value is None:
            return None
        return parse(value, path)
    return parse_optional

def _signal(value: Any, path: str) -> Any:
    """Expression text, a number or a Fourier list; expression text must parse."""
    if isinstance(value, str):
        try:
            expr.parse(value)
        except ExpressionError as err:
            raise ConfigError(str(err), path) from err
        return value
    if isinstance(value, Real) and not isinstance(value, bool):
        return _number(value, path)
    if isinstance(value, list):
        return value
    raise ConfigError(f"expected expression text, a number or a Fourier list, got {value!r}", path)


def _join_path(prefix: str, path: Optional[str]) -> str:
    if not path:
        return prefix
    if path.startswith('[') or not prefix:
        return prefix + path
    return f"{prefix}.{path}"


## Fields and Blocks

class ConfigField:
    """Descriptor for one field of a :class:`ConfigBlock`.

    The default parser only passes values through. A custom parser can be attached by using
    the field as a decorator, the same way ``property`` takes a getter.
    """

    def __init__(self, default: Any = REQUIRED, *, parse: Optional[FieldParser] = None, doc: str = ''):
        """
        Parameters:
            default: value used when the field is absent; :data:`REQUIRED` makes it mandatory.
            parse: called as ``parse(value, path)`` to check and convert an assigned value.
            doc: custom docstring.
        """
        self.owner = None
        self.name = None
        self.default = default
        self.fparse = parse or (lambda value, path: value)
        self.__doc__ = doc

    def __set_name__(self, owner: Type[ConfigBlock], name: str):
        self.owner = owner
        self.name = name
        if not self.__doc__:
            self.__doc__ = f"The '{name}' config field."

    def __get__(self, instance: Optional[ConfigBlock], owner: Type[ConfigBlock]) -> Any:
        if instance is None:
            return self
        return instance._values[self.name]

    def __set__(self, instance: ConfigBlock, value: Any) -> None:
        instance._values[self.name] = self.fparse(value, instance.field_path(self.name))

    def __call__(self, fparse: FieldParser) -> ConfigField:
        self.fparse = fparse
        if fparse.__doc__:
            self.__doc__ = fparse.__doc__
        return self

    @property
    def required(self) -> bool:
        return self.default is REQUIRED


class ConfigBlock:
    """One block of a run configuration.

    Parameters:
        values: field values by name.
        path: dotted prefix used in error messages, e.g. ``'problem'``.

    Raises:
        ConfigError: for unknown keys, missing required fields or invalid values.
    """

    block_name: str = ''

    @classmethod
    def _get_config_fields(cls) -> Mapping[str, ConfigField]:
        config_fields = cls.__dict__.get('_config_fields')
        if config_fields is None:
            config_fields = {}
            for klass in reversed(cls.__mro__):
                for name, value in vars(klass).items():
                    if isinstance(value, ConfigField):
                        config_fields[name] = value
            setattr(cls, '_config_fields', config_fields)
        return config_fields

    @classmethod
    def get_config_fields(cls) -> Sequence[str]:
        """Names of the fields this block accepts."""
        return list(cls._get_config_fields().keys())

    def __init__(self, values: Optional[Mapping[str, Any]] = None, path: Optional[str] = None):
        values = dict(values or {})
        self._path = self.block_name if path is None else path
        self._values = {}

        config_fields = self._get_config_fields()
        for name in values:
            if name not in config_fields:
                raise ConfigError(f"no config field named '{name}'", self._path or None)

        for name, config_field in config_fields.items():
            if name in values:
                setattr(self, name, values[name])
            elif config_field.required:
                raise ConfigError("missing required field", self.field_path(name))
            else:
                self._values[name] = config_field.default

    def __repr__(self) -> str:
        fields = ', '.join(f'{name}={value!r}' for name, value in self._values.items())
        return f'{self.__class__.__qualname__}({fields})'

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ConfigBlock):
            return NotImplemented
        return type(self) is type(other) and self._values == other._values

    def field_path(self, name: str) -> str:
        return f'{self._path}.{name}' if self._path else name

    @classmethod
    def from_dict(cls, data: Any, path: Optional[str] = None) -> ConfigBlock:
        path = cls.block_name if path is None else path
        if not isinstance(data, dict):
            raise ConfigError(f"must be a JSON object, got {type(data).__name__}", path)
        return cls(data, path)

    def to_dict(self) -> Dict[str, Any]:
        """Field values as JSON-compatible data, omitting unset optional fields."""
        return {name: value for name, value in self._values.items() if value is not None}


## Run Configuration Blocks

class ProblemBlock(ConfigBlock):
    """The periodic problem: family, its parameters, ``c``, ``T`` and the forcing ``e``."""

    block_name = 'problem'

    family = ConfigField()
    c = ConfigField(parse=_number, doc="Damping constant.")
    T = ConfigField(parse=_positive, doc="Period.")
    e = ConfigField(parse=_signal, doc="Zero-average forcing: expression text, number or Fourier list.")
    p = ConfigField(None, parse=_optional(_positive), doc="Exponent of the singularity.")
    b = ConfigField(None, parse=_optional(_number), doc="Linear coefficient of the MEMS family.")
    a = ConfigField(None, doc="MEMS coefficient signal or condensed matter constant.")

    @family
    def family(value: Any, path: str) -> str:
        """Name of a registered problem family."""
        value = _string(value, path)
        if value not in models.family_names():
            raise ConfigError(f"unknown family '{value}', expected one of {', '.join(models.family_names())}", path)
        return value

    @a
    def a(value: Any, path: str) -> Any:
        """MEMS coefficient signal or condensed matter constant."""
        if value is None:
            return None
        return _signal(value, path)

    def build(self, name: str = '') -> ProblemDef:
        """Create the :class:`~perioscope.models.ProblemDef` described by this block.

        Raises:
            ProblemDefinitionError: if the family parameters are incomplete or violate an invariant.
        """
        params = {key: getattr(self, key) for key in ('p', 'b', 'a') if getattr(self, key) is not None}
        try:
            return models.make_problem(self.family, c=self.c, T=self.T, e=self.e, name=name, **params)
        except ConfigError as err:
            raise type(err)(err.message, _join_path(self._path, err.path)) from err


class ContinuationBlock(ConfigBlock):
    """The xi range and the continuation settings."""

    block_name = 'continuation'

    xi_start = ConfigField(parse=_positive)
    xi_end = ConfigField(parse=_positive)
    xi0 = ConfigField(None, parse=_optional(_positive), doc="Initial point; tracing runs both ways when it lies inside the range.")
    delta_xi = ConfigField(0.1, parse=_positive)
    newton_iters = ConfigField(2, parse=_integer)
    newton_tol = ConfigField(1e-9, parse=_positive)
    accept_tol = ConfigField(1e-3, parse=_positive)
    grid_N = ConfigField(2048, parse=_integer)
    positivity_floor = ConfigField(1e-4, parse=_positive)
    mu_cap = ConfigField(1e4, parse=_positive)
    max_halvings = ConfigField(6, parse=_integer)
    predictor = ConfigField('secant')
    init_mode = ConfigField('cold')

    @init_mode
    def init_mode(value: Any, path: str) -> Union[str, Dict[str, int]]:
        """``"cold"``, ``"homotopy"`` or ``{"homotopy": K}``."""
        if value in ('cold', 'homotopy'):
            return value
        if isinstance(value, dict) and set(value) == {'homotopy'}:
            steps = _integer(value['homotopy'], f'{path}.homotopy')
            if steps < 1:
                raise ConfigError(f"must be at least 1, got {steps!r}", f'{path}.homotopy')
            return {'homotopy': steps}
        raise ConfigError(f"expected 'cold', 'homotopy' or {{\"homotopy\": K}}, got {value!r}", path)

    @predictor
    def predictor(value: Any, path: str) -> str:
        if value not in PREDICTORS:
            raise ConfigError(f"expected one of {', '.join(PREDICTORS)}, got {value!r}", path)
        return value

    @property
    def xi_range(self) -> Tuple[float, float]:
        return min(self.xi_start, self.xi_end), max(self.xi_start, self.xi_end)

    def build(self) -> ContinuationConfig:
        """The :class:`~perioscope.continuation.ContinuationConfig` for these settings."""
        mode = self.init_mode
        homotopy = {}
        if isinstance(mode, dict):
            homotopy['homotopy_steps'] = mode['homotopy']
            mode = 'homotopy'
        try:
            return ContinuationConfig(
                delta_xi = self.delta_xi,
                newton_iters = self.newton_iters,
                newton_tol = self.newton_tol,
                accept_tol = self.accept_tol,
                grid_N = self.grid_N,
                positivity_floor = self.positivity_floor,
                init_mode = mode,
                mu_cap = self.mu_cap,
                max_halvings = self.max_halvings,
                predictor = self.predictor,
                **homotopy,
            )
        except ConfigError as err:
            raise ConfigError(err.message, _join_path(self._path, err.path)) from err


class OutputBlock(ConfigBlock):
    """Artifact paths (relative to the output directory) and log verbosity."""

    block_name = 'output'

    csv = ConfigField('curve.csv', parse=_string)
    svg = ConfigField('curve.svg', parse=_string)
    report = ConfigField('report.json', parse=_string)
    verbosity = ConfigField(0, parse=_integer)


class AnalysisBlock(ConfigBlock):
    """Expectations checked by ``perioscope verify`` and ``perioscope analyze``."""

    block_name = 'analysis'

    expected_shape = ConfigField(None, doc="Shape class the curve must have.")
    mu_star = ConfigField((), doc="Values of mu at which to locate solutions.")
    verify_tol = ConfigField(1e-5, parse=_positive)

    @expected_shape
    def expected_shape(value: Any, path: str) -> Optional[str]:
        """Shape class the curve must have."""
        if value is None:
            return None
        if value not in SHAPE_CLASSES:
            raise ConfigError(f"expected one of {', '.join(SHAPE_CLASSES)}, got {value!r}", path)
        return value

    @mu_star
    def mu_star(value: Any, path: str) -> Tuple[float, ...]:
        """Values of mu at which to locate solutions."""
        if isinstance(value, Real) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"must be a number or a list of numbers, got {value!r}", path)
        return tuple(_number(item, f'{path}[{index}]') for index, item in enumerate(value))

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['mu_star'] = list(self.mu_star)
        return data


class RunConfig:
    """A complete run configuration."""

    _blocks = {
        'problem': ProblemBlock,
        'continuation': ContinuationBlock,
        'output': OutputBlock,
        'analysis': AnalysisBlock,
    }

    def __init__(self, problem: ProblemBlock, continuation: ContinuationBlock,
                 output: Optional[OutputBlock] = None, analysis: Optional[AnalysisBlock] = None,
                 name: str = ''):
        self.problem = problem
        self.continuation = continuation
        self.output = output or OutputBlock()
        self.analysis = analysis or AnalysisBlock()
        self.name = name

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}: {self.name or "unnamed"}, family={self.problem.family!r}>'

    @classmethod
    def from_dict(cls, data: Any) -> RunConfig:
        """Build a run configuration from parsed JSON.

        Raises:
            ConfigError: for unknown blocks or fields, missing required data or invalid values.
        """
        if not isinstance(data, dict):
            raise ConfigError(f"a run configuration must be a JSON object, got {type(data).__name__}")
        for key in data:
            if key != 'name' and key not in cls._blocks:
                raise ConfigError(f"no config block named '{key}'")
        for key in ('problem', 'continuation'):
            if key not in data:
                raise ConfigError("missing required block", key)

        blocks = {key: block.from_dict(data[key]) for key, block in cls._blocks.items() if key in data}
        name = _string(data.get('name', ''), 'name')
        return cls(name=name, **blocks)

    def to_dict(self) -> Dict[str, Any]:
        data = {'name': self.name} if self.name else {}
        for key in self._blocks:
            data[key] = getattr(self, key).to_dict()
        return data

    def with_overrides(self, *, grid_N: Optional[int] = None, delta_xi: Optional[float] = None) -> RunConfig:
        """A copy with continuation settings replaced, as done by ``--grid-n`` and ``--delta-xi``."""
        values = self.continuation.to_dict()
        if grid_N is not None:
            values['grid_N'] = grid_N
        if delta_xi is not None:
            values['delta_xi'] = delta_xi
        continuation = ContinuationBlock.from_dict(values)
        return RunConfig(self.problem, continuation, self.output, self.analysis, self.name)

    def build_problem(self) -> ProblemDef:
        return self.problem.build(self.name)

    def build_continuation(self) -> ContinuationConfig:
        return self.continuation.build()


def load_config(path: Union[str, PathLike]) -> RunConfig:
    """Read and check a JSON run configuration.

    Raises:
        ConfigError: if the file cannot be read, is not valid JSON or does not describe a run.
    """
    try:
        with open(path, encoding='utf-8') as file:
            data = json.load(file)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err.strerror or err}", str(path)) from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON at line {err.lineno} column {err.colno}: {err.msg}", str(path)) from err
    logger.debug("loaded config %s", path)
    return RunConfig.from_dict(data)

def save_config(config: RunConfig, path: Union[str, PathLike]) -> None:
    """Write a run configuration as indented JSON."""
    with open(path, 'w', encoding='utf-8') as file:
        json.dump(config.to_dict(), file, indent=4)
        file.write('\n')


__all__ = [
    'ConfigField',
    'ConfigBlock',
    'ProblemBlock',
    'ContinuationBlock',
    'OutputBlock',
    'AnalysisBlock',
    'RunConfig',
    'load_config',
    'save_config',
    'REQUIRED',
    'SHAPE_CLASSES',
]
