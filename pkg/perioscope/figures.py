"""Predefined run configurations, one per worked example.

* ``fig1``: Lazer-Solimini, ``u'' + 0.5 u' + u^-1/2 = mu + 6 sin(2 pi t/1.2)``. The curve
  ``mu(xi)`` decreases monotonically.
* ``fig2``: MEMS, ``u'' + 0.5 u' + 2u + (2 + cos^3(2 pi t/0.8)) u^-3 = mu + 5 sin(2 pi t/0.8)``.
  The curve has a single interior minimum with ``mu > 0``.
* ``fig3``: condensed matter, ``u'' + 0.3 u' + 3(u^-4 - u^-3) = mu + 8 cos(2 pi t)``. The curve
  has a single interior minimum with ``mu < 0``.
"""

from __future__ import annotations

import copy
from typing import TYPE_CHECKING

from perioscope.config import RunConfig

if TYPE_CHECKING:
    from typing import Any, Dict, Tuple

## Worked Examples
FIGURES: Dict[str, Dict[str, Any]] = {
    'fig1': {
        'name': 'fig1',
        'problem': {
            'family': 'lazer_solimini',
            'c': 0.5,
            'T': 1.2,
            'p': 0.5,
            'e': '6*sin(2*pi*t/1.2)',
        },
        'continuation': {'xi_start': 0.4, 'xi_end': 12.0, 'xi0': 8.0},
        'output': {'csv': 'fig1.csv', 'svg': 'fig1.svg', 'report': 'fig1_report.json'},
        'analysis': {'expected_shape': 'monotone-decreasing'},
    },
    'fig2': {
        'name': 'fig2',
        'problem': {
            'family': 'mems',
            'c': 0.5,
            'T': 0.8,
            'b': 2.0,
            'p': 3.0,
            'e': '5*sin(2*pi*t/0.8)',
            'a': '2 + cos(2*pi*t/0.8)^3',
        },
        'continuation': {'xi_start': 0.5, 'xi_end': 8.0, 'xi0': 3.0},
        'output': {'csv': 'fig2.csv', 'svg': 'fig2.svg', 'report': 'fig2_report.json'},
        'analysis': {'expected_shape': 'single-interior-minimum'},
    },
    'fig3': {
        'name': 'fig3',
        'problem': {
            'family': 'condensed_matter',
            'c': 0.3,
            'T': 1.0,
            'a': 3.0,
            'e': '8*cos(2*pi*t)',
        },
        'continuation': {'xi_start': 0.8, 'xi_end': 4.0, 'xi0': 2.0},
        'output': {'csv': 'fig3.csv', 'svg': 'fig3.svg', 'report': 'fig3_report.json'},
        'analysis': {'expected_shape': 'single-interior-minimum', 'mu_star': [0.0]},
    },
}


def figure_names() -> Tuple[str, ...]:
    return tuple(FIGURES)

def figure_config(name: str) -> RunConfig:
    """The run configuration of a worked example.

    Raises:
        KeyError: if there is no example with that name.
    """
    try:
        data = FIGURES[name]
    except KeyError:
        raise KeyError(f"no figure named '{name}', expected one of {', '.join(FIGURES)}") from None
    return RunConfig.from_dict(copy.deepcopy(data))


__all__ = [
    'FIGURES',
    'figure_names',
    'figure_config',
]
