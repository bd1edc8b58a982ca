"""Artifacts written by the command line tool.

* A CSV table of curve points, numbers with 17 significant digits so that they read back to
  the same doubles.
* An SVG plot of ``mu`` against ``xi``, rendered without a display and without timestamps or
  random ids, so the same curve always gives the same file.
* A JSON report.
"""

from __future__ import annotations

import csv
import json
import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from perioscope.errors import ConfigError

if TYPE_CHECKING:
    from typing import Any, Mapping, Optional, Sequence, Union
    from os import PathLike
    from numpy.typing import ArrayLike, NDArray
    from perioscope.continuation import SolutionCurve

    FilePath = Union[str, PathLike]

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('xi', 'mu', 'u0', 'du0', 'min_u', 'max_u', 'residual', 'newton_iters_used')

#: Fixed salt for the ids matplotlib writes into SVG files.
SVG_HASH_SALT = 'perioscope'


def _format_number(value: Any) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), '.17g')


## CSV

class CurveTable(NamedTuple):
    """Columns of a curve CSV file as arrays."""
    xi: NDArray
    mu: NDArray
    u0: NDArray
    du0: NDArray
    min_u: NDArray
    max_u: NDArray
    residual: NDArray
    newton_iters_used: NDArray

    @property
    def rows(self) -> int:
        return self.xi.size


def write_curve_csv(curve: SolutionCurve, path: FilePath) -> None:
    """Write one row per curve point, in order of increasing ``xi``."""
    with open(path, 'w', newline='', encoding='utf-8') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for point in curve.ascending():
            data = point.to_dict()
            writer.writerow([_format_number(data[column]) for column in CSV_COLUMNS])
    logger.info("wrote %d curve points to %s", len(curve), path)

def read_curve_csv(path: FilePath) -> CurveTable:
    """Read a file written by :func:`write_curve_csv`.

    Raises:
        ConfigError: if the file cannot be read or does not have the expected columns.
    """
    try:
        with open(path, newline='', encoding='utf-8') as file:
            reader = csv.reader(file)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ConfigError(f"expected the header {','.join(CSV_COLUMNS)}", str(path))
            rows = [[float(item) for item in row] for row in reader if row]
            if any(len(row) != len(CSV_COLUMNS) for row in rows):
                raise ConfigError(f"every row needs {len(CSV_COLUMNS)} columns", str(path))
    except OSError as err:
        raise ConfigError(f"cannot read curve data: {err.strerror or err}", str(path)) from err
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"malformed curve data: {err}", str(path)) from err

    table = np.array(rows, dtype=np.float64).reshape(-1, len(CSV_COLUMNS))
    if np.any(np.diff(table[:, 0]) <= 0):
        raise ConfigError("xi must be strictly increasing", str(path))
    columns = [table[:, index] for index in range(len(CSV_COLUMNS))]
    columns[-1] = columns[-1].astype(int)
    return CurveTable(*columns)


## SVG

def render_curve_svg(xi: ArrayLike, mu: ArrayLike, path: FilePath, *, title: str = '',
                     marker: Optional[Sequence[float]] = None) -> None:
    """Plot ``mu`` against ``xi`` as one polyline and save it as SVG.

    Parameters:
        marker: optional ``(xi, mu)`` point to highlight, e.g. the minimum of the curve.
    """
    xi = np.asarray(xi, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)

    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT, 'svg.fonttype': 'path'}):
        fig = Figure(figsize=(6.0, 4.0))
        FigureCanvasAgg(fig)
        ax = fig.add_subplot()
        ax.plot(xi, mu, color='black', linewidth=1.2)
        if marker is not None:
            ax.plot([marker[0]], [marker[1]], marker='o', color='tab:red', linestyle='none')
        if np.any(mu < 0) and np.any(mu > 0):
            ax.axhline(0.0, color='gray', linewidth=0.6, linestyle='--')
        ax.set_xlabel(r'$\xi$')
        ax.set_ylabel(r'$\mu$')
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata={'Date': None})
    logger.info("wrote plot to %s", path)

def write_curve_svg(curve: SolutionCurve, path: FilePath, *, title: str = '') -> None:
    curve = curve.ascending()
    render_curve_svg(curve.xi, curve.mu, path, title=title or curve.problem.name)


## Reports

def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        # JSON has no infinities
        return value if np.isfinite(value) else repr(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value

def write_report(report: Mapping[str, Any], path: FilePath) -> None:
    """Write a report as indented JSON with sorted keys."""
    with open(path, 'w', encoding='utf-8') as file:
        json.dump(_jsonable(report), file, indent=4, sort_keys=True)
        file.write('\n')
    logger.info("wrote report to %s", path)


__all__ = [
    'CSV_COLUMNS',
    'CurveTable',
    'write_curve_csv',
    'read_curve_csv',
    'render_curve_svg',
    'write_curve_svg',
    'write_report',
]
