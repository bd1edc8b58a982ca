"""The ``perioscope`` command.

::

    perioscope trace     --config RUN.json [--out-dir DIR] [--grid-n N] [--delta-xi X]
    perioscope verify    --config RUN.json [--out-dir DIR] [--csv CURVE.csv]
    perioscope analyze   --config RUN.json [--out-dir DIR] [--csv CURVE.csv]
    perioscope reproduce fig1|fig2|fig3 [--out-dir DIR] [--grid-n N] [--delta-xi X]

Exit status is 0 on success, 1 for configuration or input errors, 2 when the numerics fail and
3 when a verification or an expected curve shape fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path
from typing import TYPE_CHECKING

from perioscope import __version__, figures, models, output, verify
from perioscope.config import load_config, save_config
from perioscope.continuation import trace_both, trace_curve
from perioscope.errors import (
    ConfigError,
    ExpressionError,
    HypothesisWarning,
    NumericalError,
    VerificationFailure,
)

if TYPE_CHECKING:
    from typing import Any, Dict, List, Optional, Sequence, Tuple
    from perioscope.config import RunConfig
    from perioscope.continuation import SolutionCurve
    from perioscope.models import ProblemDef

logger = logging.getLogger('perioscope')

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3

_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def _set_verbosity(verbosity: int) -> None:
    level = _LOG_LEVELS[min(max(verbosity, 0), len(_LOG_LEVELS) - 1)]
    root = logging.getLogger()
    if level < root.level:
        root.setLevel(level)

def _derived_path(path: Path, suffix: str) -> Path:
    return path.with_name(f'{path.stem}_{suffix}{path.suffix}')


## Orchestration

def warn_hypotheses(prob: ProblemDef) -> models.ValidationReport:
    """Validate a problem and issue a :class:`HypothesisWarning` for every failed check."""
    report = models.validate(prob)
    for check in report.failures:
        warnings.warn(
            f"{prob.name or 'problem'}: hypothesis '{check.name}' fails ({check.description}: "
            f"{check.value:.6g} vs {check.limit:.6g}); the curve may not have the predicted shape",
            HypothesisWarning,
            stacklevel=2,
        )
    return report

def trace_from_config(run: RunConfig, prob: Optional[ProblemDef] = None) -> SolutionCurve:
    """Trace the curve a run configuration asks for.

    Without ``xi0`` the curve is traced from ``xi_start`` to ``xi_end``. With ``xi0`` strictly
    inside the range it is traced both ways from ``xi0``; with ``xi0`` at one end it is traced
    from that end to the other.

    Raises:
        ConfigError: if ``xi0`` lies outside the range.
        NumericalError: if the initial solution cannot be computed.
    """
    prob = prob if prob is not None else run.build_problem()
    cfg = run.build_continuation()
    block = run.continuation
    lo, hi = block.xi_range

    if block.xi0 is None:
        curve = trace_curve(prob, block.xi_start, block.xi_end, cfg)
    elif not lo <= block.xi0 <= hi:
        raise ConfigError(f"must lie between xi_start and xi_end, got {block.xi0!r}", 'continuation.xi0')
    elif lo < block.xi0 < hi:
        curve = trace_both(prob, block.xi0, lo, hi, cfg)
    else:
        curve = trace_curve(prob, block.xi0, hi if block.xi0 == lo else lo, cfg)

    curve = curve.ascending()
    if curve.stop_reason != 'completed':
        for stop in curve.stops:
            if stop.reason != 'completed':
                logger.warning("trace %s stopped early at xi=%.6g (%s): %s", stop.direction, stop.xi, stop.reason, stop.detail)
    return curve

def verify_points(curve: SolutionCurve, tol: float) -> Tuple[List[Dict[str, Any]], int]:
    """Re-integrate every curve point; returns the per-point records and the failure count."""
    records = []
    failures = 0
    for point, result in zip(curve, verify.verify_curve(curve, tol)):
        records.append({'xi': point.xi, 'mu': point.mu, **result.to_dict()})
        if not result.passed:
            failures += 1
            logger.warning("xi=%.6g fails re-integration: %s", point.xi, result.message or result)
    return records, failures

def check_bounds(curve: SolutionCurve) -> Tuple[List[Dict[str, Any]], int]:
    """Run :func:`perioscope.verify.bound_checks` on every curve point."""
    records = []
    failures = 0
    for point in curve:
        checks = verify.bound_checks(curve.problem, point)
        failed = [check.name for check in checks if not check.passed]
        if failed:
            failures += 1
            logger.warning("xi=%.6g violates %s", point.xi, ', '.join(failed))
        records.append({'xi': point.xi, 'checks': [check.to_dict() for check in checks]})
    return records, failures

def analyze_shape(run: RunConfig, xi: Sequence[float], mu: Sequence[float]) -> Tuple[Dict[str, Any], List[str]]:
    """Shape report plus the mismatch with ``analysis.expected_shape``, if any."""
    problems = []
    if len(xi) < 5:
        return {'error': f"too few points ({len(xi)}) for shape analysis"}, [f"only {len(xi)} curve points"]
    shape = verify.shape_report_from_data(xi, mu)
    expected = run.analysis.expected_shape
    if expected is not None and shape.classification != expected:
        problems.append(f"curve is {shape.classification}, expected {expected}")
    return shape.to_dict(), problems

def solutions_at_mu(run: RunConfig, curve: SolutionCurve) -> Tuple[List[Dict[str, Any]], List[str]]:
    """Locate and re-verify the solutions at every ``analysis.mu_star``."""
    records = []
    problems = []
    tol = run.analysis.verify_tol
    for mu_star in run.analysis.mu_star:
        found = verify.solve_at_mu(curve, mu_star)
        entries = []
        for solution in found:
            result = verify.verify_ivp(curve.problem, solution, tol)
            if not result.passed:
                problems.append(f"solution at mu={mu_star:.6g}, xi={solution.xi:.6g} fails re-integration")
            entries.append({**solution.to_dict(), 'verification': result.to_dict()})
        logger.info("mu=%.6g: %d solution(s) on the curve", mu_star, len(found))
        records.append({'mu_star': mu_star, 'count': len(found), 'solutions': entries})
    return records, problems


## Subcommands

def _output_paths(run: RunConfig, out_dir: Path) -> Tuple[Path, Path, Path]:
    return out_dir/run.output.csv, out_dir/run.output.svg, out_dir/run.output.report

def cmd_trace(run: RunConfig, out_dir: Path, args: argparse.Namespace) -> int:
    prob = run.build_problem()
    validation = warn_hypotheses(prob)
    curve = trace_from_config(run, prob)

    csv_path, svg_path, report_path = _output_paths(run, out_dir)
    output.write_curve_csv(curve, csv_path)
    output.write_curve_svg(curve, svg_path)

    shape, _ = analyze_shape(run, curve.xi, curve.mu)
    output.write_report({
        'problem': prob.describe(),
        'continuation': curve.config.to_dict(),
        'validation': validation.to_dict(),
        'points': len(curve),
        'stops': [stop._asdict() for stop in curve.stops],
        'warm_start_rate': curve.warm_start_rate,
        'shape': shape,
        'convexity_at_minimum': verify.convexity_at_minimum(curve) if len(curve) >= 3 else None,
    }, report_path)
    return EXIT_OK

def cmd_verify(run: RunConfig, out_dir: Path, args: argparse.Namespace) -> int:
    prob = run.build_problem()
    csv_path, _, report_path = _output_paths(run, out_dir)
    table = output.read_curve_csv(args.csv or csv_path)

    tol = run.analysis.verify_tol
    steps = 3*run.continuation.grid_N
    results = verify.verify_initial_data_batch(prob, table.xi, table.mu, table.u0, table.du0, steps=steps, tol=tol)
    records = []
    failures = 0
    for row, result in enumerate(results):
        records.append({'xi': float(table.xi[row]), 'mu': float(table.mu[row]), **result.to_dict()})
        if not result.passed:
            failures += 1
            logger.warning("row %d (xi=%.6g) fails re-integration: %s", row + 1, table.xi[row], result.message or result)

    output.write_report({
        'problem': prob.describe(),
        'tol': tol,
        'steps': steps,
        'rows': table.rows,
        'failures': failures,
        'results': records,
    }, _derived_path(report_path, 'verify'))
    if failures:
        raise VerificationFailure(f"{failures} of {table.rows} curve points fail re-integration at tol {tol:g}")
    return EXIT_OK

def cmd_analyze(run: RunConfig, out_dir: Path, args: argparse.Namespace) -> int:
    csv_path, _, report_path = _output_paths(run, out_dir)
    table = output.read_curve_csv(args.csv or csv_path)
    shape, problems = analyze_shape(run, table.xi, table.mu)

    report = {'shape': shape, 'expected_shape': run.analysis.expected_shape}
    if run.analysis.mu_star:
        # locating solutions at a given mu needs the solutions themselves, not just the table
        curve = trace_from_config(run)
        report['solutions_at_mu'], found_problems = solutions_at_mu(run, curve)
        problems += found_problems

    report['problems'] = problems
    output.write_report(report, _derived_path(report_path, 'analyze'))
    if problems:
        raise VerificationFailure('; '.join(problems))
    return EXIT_OK

def cmd_reproduce(run: RunConfig, out_dir: Path, args: argparse.Namespace) -> int:
    save_config(run, out_dir/f'{run.name}.json')

    prob = run.build_problem()
    validation = warn_hypotheses(prob)
    curve = trace_from_config(run, prob)

    csv_path, svg_path, report_path = _output_paths(run, out_dir)
    output.write_curve_csv(curve, csv_path)
    output.write_curve_svg(curve, svg_path)

    shape, problems = analyze_shape(run, curve.xi, curve.mu)
    verification, failures = verify_points(curve, run.analysis.verify_tol)
    if failures:
        problems.append(f"{failures} of {len(curve)} curve points fail re-integration")
    bounds, bound_failures = check_bounds(curve)
    at_mu, at_mu_problems = solutions_at_mu(run, curve)
    problems += at_mu_problems

    output.write_report({
        'figure': run.name,
        'problem': prob.describe(),
        'continuation': curve.config.to_dict(),
        'validation': validation.to_dict(),
        'points': len(curve),
        'stops': [stop._asdict() for stop in curve.stops],
        'warm_start_rate': curve.warm_start_rate,
        'shape': shape,
        'expected_shape': run.analysis.expected_shape,
        'convexity_at_minimum': verify.convexity_at_minimum(curve) if len(curve) >= 3 else None,
        'verification': verification,
        'bounds': bounds,
        'bound_failures': bound_failures,
        'solutions_at_mu': at_mu,
        'problems': problems,
    }, report_path)
    if problems:
        raise VerificationFailure('; '.join(problems))
    return EXIT_OK


## Entry Point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out-dir', type=Path, default=Path('.'), help="directory for output files (default: current directory)")
    common.add_argument('--grid-n', type=int, dest='grid_n', help="override continuation.grid_N")
    common.add_argument('--delta-xi', type=float, dest='delta_xi', help="override continuation.delta_xi")
    common.add_argument('-v', '--verbose', action='count', default=0, help="more log output (repeat for debug output)")

    with_config = argparse.ArgumentParser(add_help=False)
    with_config.add_argument('--config', type=Path, required=True, help="JSON run configuration")

    with_csv = argparse.ArgumentParser(add_help=False)
    with_csv.add_argument('--csv', type=Path, help="curve data to read (default: output.csv in the output directory)")

    parser = argparse.ArgumentParser(
        prog='perioscope',
        description="Trace and verify curves of periodic solutions of singular forced equations.",
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    trace = commands.add_parser('trace', parents=[common, with_config], help="trace a curve, write CSV and SVG")
    trace.set_defaults(handler=cmd_trace)
    check = commands.add_parser('verify', parents=[common, with_config, with_csv], help="re-check every point of a curve")
    check.set_defaults(handler=cmd_verify)
    analyze = commands.add_parser('analyze', parents=[common, with_config, with_csv], help="classify the shape of a curve")
    analyze.set_defaults(handler=cmd_analyze)
    reproduce = commands.add_parser('reproduce', parents=[common], help="run one of the worked examples")
    reproduce.add_argument('figure', choices=figures.figure_names())
    reproduce.set_defaults(handler=cmd_reproduce)
    return parser

def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    logging.getLogger().setLevel(logging.WARNING)
    _set_verbosity(args.verbose)
    logging.captureWarnings(True)

    try:
        if args.command == 'reproduce':
            run = figures.figure_config(args.figure)
        else:
            run = load_config(args.config)
        run = run.with_overrides(grid_N=args.grid_n, delta_xi=args.delta_xi)
        _set_verbosity(run.output.verbosity)

        args.out_dir.mkdir(parents=True, exist_ok=True)
        return args.handler(run, args.out_dir, args)
    except (ConfigError, ExpressionError) as err:
        logger.error("%s", err)
        return EXIT_CONFIG
    except OSError as err:
        logger.error("%s", err)
        return EXIT_CONFIG
    except NumericalError as err:
        logger.error("numerical failure: %s", err)
        return EXIT_NUMERICAL
    except VerificationFailure as err:
        logger.error("verification failed: %s", err)
        return EXIT_VERIFICATION
    finally:
        logging.captureWarnings(False)


__all__ = [
    'main',
    'build_parser',
    'trace_from_config',
    'warn_hypotheses',
    'verify_points',
    'check_bounds',
    'EXIT_OK',
    'EXIT_CONFIG',
    'EXIT_NUMERICAL',
    'EXIT_VERIFICATION',
]
