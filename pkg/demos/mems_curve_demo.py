"""Trace the MEMS worked example on a coarse grid and print what the curve looks like."""

from __future__ import annotations

import logging
import sys

from perioscope import bound_checks, shape_report, solve_at_mu, verify_ivp
from perioscope.cli import trace_from_config, warn_hypotheses
from perioscope.figures import figure_config
from perioscope.output import write_curve_svg

logging.basicConfig(level=logging.INFO, format='%(levelname)s %(name)s: %(message)s')

run = figure_config('fig2').with_overrides(grid_N=512, delta_xi=0.2)
prob = run.build_problem()
warn_hypotheses(prob)

curve = trace_from_config(run, prob)
shape = shape_report(curve)
print(f"{len(curve)} points, {shape.classification}")
print(f"minimum mu = {shape.mu_min:.6g} at xi = {shape.xi_min:.6g}")

for mu_star in (shape.mu_min - 1.0, shape.mu_min + 1.0):
    found = solve_at_mu(curve, mu_star)
    print(f"mu = {mu_star:.6g}: {len(found)} periodic solution(s)")
    for solution in found:
        result = verify_ivp(prob, solution)
        failed = [check.name for check in bound_checks(prob, solution) if not check.passed]
        print(f"    xi = {solution.xi:.8f}  min u = {solution.min_u:.4f}  "
              f"re-integration {'ok' if result.passed else 'FAILED'}  bounds {'ok' if not failed else failed}")

if len(sys.argv) > 1:
    write_curve_svg(curve, sys.argv[1])
