"""Walk through the level-set check for the linear sink f = (-x, -y).

Builds the nested circles of F = x^2 + y^2, prints the sign of S on each,
runs the trajectory oracle and writes a phase portrait next to this script.
"""
from pathlib import Path

from lyapquant import (Grid, build_sequence, containment_check, make_scalar_field,
                       make_vector_field, sign_condition)
from lyapquant.app import catalog_config, run_analysis
from lyapquant.app.plot import emit_plot

F = make_scalar_field("x^2 + y^2", 2)
f = make_vector_field(["-x", "-y"], 2)
grid = Grid.cube(2.0, 256, 2)
seq = build_sequence(F, grid, count=8)

print("level      diameter  min S     sqrt(a)   exits")
for H in seq:
    s = sign_condition(H, f)
    c = containment_check(f, H, seeds=50, box=grid)
    print(f"{H.level:<10.5g} {H.diameter:<9.4f} {s.min_S:<9.5f} {H.level ** .5:<9.5f} {c.violations}")

# Same thing through the pipeline, which adds the probe and the verdict.
report = run_analysis(catalog_config("linear-sink"))
print("verdict:", report.verdict["kind"], "-", report.verdict["justification"])
out = Path(__file__).with_name("sink.svg")
emit_plot(report.sequence, report.trajectories, out, box=((-2, -2), (2, 2)))
print("wrote", out)
