"""Why a center is inconclusive while a weak spiral sink is not.

For the rotation f = (-y, x) the flow is tangent to every circle, so S is
identically zero and the strict sign test has nothing to work with.  Adding
a cubic damping term tilts the flow inward and S becomes positive, even
though it is tiny near the origin.
"""
from lyapquant.app import catalog_config, run_analysis

for name in ("harmonic-center", "spiral-sink-cubic"):
    r = run_analysis(catalog_config(name))
    worst = min(l["min_S"] for l in r.levels)
    print(f"{name:<18} min S over levels {worst:+.3e}  margin {r.margin:.1e}  "
          f"verdict {r.verdict['kind']}")
    print(f"{'':<18} probe: {r.probe['converged']} converged, {r.probe['recurrent']} recurrent, "
          f"{r.probe['undecided']} undecided; oracle convergence "
          f"{r.oracle['convergence_fraction']:.2f}")
