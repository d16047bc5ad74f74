"""Reversed Van der Pol: a sink surrounded by an unstable limit cycle.

Bisects the basin radius along +x, then runs the invariant-set probe inside
and outside it.  Outside the basin the seeds either fall in or leave the
box; the cycle itself repels, so none of them settles onto it.
"""
from lyapquant import invariant_set_probe, make_vector_field
from lyapquant.app import catalog_config
from lyapquant.odeint import basin_radius_along_ray

cfg = catalog_config("vdp-reversed")
f = make_vector_field(cfg.f_texts, 2)
g = cfg.grid()
r = basin_radius_along_ray(f, [1.0, 0.0], 0.5, 3.0, cfg.dt, cfg.probe_T, g)
print(f"basin radius along +x: {r:.3f}")
for radius in (0.5, 3.0):
    p = invariant_set_probe(f, radius, 64, cfg.dt, cfg.probe_T, g)
    print(f"r={radius}: converged {p.converged}, escaped {p.escaped}, "
          f"recurrent {p.recurrent}, undecided {p.undecided}")
