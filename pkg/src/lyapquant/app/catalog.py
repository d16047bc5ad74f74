"""Built-in test systems, each with F = sum of squares and tuned defaults."""
from __future__ import annotations

from ..errors import UnknownSystem
from ..fields import make_scalar_field, make_vector_field
from .config import AnalysisConfig

SUM_SQUARES = {2: "x^2 + y^2", 3: "x^2 + y^2 + z^2"}

# name -> (formulas, description, overrides of AnalysisConfig defaults)
SYSTEMS = {
    "linear-sink": (("-x", "-y"), "global exponential sink", {}),
    "harmonic-center": (("y", "-x"), "rotation; every circle is a closed orbit", {}),
    "spiral-sink-cubic": (("-y - x*(x^2 + y^2)", "x - y*(x^2 + y^2)"),
                          "center linearisation with cubic damping", {}),
    "radial-source": (("x", "y"), "outward radial flow", {}),
    # Odd resolution on a symmetric box keeps vertices off y = 0 where S
    # vanishes; levels stay inside |x| < 1 where S > 0 elsewhere.
    "vdp-reversed": (("-y", "x - (1 - x^2)*y"),
                     "time-reversed Van der Pol; unstable cycle around a stable focus",
                     {"lower": (-3.2, -3.2), "upper": (3.2, 3.2), "resolution": 255,
                      "max_level": 0.8, "dt": 0.005, "horizon": 100.0, "probe_horizon": 200.0,
                      "probe_radius": 0.5}),
    "sink-3d": (("-x", "-y", "-z"), "3-D exponential sink",
                {"lower": (-2.0,) * 3, "upper": (2.0,) * 3, "resolution": 96}),
}


def catalog_names() -> list[str]:
    return list(SYSTEMS)


def catalog_config(name: str, **overrides) -> AnalysisConfig:
    if name not in SYSTEMS:
        raise UnknownSystem(name, SYSTEMS)
    formulas, _, tuned = SYSTEMS[name]
    n = len(formulas)
    kw = dict(system=name, f_texts=formulas, lyapunov=SUM_SQUARES[n], dim=n)
    kw.update(tuned)
    kw.update(overrides)
    return AnalysisConfig(**kw)


def catalog_get(name: str):
    """``(VectorField, ScalarField, AnalysisConfig)`` for a catalog system."""
    cfg = catalog_config(name)
    return (make_vector_field(cfg.f_texts, cfg.dim),
            make_scalar_field(cfg.lyapunov, cfg.dim), cfg)
