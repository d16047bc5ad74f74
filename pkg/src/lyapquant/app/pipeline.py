"""End-to-end analysis: fields -> sequence -> sign checks -> verdict -> oracle."""
from __future__ import annotations

import logging
import time

import numpy as np

from ..errors import LyapquantError
from ..fields import make_scalar_field, make_vector_field
from ..levelset.surface import build_sequence, local_definiteness_probe
from ..odeint import (containment_check, convergence_check, integrate_many,
                      invariant_set_probe)
from ..stability import (classify_stability, default_margin, derivative_sign_check,
                         sequence_is_different, sign_condition)
from .config import AnalysisConfig
from .report import StabilityReport

log = logging.getLogger(__name__)


class _Stages:
    def __init__(self):
        self.name = "config"
        self.timing = {}
        self._t = None

    def start(self, name):
        self.stop()
        self.name = name
        self._t = time.perf_counter()

    def stop(self):
        if self._t is not None:
            self.timing[self.name] = round(1000 * (time.perf_counter() - self._t), 3)
            self._t = None


def _vec(p):
    return [float(v) for v in p]


def build_fields(cfg: AnalysisConfig):
    return make_vector_field(cfg.f_texts, cfg.dim), make_scalar_field(cfg.lyapunov, cfg.dim)


def run_analysis(cfg: AnalysisConfig, oracle: bool = True) -> StabilityReport:
    """Run the full pipeline; errors end up in ``report.error`` with their stage."""
    echo = cfg.to_dict()
    report = StabilityReport(config=echo)
    st = _Stages()
    try:
        cfg.validate()
        st.start("fields")
        f, F = build_fields(cfg)
        g = cfg.grid()

        st.start("definiteness")
        radius = 0.5 * min(min(-lo, hi) for lo, hi in zip(cfg.lower, cfg.upper))
        d = local_definiteness_probe(F, radius, cfg.definiteness_samples, grid=g)
        report.definiteness = {
            "kind": d.kind, "radius": radius, "samples": d.samples,
            "min_value": d.min_value, "max_value": d.max_value,
            "positive_witness": None if d.positive_witness is None else _vec(d.positive_witness),
            "negative_witness": None if d.negative_witness is None else _vec(d.negative_witness),
            "zero_witness": None if d.zero_witness is None else _vec(d.zero_witness),
        }

        st.start("sequence")
        seq = build_sequence(F, g, cfg.levels, cfg.ratio, cfg.max_level)
        report.sequence = seq

        st.start("sign_condition")
        margin = cfg.margin if cfg.margin is not None else default_margin(seq[0], f)
        report.margin = margin
        signs = [sign_condition(H, f, margin, cfg.sample_midpoints) for H in seq]
        for i, (H, s) in enumerate(zip(seq, signs)):
            ds = derivative_sign_check(H, F, f)
            report.levels.append({
                "a": H.level, "diameter": H.diameter, "chi": H.chi, "epsilon": H.sign,
                "min_S": s.min_S, "violations": s.violations, "argmin": list(s.argmin),
                "samples": s.samples, "vertices": len(H.vertices),
                "enclosed_measure": H.enclosed_measure,
                "derivative_agreement": ds.agreement, "zero_derivative": ds.zero_derivative,
                "identity_error": ds.identity_error, "normal_deviation": ds.normal_deviation,
                "nesting": min((v for (a, b), v in seq.certificates.items() if b == i), default=1.0),
            })

        st.start("difference")
        different, pair = sequence_is_different(seq)
        report.different = {"flag": different, "witness": None if pair is None else list(pair)}

        st.start("probe")
        probe = invariant_set_probe(f, cfg.probe_radius, cfg.probe_seeds, cfg.dt, cfg.probe_T, g)
        report.probe = {
            "radius": probe.radius, "seeds": probe.seeds, "converged": probe.converged,
            "escaped": probe.escaped, "recurrent": probe.recurrent, "undecided": probe.undecided,
            "witness": None if not probe.witnesses else {
                "seed_index": probe.witnesses[0][0], "seed": _vec(probe.witnesses[0][1]),
                "loop_points": len(probe.witnesses[0][2]),
                "loop_start": _vec(probe.witnesses[0][2][0]),
            },
        }

        st.start("verdict")
        v = classify_stability(signs, different, probe, margin, different_pair=pair)
        report.verdict = {"kind": v.kind, "theorem": v.theorem, "conflict_flag": v.conflict_flag,
                          "justification": v.justification}

        if oracle:
            st.start("oracle")
            per_level = [containment_check(f, H, cfg.containment_seeds, cfg.dt, cfg.horizon, g)
                         for H in seq]
            frac = convergence_check(f, seq, cfg.convergence_seeds, cfg.dt, cfg.horizon, g)
            first = next((c.witnesses[0] for c in per_level if c.witnesses), None)
            report.oracle = {
                "containment_violations": sum(c.violations for c in per_level),
                "containment_by_level": [c.violations for c in per_level],
                "containment_seeds": cfg.containment_seeds,
                "convergence_fraction": frac,
                "witness": None if first is None else {
                    "start": _vec(first[1]), "exit": _vec(first[2]), "time": first[3]},
            }
            if cfg.dim == 2 and cfg.plot_trajectories > 0:
                H = seq[0]
                idx = (np.arange(cfg.plot_trajectories) * len(H.vertices)) // cfg.plot_trajectories
                starts = H.vertices[idx] + 1e-3 * H.diameter * H.normals[idx]
                report.trajectories = integrate_many(f, starts, cfg.dt, cfg.horizon, g)
        st.stop()
    except (LyapquantError, ValueError, ArithmeticError) as exc:
        stage = st.name
        st.stop()
        log.info("pipeline stopped in stage %s: %s", stage, exc)
        report.error = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
    report.timing_ms = st.timing
    return report
