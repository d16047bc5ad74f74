"""Command-line entry point.

Exit codes: 0 when a verdict (or requested output) was produced, 1 for bad
usage, 2 when the pipeline or output stage failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, LyapquantError, UnknownSystem
from ..levelset.export import write_loop_csv, write_obj
from ..levelset.surface import build_sequence
from ..odeint import integrate, invariant_set_probe
from .catalog import SUM_SQUARES, SYSTEMS, catalog_config
from .config import AnalysisConfig
from .pipeline import build_fields, run_analysis
from .plot import emit_plot
from .report import emit_report

EXIT_OK, EXIT_USAGE, EXIT_PIPELINE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--system", help="catalog system name (see `catalog`)")
    g.add_argument("--fx", help="first component of f")
    g.add_argument("--fy", help="second component of f")
    g.add_argument("--fz", help="third component of f (3-D)")
    g.add_argument("--lyapunov", help="candidate function F (default: sum of squares)")
    g.add_argument("--dim", type=int, choices=(2, 3))
    g.add_argument("--box", help="half-width H, or lo,hi pairs per axis (x0,x1,y0,y1[,z0,z1])")
    g.add_argument("--grid", type=int, help="cells per axis")
    g.add_argument("--levels", type=int, help="number of hypersurfaces")
    g.add_argument("--ratio", type=float, help="geometric level ratio in (0, 1)")
    g.add_argument("--max-level", type=float, help="cap on |first level|")
    g.add_argument("--margin", type=float, help="strict-positivity margin for S")
    g.add_argument("--midpoints", action="store_true", default=None,
                   help="also test S at facet centroids")
    o = p.add_argument_group("oracle")
    o.add_argument("--dt", type=float, help="RK4 step")
    o.add_argument("--horizon", type=float, help="integration horizon T")
    o.add_argument("--seeds", type=int, help="invariant-set probe seeds")
    o.add_argument("--probe-radius", type=float)
    o.add_argument("--probe-horizon", type=float, help="probe horizon (default 2*T)")


def _add_output_args(p, out_help):
    p.add_argument("--out", help=out_help)
    p.add_argument("--plot", help="SVG phase portrait (2-D only)")
    p.add_argument("--no-timing", action="store_true", help="omit timing for byte-stable output")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lyapquant",
                description="Check stability of the origin from nested level sets of F.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", help="full pipeline and verdict")
    _add_problem_args(a)
    _add_output_args(a, "report file (JSON)")
    lv = sub.add_parser("levels", help="build and export the hypersurface sequence")
    _add_problem_args(lv)
    _add_output_args(lv, "directory for loop CSV / mesh OBJ files")
    s = sub.add_parser("simulate", help="trajectory oracle only")
    _add_problem_args(s)
    s.add_argument("--x0", help="single initial point x,y[,z]; writes a trajectory CSV to --out")
    _add_output_args(s, "trajectory CSV (with --x0) or probe summary JSON")
    sub.add_parser("catalog", help="list built-in systems")
    return p


def config_from_args(args) -> AnalysisConfig:
    over = {}
    if args.box is not None:
        vals = _floats(args.box, "--box")
        if len(vals) == 1:
            n = args.dim or (len(SYSTEMS[args.system][0]) if args.system in SYSTEMS
                             else (3 if args.fz else 2))
            over["lower"], over["upper"] = (-abs(vals[0]),) * n, (abs(vals[0]),) * n
        elif len(vals) in (4, 6):
            over["lower"], over["upper"] = tuple(vals[0::2]), tuple(vals[1::2])
        else:
            raise UsageError("--box takes 1, 4 or 6 numbers")
    for flag, key in (("grid", "resolution"), ("levels", "levels"), ("ratio", "ratio"),
                      ("max_level", "max_level"), ("margin", "margin"), ("dt", "dt"),
                      ("horizon", "horizon"), ("seeds", "probe_seeds"),
                      ("probe_radius", "probe_radius"), ("probe_horizon", "probe_horizon"),
                      ("midpoints", "sample_midpoints"), ("lyapunov", "lyapunov")):
        v = getattr(args, flag)
        if v is not None:
            over[key] = v
    inline = [t for t in (args.fx, args.fy, args.fz) if t is not None]
    if args.system:
        if inline:
            raise UsageError("give either --system or --fx/--fy[/--fz], not both")
        try:
            cfg = catalog_config(args.system, **over)
        except UnknownSystem as exc:
            raise UsageError(str(exc)) from None
        if args.dim is not None and args.dim != cfg.dim:
            raise UsageError(f"system {args.system} is {cfg.dim}-D")
    else:
        if args.fx is None or args.fy is None:
            raise UsageError("need --system or inline --fx and --fy")
        n = args.dim or (3 if args.fz is not None else 2)
        if len(inline) != n:
            raise UsageError(f"{n}-D system needs {n} components")
        over.setdefault("lyapunov", SUM_SQUARES[n])
        over.setdefault("lower", (-2.0,) * n)
        over.setdefault("upper", (2.0,) * n)
        cfg = AnalysisConfig(f_texts=tuple(inline), dim=n, **over)
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _print_levels(seq, file=sys.stdout):
    print(f"{'#':>3} {'level':>12} {'diameter':>10} {'chi':>4} {'eps':>3} {'vertices':>8}", file=file)
    for i, H in enumerate(seq, 1):
        print(f"{i:>3} {H.level:>12.6g} {H.diameter:>10.5g} {H.chi:>4} {H.sign:>3} {len(H.vertices):>8}",
              file=file)


def cmd_analyze(args, cfg) -> int:
    report = run_analysis(cfg)
    timing = not args.no_timing
    if report.error:
        e = report.error
        print(f"pipeline error in stage {e['stage']}: {e['type']}: {e['message']}", file=sys.stderr)
    else:
        _print_levels(report.sequence)
        v = report.verdict
        print(f"probe r={report.probe['radius']:g}: converged {report.probe['converged']}, "
              f"escaped {report.probe['escaped']}, recurrent {report.probe['recurrent']}, "
              f"undecided {report.probe['undecided']}")
        print(f"oracle: containment violations {report.oracle['containment_violations']}, "
              f"convergence fraction {report.oracle['convergence_fraction']:.3g}")
        print(f"verdict: {v['kind']} ({v['theorem']}){' [conflict]' if v['conflict_flag'] else ''}")
        print(f"  {v['justification']}")
    try:
        if args.out:
            emit_report(report, args.out, timing=timing)
        if args.plot and report.sequence is not None:
            emit_plot(report.sequence, report.trajectories, args.plot,
                      box=(cfg.lower, cfg.upper))
    except (OSError, LyapquantError) as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK if report.ok else EXIT_PIPELINE


def cmd_levels(args, cfg) -> int:
    f, F = build_fields(cfg)
    seq = build_sequence(F, cfg.grid(), cfg.levels, cfg.ratio, cfg.max_level)
    _print_levels(seq)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, H in enumerate(seq, 1):
            if H.n == 2:
                write_loop_csv(H, out / f"level_{i:02d}.csv")
            else:
                write_obj(H, out / f"level_{i:02d}.obj")
    if args.plot:
        emit_plot(seq, [], args.plot, box=(cfg.lower, cfg.upper))
    return EXIT_OK


def cmd_simulate(args, cfg) -> int:
    f, _ = build_fields(cfg)
    g = cfg.grid()
    if args.x0 is not None:
        x0 = _floats(args.x0, "--x0")
        if len(x0) != cfg.dim:
            raise UsageError(f"--x0 needs {cfg.dim} numbers")
        t = integrate(f, x0, cfg.dt, cfg.horizon, g)
        print(f"{t.reason} after t={t.times[-1]:.6g}; final state {np.array2string(t.states[-1])}")
        if args.out:
            t.write_csv(args.out)
        if args.plot:
            emit_plot(None, [t], args.plot, box=(cfg.lower, cfg.upper))
        return EXIT_OK
    probe = invariant_set_probe(f, cfg.probe_radius, cfg.probe_seeds, cfg.dt, cfg.probe_T, g)
    summary = {"radius": probe.radius, "seeds": probe.seeds, "converged": probe.converged,
               "escaped": probe.escaped, "recurrent": probe.recurrent, "undecided": probe.undecided}
    print(", ".join(f"{k} {v}" for k, v in summary.items()))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_catalog() -> int:
    for name, (formulas, about, _) in SYSTEMS.items():
        n = len(formulas)
        print(f"{name:<18} n={n}  f = ({', '.join(formulas)})")
        print(f"{'':<18} {about}; F = {SUM_SQUARES[n]}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "catalog":
        return cmd_catalog()
    try:
        cfg = config_from_args(args)
        if args.command == "analyze":
            return cmd_analyze(args, cfg)
        if args.command == "levels":
            return cmd_levels(args, cfg)
        return cmd_simulate(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lyapquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LyapquantError, ValueError, ArithmeticError, OSError) as exc:
        print(f"lyapquant: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
