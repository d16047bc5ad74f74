"""Stability report: in-memory structure and its text serialization.

The on-disk format is JSON with a fixed key order and every float written
with 17 significant digits, so a report reparses to exactly the same values
and two runs with the same inputs give identical bytes (timing aside).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from ..stability import classify_stability

SCHEMA_VERSION = 1


@dataclass
class StabilityReport:
    config: dict
    levels: list = field(default_factory=list)
    margin: float | None = None
    definiteness: dict | None = None
    different: dict | None = None
    probe: dict | None = None
    verdict: dict | None = None
    oracle: dict | None = None
    error: dict | None = None
    timing_ms: dict | None = None
    # runtime objects used for plotting; not serialized
    sequence: object = field(default=None, repr=False, compare=False)
    trajectories: list = field(default_factory=list, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.error is None and self.verdict is not None

    def to_dict(self, timing: bool = True) -> dict:
        d = {"v": SCHEMA_VERSION, "config": self.config, "levels": self.levels,
             "margin": self.margin, "definiteness": self.definiteness,
             "different": self.different, "probe": self.probe, "verdict": self.verdict,
             "oracle": self.oracle, "error": self.error}
        if timing:
            d["timing_ms"] = self.timing_ms
        return d


def _format(obj, indent, depth):
    pad = " " * (indent * (depth + 1))
    end = " " * (indent * depth)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_format(v, indent, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_format(v, indent, depth + 1) for v in obj) + "]"
        items = [pad + _format(v, indent, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: StabilityReport, timing: bool = True) -> str:
    return _format(report.to_dict(timing), 2, 0) + "\n"


def emit_report(report: StabilityReport, path, timing: bool = True) -> None:
    """Write the report; IO failures raise ``OSError`` naming the path."""
    text = dumps(report, timing)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(path)) from exc


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def recompute_verdict(d: dict):
    """Re-run the verdict fold on the evidence embedded in a report dict."""
    signs = [SimpleNamespace(level=r["a"], min_S=r["min_S"], violations=r["violations"],
                             argmin=tuple(r.get("argmin", ())))
             for r in d["levels"]]
    probe = None
    if d.get("probe") is not None:
        probe = SimpleNamespace(recurrent=d["probe"]["recurrent"], seeds=d["probe"]["seeds"])
    diff = d.get("different") or {}
    witness = diff.get("witness")
    return classify_stability(signs, bool(diff.get("flag", False)), probe, d["margin"],
                              different_pair=tuple(witness) if witness else None)
