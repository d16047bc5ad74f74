"""Sign conditions on nested hypersurfaces and the resulting stability verdict.

On each hypersurface H the criterion quantity is ``S(x) = <N(x), f(x)>`` with
N the inward unit normal.  Strict positivity of S on every member of a
convergent sequence certifies Lyapunov stability; the verdict is refined to
asymptotic or non-asymptotic stability by the topology difference test and
the invariant-set probe.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField, VectorField
from .levelset.surface import Hypersurface, topology_signature

MARGIN_REL = 1e-9
IDENTITY_TOL = 1e-9

ASYMPTOTIC = "AsymptoticallyStable"
NOT_ASYMPTOTIC = "StableNotAsymptotic"
STABLE = "Stable"
INCONCLUSIVE = "Inconclusive"

THEOREMS = {
    INCONCLUSIVE: "sign condition not met (sufficient criterion only)",
    STABLE: "nested-hypersurface stability theorem",
    NOT_ASYMPTOTIC: "non-homeomorphic-sequence theorem",
    ASYMPTOTIC: "asymptotic-stability theorem",
}


@dataclass
class SignConditionResult:
    level: float
    min_S: float
    argmin: tuple
    argmin_index: int
    violations: int
    margin: float
    samples: int
    nonfinite: int = 0


def default_margin(H: Hypersurface, f: VectorField) -> float:
    """``1e-9 * max |f|`` over the vertices of ``H`` (normally the outermost surface)."""
    with np.errstate(all="ignore"):
        norms = np.linalg.norm(f(H.vertices), axis=1)
    norms = norms[np.isfinite(norms)]
    return MARGIN_REL * float(norms.max()) if norms.size else 0.0


def criterion_values(H: Hypersurface, f: VectorField, points=None) -> np.ndarray:
    """S = <N, f> at ``points`` (the vertices by default); NaN where undefined."""
    points = H.vertices if points is None else np.asarray(points, dtype=float)
    if H.scalar_field is None:
        with np.errstate(all="ignore"):
            return np.einsum("ij,ij->i", H.field_normals(points), f(points))
    # eps <grad F, f> / |grad F|: dotting first keeps exact cancellations exact
    g = H.scalar_field.grad(points)
    with np.errstate(all="ignore"):
        return H.epsilon * np.einsum("ij,ij->i", g, f(points)) / np.linalg.norm(g, axis=1)


def sign_condition(H: Hypersurface, f: VectorField, margin: float = 0.0,
                   sample_midpoints: bool = False) -> SignConditionResult:
    """Check ``S > margin`` at every vertex of ``H``.

    Non-finite S values count as violations.  With ``sample_midpoints`` the
    facet centroids are checked as well.
    """
    if H.n != f.n:
        raise ValueError("surface and field dimensions differ")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    pts = H.vertices
    if sample_midpoints:
        pts = np.concatenate([pts, H.facet_midpoints()[0]])
    S = criterion_values(H, f, pts)
    finite = np.isfinite(S)
    bad = ~finite | (S <= margin)
    if finite.any():
        k = int(np.argmin(np.where(finite, S, np.inf)))
        min_S = float(S[k])
    else:
        k, min_S = 0, float("nan")
    return SignConditionResult(
        level=H.level, min_S=min_S, argmin=tuple(float(c) for c in pts[k]),
        argmin_index=k, violations=int(bad.sum()), margin=float(margin),
        samples=len(S), nonfinite=int((~finite).sum()),
    )


@dataclass
class DerivativeSignResult:
    agreement: float
    zero_derivative: int
    identity_error: float        # max |S |grad F| - eps dF/dt| / (|grad F| |f|)
    normal_deviation: float      # max angle (rad) between mesh and field normals

    @property
    def identity_holds(self) -> bool:
        return self.identity_error <= IDENTITY_TOL


def derivative_sign_check(H: Hypersurface, F: ScalarField, f: VectorField) -> DerivativeSignResult:
    """Fraction of vertices where sign(dF/dt) equals the surface sign eps.

    Vertices with ``dF/dt == 0`` have no sign; they count as disagreement and
    are reported in ``zero_derivative``.  Also checks the identity
    ``S |grad F| = eps dF/dt`` linking the two criteria.
    """
    v = H.vertices
    with np.errstate(all="ignore"):
        g = F.grad(v)
        fv = f(v)
        gnorm = np.linalg.norm(g, axis=1)
        dFdt = np.einsum("ij,ij->i", g, fv)
        N = H.epsilon * g / gnorm[:, None]
        S = np.einsum("ij,ij->i", N, fv)
        scale = gnorm * np.linalg.norm(fv, axis=1)
        resid = np.abs(S * gnorm - H.epsilon * dFdt)
        rel = np.where(scale > 0, resid / np.where(scale > 0, scale, 1.0), resid)
        cos = np.clip(np.einsum("ij,ij->i", N, H.normals), -1.0, 1.0)
    zero = dFdt == 0
    agree = (np.sign(dFdt) == H.epsilon) & ~zero
    rel = rel[np.isfinite(rel)]
    ang = np.arccos(cos[np.isfinite(cos)])
    return DerivativeSignResult(
        agreement=float(agree.mean()),
        zero_derivative=int(zero.sum()),
        identity_error=float(rel.max()) if rel.size else float("nan"),
        normal_deviation=float(ang.max()) if ang.size else float("nan"),
    )


def sequence_is_different(seq) -> tuple[bool, tuple[int, int] | None]:
    """Whether two members of the sequence have different topology signatures.

    This is a finite stand-in for "non-homeomorphic members beyond every
    index": it reports the first pair ``(k, l)``, ``k < l``, that differs.
    Indices are 1-based like the hypersurface labels H_1, H_2, ...
    """
    sigs = [topology_signature(H) for H in seq]
    for k in range(len(sigs)):
        for l in range(k + 1, len(sigs)):
            if sigs[k] != sigs[l]:
                return True, (k + 1, l + 1)
    return False, None


@dataclass
class Verdict:
    kind: str
    theorem: str
    justification: str
    conflict_flag: bool = False
    witnesses: dict = field(default_factory=dict)


def classify_stability(sign_results, different: bool, probe, margin: float,
                       different_pair=None) -> Verdict:
    """Fold the per-level sign results, difference test and probe into a verdict.

    ``probe`` may be ``None`` (no probe run); otherwise anything with a
    ``recurrent`` count.  A violation never yields "unstable": the criteria
    are sufficient only.
    """
    sign_results = list(sign_results)
    failing = [r for r in sign_results if r.violations > 0 or not r.min_S > margin]
    if not sign_results or failing:
        wit = {"violations": [
            {"level": r.level, "min_S": r.min_S, "argmin": list(r.argmin), "count": r.violations}
            for r in failing]}
        why = ("no hypersurfaces" if not sign_results else
               f"{len(failing)} of {len(sign_results)} levels have S <= margin {margin:.3g}")
        return Verdict(INCONCLUSIVE, THEOREMS[INCONCLUSIVE], why, witnesses=wit)

    worst = min(r.min_S for r in sign_results)
    base = f"S > {margin:.3g} on all {len(sign_results)} levels (min {worst:.6g})"
    clean = probe is not None and probe.recurrent == 0
    witnesses = {}
    if probe is not None and probe.recurrent > 0:
        loops = getattr(probe, "witnesses", [])
        if loops:
            witnesses["invariant_set"] = {"seed": list(loops[0][1]), "loop_points": len(loops[0][2])}
    if different:
        if different_pair is not None:
            witnesses["different_pair"] = list(different_pair)
        why = base + "; sequence has non-homeomorphic members"
        if clean:
            why += "; probe found no invariant set either (conflict, topology wins)"
        return Verdict(NOT_ASYMPTOTIC, THEOREMS[NOT_ASYMPTOTIC], why, conflict_flag=clean,
                       witnesses=witnesses)
    if clean:
        return Verdict(ASYMPTOTIC, THEOREMS[ASYMPTOTIC],
                       base + f"; no non-origin invariant set among {probe.seeds} probe seeds",
                       witnesses=witnesses)
    why = base + ("; probe not run" if probe is None
                  else f"; probe found {probe.recurrent} recurrent trajectories")
    return Verdict(STABLE, THEOREMS[STABLE], why, witnesses=witnesses)
