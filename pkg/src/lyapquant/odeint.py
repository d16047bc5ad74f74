"""Fixed-step RK4 trajectories used as an independent stability oracle.

Escape means leaving the analysis box; convergence means staying within
``conv_eps`` of the origin for 10 consecutive samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import VectorField

CONV_EPS = 1e-4
CONV_COUNT = 10
TAIL_FRACTION = 0.25
TAIL_EPS_REL = 1e-3
# a return only counts after the orbit moved this many tail_eps away
EXCURSION = 4.0

HALTON_BASES = {2: (2, 3), 3: (2, 3, 5)}


@dataclass(frozen=True, eq=False)
class Trajectory:
    seed: np.ndarray
    dt: float
    times: np.ndarray
    states: np.ndarray
    reason: str                 # horizon | converged | escaped | nonfinite

    def write_csv(self, path):
        n = self.states.shape[1]
        with open(path, "w") as fh:
            fh.write("t," + ",".join(f"x{k + 1}" for k in range(n)) + "\n")
            for t, x in zip(self.times, self.states):
                fh.write(",".join(format(float(v), ".17g") for v in (t, *x)) + "\n")


def _box_test(box):
    if box is None:
        return None
    if hasattr(box, "contains"):
        return box.contains
    lower, upper = (np.asarray(b, dtype=float) for b in box)
    return lambda p: np.all((p >= lower) & (p <= upper), axis=-1)


def _step_sizes(dt, T):
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T < dt:
        raise ValueError("horizon T must be >= dt")
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    steps = np.full(nsteps, dt)
    steps[-1] = T - dt * (nsteps - 1)
    return steps


def integrate_many(f: VectorField, seeds, dt: float, T: float, box=None,
                   conv_eps: float = CONV_EPS) -> list[Trajectory]:
    """Integrate every seed with classic RK4; trajectories are independent.

    The last step is shortened so the final sample lands exactly on ``T``.
    Pass ``conv_eps=0`` to disable early termination on convergence.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    m, n = seeds.shape
    steps = _step_sizes(dt, T)
    inside = _box_test(box)
    states = np.full((len(steps) + 1, m, n), np.nan)
    states[0] = seeds
    length = np.full(m, len(steps) + 1)
    reason = np.array(["horizon"] * m, dtype=object)
    near = np.zeros(m, dtype=np.int64)
    active = np.arange(m)
    x = seeds.copy()
    rhs = f.rhs
    with np.errstate(all="ignore"):
        for k, h in enumerate(steps):
            if active.size == 0:
                break
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h * k2)
            k4 = rhs(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            states[k + 1, active] = x
            stop = np.zeros(len(active), dtype=bool)
            bad = ~np.all(np.isfinite(x), axis=1)
            if bad.any():
                reason[active[bad]] = "nonfinite"
                stop |= bad
            if inside is not None:
                out = ~bad & ~inside(x)
                reason[active[out]] = "escaped"
                stop |= out
            if conv_eps > 0:
                small = np.linalg.norm(x, axis=1) < conv_eps
                near[active] = np.where(small, near[active] + 1, 0)
                done = ~stop & (near[active] >= CONV_COUNT)
                reason[active[done]] = "converged"
                stop |= done
            if stop.any():
                length[active[stop]] = k + 2
                active = active[~stop]
                x = x[~stop]
    times = np.concatenate([[0.0], np.cumsum(steps)])
    return [Trajectory(seeds[i], dt, times[:length[i]].copy(), states[:length[i], i].copy(), reason[i])
            for i in range(m)]


def integrate(f: VectorField, x0, dt: float, T: float, box=None,
              conv_eps: float = CONV_EPS) -> Trajectory:
    """Integrate a single trajectory; see :func:`integrate_many`."""
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    return integrate_many(f, x0[None, :], dt, T, box, conv_eps)[0]


# -- containment / convergence oracles -------------------------------------------------

@dataclass
class ContainmentResult:
    seeds: int
    violations: int
    witnesses: list = field(default_factory=list)    # (seed index, start, exit point, exit time)


def _seed_vertices(H, seeds):
    m = len(H.vertices)
    idx = (np.arange(seeds) * m) // seeds
    return H.vertices[idx] + 1e-3 * H.diameter * H.normals[idx]


def _first_outside(H, trajectories, tol=0.0):
    """Index of the first sample outside K (by more than ``tol``) per trajectory, or -1."""
    pts = np.concatenate([t.states for t in trajectories])
    owner = np.repeat(np.arange(len(trajectories)), [len(t.states) for t in trajectories])
    finite = np.all(np.isfinite(pts), axis=1)
    inside = np.zeros(len(pts), dtype=bool)
    inside[finite] = H.contains(pts[finite])
    if tol > 0:
        check = np.nonzero(finite & ~inside)[0]
        inside[check] = H.distance(pts[check], cutoff=tol) <= tol
    starts = np.concatenate([[0], np.cumsum([len(t.states) for t in trajectories])[:-1]])
    first = np.full(len(trajectories), -1)
    bad = np.nonzero(~inside)[0]
    if bad.size:
        o, pos = np.unique(owner[bad], return_index=True)
        first[o] = bad[pos] - starts[o]
    return first


def containment_check(f: VectorField, H, seeds: int = 200, dt: float = 0.01,
                      T: float = 50.0, box=None, exit_tol: float | None = None) -> ContainmentResult:
    """Count trajectories started just inside H that ever leave K.

    Seeds are vertices picked evenly by index, moved ``1e-3 * diameter``
    along the inward normal.  A sample outside the mesh region only counts
    as an exit when it is farther than ``exit_tol`` from the mesh; the
    default ``2 * H.chord_error`` absorbs the gap between the polygonal K
    and the true level set, which matters for flows nearly tangent to H.
    """
    if seeds < 1:
        raise ValueError("seeds >= 1 required")
    start = _seed_vertices(H, seeds)
    trajs = integrate_many(f, start, dt, T, box)
    tol = 2.0 * getattr(H, "chord_error", 0.0) if exit_tol is None else exit_tol
    first = _first_outside(H, trajs, tol)
    witnesses = [(i, tuple(start[i]), tuple(trajs[i].states[k]), float(trajs[i].times[k]))
                 for i, k in enumerate(first) if k >= 0]
    return ContainmentResult(seeds, len(witnesses), witnesses)


def convergence_check(f: VectorField, seq, seeds: int = 100, dt: float = 0.01,
                      T: float = 50.0, box=None) -> float:
    """Fraction of trajectories from the outermost surface that reach the innermost region."""
    if len(seq) < 2:
        raise ValueError("sequence with at least 2 levels required")
    outer, inner = seq[0], seq[-1]
    trajs = integrate_many(f, _seed_vertices(outer, seeds), dt, T, box)
    reached = 0
    for t in trajs:
        pts = t.states[np.all(np.isfinite(t.states), axis=1)]
        if inner.contains(pts).any():
            reached += 1
    return reached / seeds


# -- invariant-set probe ------------------------------------------------------------------

def radical_inverse(i: int, base: int) -> float:
    inv, denom = 0.0, 1.0
    while i > 0:
        denom *= base
        i, digit = divmod(i, base)
        inv += digit / denom
    return inv


def halton_ball(count: int, radius: float, n: int) -> np.ndarray:
    """First ``count`` Halton points (index 1, 2, ...) mapped to the box
    ``[-radius, radius]^n`` and kept if they fall in the closed ball."""
    bases = HALTON_BASES[n]
    out = []
    i = 1
    while len(out) < count:
        p = np.array([radical_inverse(i, b) for b in bases])
        q = radius * (2.0 * p - 1.0)
        if np.linalg.norm(q) <= radius:
            out.append(q)
        i += 1
    return np.array(out)


@dataclass
class InvariantSetProbeResult:
    radius: float
    seeds: int
    converged: int
    escaped: int
    recurrent: int
    undecided: int
    classes: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)   # (seed index, seed, loop states)

    @property
    def found_invariant_set(self) -> bool:
        return self.recurrent > 0


def _segment_distances(p, pts):
    a, b = pts[:-1], pts[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip(np.nan_to_num(np.einsum("ij,ij->i", p - a, ab) / denom), 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)


def classify_tail(traj: Trajectory, tail_eps: float, conv_eps: float = CONV_EPS):
    """Return ``(class, loop)`` for one trajectory.

    A horizon-terminated trajectory is ``recurrent`` when its final state
    comes back within ``tail_eps`` of an earlier part of the tail after an
    excursion, or when the whole tail sits within ``tail_eps`` of a point
    away from the origin.  Tails whose minimum norm still drops by more than
    ``tail_eps`` between the first and second half are left ``undecided``.
    """
    if traj.reason == "converged":
        return "converged", None
    if traj.reason in ("escaped", "nonfinite"):
        return "escaped", None
    states = traj.states
    norms = np.linalg.norm(states, axis=1)
    if norms.min() < conv_eps:
        return "undecided", None
    tail = states[int(len(states) * (1 - TAIL_FRACTION)):]
    if len(tail) < 4:
        return "undecided", None
    half = len(tail) // 2
    tnorm = norms[-len(tail):]
    if tnorm[:half].min() - tnorm[half:].min() > tail_eps:
        return "undecided", None
    end = tail[-1]
    spread = np.linalg.norm(tail - end, axis=1)
    if spread.max() < tail_eps:
        return "recurrent", tail
    far = np.nonzero(spread > EXCURSION * tail_eps)[0]
    if far.size == 0:
        return "undecided", None
    last_far = far[-1]
    d = _segment_distances(end, tail[:last_far + 1])
    hits = np.nonzero(d < tail_eps)[0]
    if hits.size == 0:
        return "undecided", None
    return "recurrent", tail[hits[-1]:]


def invariant_set_probe(f: VectorField, radius: float, seeds: int = 64, dt: float = 0.01,
                        T: float = 100.0, box=None, conv_eps: float = CONV_EPS) -> InvariantSetProbeResult:
    """Look for a non-origin invariant set among trajectories from a ball.

    Seeds are the first Halton points (bases 2, 3[, 5]) inside the ball.
    """
    if seeds < 16:
        raise ValueError("seeds >= 16 required")
    if box is not None and hasattr(box, "contains_ball") and not box.contains_ball(radius):
        raise ValueError("probe ball must lie inside the analysis box")
    start = halton_ball(seeds, radius, f.n)
    trajs = integrate_many(f, start, dt, T, box, conv_eps)
    tail_eps = TAIL_EPS_REL * radius
    counts = {"converged": 0, "escaped": 0, "recurrent": 0, "undecided": 0}
    classes, witnesses = [], []
    for i, t in enumerate(trajs):
        cls, loop = classify_tail(t, tail_eps, conv_eps)
        counts[cls] += 1
        classes.append(cls)
        if loop is not None:
            witnesses.append((i, tuple(start[i]), loop))
    return InvariantSetProbeResult(radius, seeds, classes=classes, witnesses=witnesses, **counts)


def basin_radius_along_ray(f: VectorField, direction, lo: float, hi: float, dt: float,
                           T: float, box=None, tol: float = 1e-3) -> float:
    """Bisect the distance along ``direction`` where trajectories stop converging.

    ``lo`` must converge and ``hi`` must not.
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)

    def converges(r):
        return integrate(f, r * direction, dt, T, box).reason == "converged"

    if not converges(lo) or converges(hi):
        raise ValueError("bisection bracket does not straddle the basin boundary")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if converges(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
