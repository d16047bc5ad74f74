"""Scalar and vector fields on R^2 / R^3 built from expression text."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NonFinite, NotEquilibrium, OriginNotZero
from .expr import Expr, differentiate, evaluate, parse_expression

VARIABLES = {2: ("x", "y"), 3: ("x", "y", "z")}

ORIGIN_TOL = 1e-12
EQUILIBRIUM_TOL = 1e-9


def _check_dim(n):
    if n not in VARIABLES:
        raise ValueError(f"dimension must be 2 or 3, got {n}")


def _stack_eval(funcs, points):
    points = np.asarray(points, dtype=float)
    coords = np.moveaxis(points, -1, 0)
    with np.errstate(all="ignore"):
        cols = [np.broadcast_to(fn(*coords), coords.shape[1:]) for fn in funcs]
    return np.stack(cols, axis=-1).astype(float)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A candidate Lyapunov function F together with its symbolic gradient."""

    n: int
    expr: Expr
    grad_exprs: tuple[Expr, ...]
    text: str = ""
    _fn: object = field(init=False, repr=False)
    _grad_fns: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_fn", self.expr.compile(self.n))
        object.__setattr__(self, "_grad_fns", tuple(g.compile(self.n) for g in self.grad_exprs))

    def value(self, points) -> np.ndarray:
        """F at ``points`` of shape (..., n); non-finite values pass through."""
        return _stack_eval([self._fn], points)[..., 0]

    def grad(self, points) -> np.ndarray:
        """Symbolic gradient at ``points`` of shape (..., n)."""
        return _stack_eval(self._grad_fns, points)

    def scaled(self, c: float) -> "ScalarField":
        return make_scalar_field(f"{c!r}*({self.text})", self.n)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Right-hand side f of the autonomous system dx/dt = f(x)."""

    n: int
    exprs: tuple[Expr, ...]
    texts: tuple[str, ...] = ()
    _fns: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_fns", tuple(e.compile(self.n) for e in self.exprs))

    def __call__(self, points) -> np.ndarray:
        return _stack_eval(self._fns, points)

    def rhs(self, x: np.ndarray) -> np.ndarray:
        """Fast path for a batch of states of shape (m, n)."""
        cols = x.T
        m = x.shape[0]
        out = np.empty_like(x)
        for k, fn in enumerate(self._fns):
            out[:, k] = fn(*cols) if m else 0.0
        return out

    def scaled(self, c: float) -> "VectorField":
        return make_vector_field([f"{c!r}*({t})" for t in self.texts], self.n)

    def reversed(self) -> "VectorField":
        return make_vector_field([f"-({t})" for t in self.texts], self.n)


def make_scalar_field(text: str, n: int) -> ScalarField:
    """Parse F over (x, y) or (x, y, z) and attach its gradient.

    Raises :class:`OriginNotZero` if ``|F(0)| > 1e-12``.
    """
    _check_dim(n)
    e = parse_expression(text, VARIABLES[n])
    value = evaluate(e, np.zeros(n))
    if abs(value) > ORIGIN_TOL:
        raise OriginNotZero(value)
    grads = tuple(differentiate(e, k) for k in range(n))
    return ScalarField(n, e, grads, text)


def make_vector_field(texts: Sequence[str], n: int) -> VectorField:
    _check_dim(n)
    texts = tuple(texts)
    if len(texts) != n:
        raise ValueError(f"expected {n} components, got {len(texts)}")
    exprs = tuple(parse_expression(t, VARIABLES[n]) for t in texts)
    at_origin = [evaluate(e, np.zeros(n)) for e in exprs]
    if max(abs(v) for v in at_origin) > EQUILIBRIUM_TOL:
        raise NotEquilibrium(at_origin)
    return VectorField(n, exprs, texts)


def gradient(F: ScalarField, p) -> np.ndarray:
    """grad F at a single point; raises :class:`NonFinite` on NaN/Inf."""
    p = np.asarray(p, dtype=float)
    if p.shape != (F.n,):
        raise ValueError(f"point must have shape ({F.n},), got {p.shape}")
    g = F.grad(p)
    if not np.all(np.isfinite(g)):
        raise NonFinite(p)
    return g


class SelfCheck(NamedTuple):
    max_rel_error: float
    checked: int
    skipped_small: int
    skipped_nonfinite: int


def gradient_selfcheck(F: ScalarField, points, h: float = 1e-5) -> SelfCheck:
    """Compare the symbolic gradient with central differences.

    Coordinates where both the symbolic and the difference value are below
    1e-8 in magnitude are skipped, as are non-finite samples.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    sym = F.grad(points)
    fd = np.empty_like(sym)
    for k in range(F.n):
        step = np.zeros(F.n)
        step[k] = h
        fd[:, k] = (F.value(points + step) - F.value(points - step)) / (2 * h)
    finite = np.isfinite(sym) & np.isfinite(fd)
    small = finite & (np.abs(sym) < 1e-8) & (np.abs(fd) < 1e-8)
    use = finite & ~small
    if not use.any():
        return SelfCheck(0.0, 0, int(small.sum()), int((~finite).sum()))
    scale = np.maximum(np.abs(sym[use]), np.abs(fd[use]))
    err = np.abs(sym[use] - fd[use]) / scale
    return SelfCheck(float(err.max()), int(use.sum()), int(small.sum()), int((~finite).sum()))
