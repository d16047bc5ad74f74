from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MIN_RESOLUTION = 16


@dataclass(frozen=True)
class Grid:
    """Axis-aligned analysis box sampled with ``resolution[k]`` cells per axis."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        res = tuple(int(r) for r in np.broadcast_to(self.resolution, (len(lower),)))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "resolution", res)
        if len(lower) not in (2, 3) or len(upper) != len(lower):
            raise ValueError("grid must be 2- or 3-dimensional")
        if not all(lo < 0.0 < hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"origin must lie strictly inside the box {lower}..{upper}")
        if min(res) < MIN_RESOLUTION:
            raise ValueError(f"resolution must be >= {MIN_RESOLUTION} per axis, got {res}")

    @classmethod
    def cube(cls, half_width: float, resolution: int, n: int) -> "Grid":
        return cls((-half_width,) * n, (half_width,) * n, (resolution,) * n)

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / np.array(self.resolution)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, r + 1) for lo, hi, r in zip(self.lower, self.upper, self.resolution)]

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape (r0+1, r1+1[, r2+1], n)."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def contains(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)

    def contains_ball(self, radius: float) -> bool:
        return all(lo < -radius and radius < hi for lo, hi in zip(self.lower, self.upper))

    def boundary_mask(self) -> np.ndarray:
        shape = tuple(r + 1 for r in self.resolution)
        mask = np.zeros(shape, dtype=bool)
        for axis in range(self.n):
            index = [slice(None)] * self.n
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask


@dataclass(frozen=True)
class SampledField:
    """F and |grad F| evaluated once on every grid node."""

    values: np.ndarray
    grad_norm_max: float


@lru_cache(maxsize=16)
def sample(F, grid: Grid) -> SampledField:
    nodes = grid.nodes()
    values = F.value(nodes)
    gnorm = np.linalg.norm(F.grad(nodes), axis=-1)
    finite = gnorm[np.isfinite(gnorm)]
    values.setflags(write=False)
    return SampledField(values, float(finite.max()) if finite.size else 0.0)
