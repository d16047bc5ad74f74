from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from ..errors import ConfigError
from ..levelset.grid import Grid

MAX_RESOLUTION = 1024


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything needed to run the pipeline once.

    ``margin=None`` selects ``1e-9 * max |f|`` on the outermost surface.
    ``max_level`` optionally caps the first rung of the level ladder.
    """

    f_texts: tuple[str, ...]
    lyapunov: str
    dim: int = 2
    system: str | None = None
    lower: tuple[float, ...] = (-2.0, -2.0)
    upper: tuple[float, ...] = (2.0, 2.0)
    resolution: int = 256
    levels: int = 8
    ratio: float = 0.5
    max_level: float | None = None
    margin: float | None = None
    sample_midpoints: bool = False
    dt: float = 0.01
    horizon: float = 50.0
    probe_radius: float = 1.0
    probe_seeds: int = 64
    probe_horizon: float | None = None      # defaults to 2 * horizon
    containment_seeds: int = 200
    convergence_seeds: int = 100
    plot_trajectories: int = 5
    definiteness_samples: int = 10000

    def __post_init__(self):
        object.__setattr__(self, "f_texts", tuple(self.f_texts))
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))

    def validate(self) -> "AnalysisConfig":
        if self.dim not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {self.dim}")
        if len(self.f_texts) != self.dim:
            raise ConfigError(f"need {self.dim} vector-field components, got {len(self.f_texts)}")
        if len(self.lower) != self.dim or len(self.upper) != self.dim:
            raise ConfigError("box dimension does not match --dim")
        if not 16 <= self.resolution <= MAX_RESOLUTION:
            raise ConfigError(f"resolution must lie in [16, {MAX_RESOLUTION}], got {self.resolution}")
        if self.levels < 2:
            raise ConfigError("at least 2 levels required")
        if not 0 < self.ratio < 1:
            raise ConfigError("ratio must lie in (0, 1)")
        for name in ("dt", "horizon", "probe_radius"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("max_level", "margin", "probe_horizon"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        if self.horizon < self.dt:
            raise ConfigError("horizon must be >= dt")
        if self.probe_seeds < 16:
            raise ConfigError("probe needs >= 16 seeds")
        if min(self.containment_seeds, self.convergence_seeds) < 1:
            raise ConfigError("seed counts must be >= 1")
        try:
            g = self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not g.contains_ball(self.probe_radius):
            raise ConfigError(f"probe ball of radius {self.probe_radius} leaves the box")
        return self

    def grid(self) -> Grid:
        return Grid(self.lower, self.upper, self.resolution)

    @property
    def probe_T(self) -> float:
        return self.probe_horizon if self.probe_horizon is not None else 2.0 * self.horizon

    def with_(self, **changes) -> "AnalysisConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["f_texts"] = list(self.f_texts)
        d["lower"] = list(self.lower)
        d["upper"] = list(self.upper)
        return d
