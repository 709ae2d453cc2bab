"""Run configuration: dataclass sections loaded from JSON or YAML.

Keys mirror the dataclass field names. Missing keys take the defaults below, unknown keys are
rejected, and every error names the offending field (``grid.nx``, ``filter.sigma_blur``, ...).
"""

import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal, Union, get_args, get_origin

import numpy as np
import yaml

from firefilter.field.geometry import ignition_field
from firefilter.utils.custom_exceptions import ConfigError, DegenerateFrontError
from firefilter.utils.models import (
    CircleIgnition,
    FilterConfig,
    Grid,
    PolygonIgnition,
    RosParams,
    RosPrior,
    SolverConfig,
    WindSample,
    WindSeries,
)

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_BETA = 0.02
DEFAULT_SIGMA_GAMMA = 0.03


@dataclass(frozen=True)
class SyntheticConfig:
    """Settings of the synthetic-truth generator."""

    wind_speed: float = 1.0
    wind_dir_deg: float = 0.0
    gust_sigma: float = 0.0
    obs_jitter: float = 0.0
    process_noise: float = 0.0

    def __post_init__(self) -> None:
        if self.wind_speed < 0:
            raise ValueError("wind_speed must be >= 0")
        if self.gust_sigma < 0 or self.obs_jitter < 0 or self.process_noise < 0:
            raise ValueError("gust_sigma, obs_jitter and process_noise must be >= 0")


def _default_grid() -> Grid:
    return Grid(nx=200, ny=200, dx=0.25, dy=0.25)


def _default_prior(params: RosParams) -> RosPrior:
    return RosPrior(params.beta, DEFAULT_SIGMA_BETA, params.gamma, DEFAULT_SIGMA_GAMMA)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides its input files."""

    grid: Grid = field(default_factory=_default_grid)
    ignition: Union[CircleIgnition, PolygonIgnition] = CircleIgnition((12.5, 25.0), 2.0)
    params: RosParams = RosParams(0.1, 0.15)
    prior: RosPrior = field(default_factory=lambda: _default_prior(RosParams(0.1, 0.15)))
    solver: SolverConfig = field(default_factory=SolverConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    seed: int = 0
    t_end: float = 90.0
    obs_interval: float = 10.0

    def __post_init__(self) -> None:
        if not self.obs_interval > 0:
            raise ConfigError("obs_interval", f"must be > 0, got {self.obs_interval}")
        # t_end = 0 is the "initial front only" run
        if self.t_end != 0 and not self.t_end >= self.obs_interval:
            raise ConfigError("t_end", f"must be 0 or >= obs_interval ({self.obs_interval}), got {self.t_end}")

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)

    def output_times(self) -> list[float]:
        """The regular output schedule: every ``obs_interval`` up to ``t_end``."""
        count = int(math.floor(self.t_end / self.obs_interval + 1e-9))
        return [k * self.obs_interval for k in range(1, count + 1)]

    def to_dict(self) -> dict[str, Any]:
        """Fully resolved configuration, in the same shape ``load_config`` reads."""
        if isinstance(self.ignition, CircleIgnition):
            ignition: dict[str, Any] = {"center": list(self.ignition.center), "radius": self.ignition.radius}
        else:
            ignition = {"polygon": self.ignition.polygon.tolist()}
        return {
            "grid": {**_section_dict(self.grid), "origin": list(self.grid.origin)},
            "ignition": ignition,
            "params": _section_dict(self.params),
            "prior": _section_dict(self.prior),
            "solver": _section_dict(self.solver),
            "filter": _section_dict(self.filter),
            "synthetic": _section_dict(self.synthetic),
            "seed": self.seed,
            "t_end": self.t_end,
            "obs_interval": self.obs_interval,
        }


def _section_dict(section: Any) -> dict[str, Any]:
    return {f.name: getattr(section, f.name) for f in fields(section) if f.init}


def _coerce(value: Any, kind: Any, name: str) -> Any:
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected true or false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(name, f"expected a finite number, got {value!r}")
        return float(value)
    if get_origin(kind) is Literal:
        if value not in get_args(kind):
            raise ConfigError(name, f"expected one of {list(get_args(kind))}, got {value!r}")
        return value
    if get_origin(kind) is tuple:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(name, f"expected a pair of numbers, got {value!r}")
        return (_coerce(value[0], float, name), _coerce(value[1], float, name))
    raise ConfigError(name, f"unsupported field type {kind}")


def _build_section(cls: type, data: Any, name: str, defaults: dict[str, Any]) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(name, f"expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls) if f.init}
    values = dict(defaults)
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{name}.{key}", "unknown key")
        values[key] = _coerce(value, known[key].type, f"{name}.{key}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(name, str(e)) from e


def _build_ignition(data: Any) -> Union[CircleIgnition, PolygonIgnition]:
    if not isinstance(data, dict):
        raise ConfigError("ignition", "expected a mapping")
    unknown = set(data) - {"center", "radius", "polygon"}
    if unknown:
        raise ConfigError(f"ignition.{sorted(unknown)[0]}", "unknown key")
    if "polygon" in data:
        if "center" in data or "radius" in data:
            raise ConfigError("ignition", "give either polygon or center/radius, not both")
        polygon = data["polygon"]
        try:
            vertices = np.array(polygon, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise ConfigError("ignition.polygon", "expected a list of [x, y] pairs") from e
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
            raise ConfigError("ignition.polygon", "needs at least 3 [x, y] vertices")
        if not np.all(np.isfinite(vertices)):
            raise ConfigError("ignition.polygon", "vertices must be finite")
        return PolygonIgnition(vertices)
    default = CircleIgnition((12.5, 25.0), 2.0)
    center = _coerce(data.get("center", list(default.center)), tuple[float, float], "ignition.center")
    radius = _coerce(data.get("radius", default.radius), float, "ignition.radius")
    if radius <= 0:
        raise ConfigError("ignition.radius", f"must be > 0, got {radius}")
    return CircleIgnition(center, radius)


def config_from_dict(data: dict[str, Any]) -> RunConfig:
    """Builds a RunConfig from a parsed mapping, filling defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    base = RunConfig()
    allowed = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in allowed:
            raise ConfigError(key, "unknown key")

    grid = _build_section(Grid, data.get("grid", {}), "grid", _section_dict(base.grid))
    params = _build_section(RosParams, data.get("params", {}), "params", _section_dict(base.params))
    prior = _build_section(RosPrior, data.get("prior", {}), "prior", _section_dict(_default_prior(params)))
    solver = _build_section(SolverConfig, data.get("solver", {}), "solver", _section_dict(base.solver))
    settings = _build_section(FilterConfig, data.get("filter", {}), "filter", _section_dict(base.filter))
    synthetic = _build_section(SyntheticConfig, data.get("synthetic", {}), "synthetic", _section_dict(base.synthetic))
    ignition = _build_ignition(data["ignition"]) if "ignition" in data else base.ignition
    try:
        ignition_field(grid, ignition)
    except DegenerateFrontError as e:
        raise ConfigError("ignition", str(e)) from e

    return RunConfig(
        grid=grid,
        ignition=ignition,
        params=params,
        prior=prior,
        solver=solver,
        filter=settings,
        synthetic=synthetic,
        seed=_coerce(data.get("seed", base.seed), int, "seed"),
        t_end=_coerce(data.get("t_end", base.t_end), float, "t_end"),
        obs_interval=_coerce(data.get("obs_interval", base.obs_interval), float, "obs_interval"),
    )


def load_config(path: Union[str, Path]) -> RunConfig:
    """Reads a run configuration from a JSON (.json) or YAML (.yml, .yaml) file."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise ConfigError("config", f"{path.name} is not valid UTF-8: {e.reason} at byte {e.start}") from e
    try:
        if path.suffix.lower() in (".yml", ".yaml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError("config", f"cannot parse {path.name}: {e}") from e
    config = config_from_dict(data if data is not None else {})
    logger.debug(f"Loaded config from {path}: seed={config.seed}, t_end={config.t_end}")
    return config


def synthetic_wind_series(config: RunConfig, rng: np.random.Generator) -> WindSeries:
    """Per-second wind samples over [0, t_end]; gusts perturb the speed, the direction is fixed."""
    synthetic = config.synthetic
    theta = math.radians(synthetic.wind_dir_deg)
    samples = []
    for t in range(int(math.ceil(config.t_end)) + 1):
        speed = synthetic.wind_speed
        if synthetic.gust_sigma > 0:
            speed = max(0.0, speed + synthetic.gust_sigma * float(rng.standard_normal()))
        samples.append(WindSample(float(t), speed * math.cos(theta), speed * math.sin(theta)))
    return WindSeries(tuple(samples))
