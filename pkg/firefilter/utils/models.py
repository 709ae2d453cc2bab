from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import numpy as np

from firefilter.utils.custom_exceptions import GridMismatchError


def _frozen_array(values: np.ndarray, dtype: type = np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid:
    """Regular cell lattice; ``origin`` is the world position of the centre of cell (0, 0)."""

    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs at least 4x4 cells, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError(f"cell sizes must be positive, got dx={self.dx}, dy={self.dy}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return self.ny, self.nx

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the cell centres."""
        x0, y0 = self.origin
        return x0, y0, x0 + (self.nx - 1) * self.dx, y0 + (self.ny - 1) * self.dy

    def index_to_world(self, i: int, j: int) -> tuple[float, float]:
        """Row ``i`` and column ``j`` to the (x, y) of the cell centre."""
        return self.origin[0] + j * self.dx, self.origin[1] + i * self.dy

    def world_to_index(self, x: float, y: float) -> tuple[int, int]:
        """Nearest cell (row, column) for a world point inside the lattice."""
        j = int(round((x - self.origin[0]) / self.dx))
        i = int(round((y - self.origin[1]) / self.dy))
        if not (0 <= i < self.ny and 0 <= j < self.nx):
            raise ValueError(f"point ({x}, {y}) lies outside the grid")
        return i, j

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinate arrays (X, Y), each of shape (ny, nx)."""
        xs = self.origin[0] + np.arange(self.nx) * self.dx
        ys = self.origin[1] + np.arange(self.ny) * self.dy
        return np.meshgrid(xs, ys)

    def check_same(self, other: "Grid") -> None:
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real value per cell, row-major (ny, nx)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen_array(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class LevelSetField:
    """phi at a time; negative inside the burned region, positive outside, zero on the front."""

    field: ScalarField
    time: float

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray, time: float) -> "LevelSetField":
        return cls(ScalarField(grid, values), float(time))

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> "LevelSetField":
        return LevelSetField.from_values(self.grid, values, self.time if time is None else time)


@dataclass(frozen=True, eq=False)
class FrontContour:
    """Closed polygons in world metres; closure is implicit (last vertex is not repeated)."""

    polylines: tuple[np.ndarray, ...]
    time: float

    def __post_init__(self) -> None:
        polygons = []
        for polygon in self.polylines:
            array = _frozen_array(polygon)
            if array.ndim != 2 or array.shape[1] != 2:
                raise ValueError(f"polygon vertices must be (k, 2), got {array.shape}")
            if len(array) < 3:
                raise ValueError(f"polygon needs at least 3 vertices, got {len(array)}")
            polygons.append(array)
        object.__setattr__(self, "polylines", tuple(polygons))

    @property
    def is_empty(self) -> bool:
        return len(self.polylines) == 0

    def vertices(self) -> np.ndarray:
        if self.is_empty:
            return np.empty((0, 2))
        return np.concatenate(self.polylines)


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Pixel intensities in [0, 1] on a grid."""

    grid: Grid
    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.array(self.pixels, dtype=np.float64)
        if pixels.shape != self.grid.shape:
            raise ValueError(f"image shape {pixels.shape} does not match grid {self.grid.shape}")
        if pixels.size and (pixels.min() < -1e-12 or pixels.max() > 1 + 1e-12):
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", _frozen_array(np.clip(pixels, 0.0, 1.0)))


@dataclass(frozen=True)
class RosParams:
    """Rate-of-spread parameters: s = beta + gamma * wind_normal."""

    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.beta) and np.isfinite(self.gamma)):
            raise ValueError(f"non-finite ROS parameters ({self.beta}, {self.gamma})")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.gamma])


@dataclass(frozen=True)
class RosPrior:
    """Independent Gaussian priors on beta and gamma."""

    mu_beta: float
    sigma_beta: float
    mu_gamma: float
    sigma_gamma: float

    def __post_init__(self) -> None:
        if self.sigma_beta < 0 or self.sigma_gamma < 0:
            raise ValueError("prior standard deviations must be >= 0")

    @property
    def mean(self) -> RosParams:
        return RosParams(max(0.0, self.mu_beta), self.mu_gamma)


@dataclass(frozen=True)
class WindSample:
    """Wind vector the air blows toward, in world axes (m/s)."""

    time: float
    wx: float
    wy: float

    def __post_init__(self) -> None:
        if self.time < 0 or not np.isfinite(self.time):
            raise ValueError(f"wind sample time must be finite and >= 0, got {self.time}")
        if not (np.isfinite(self.wx) and np.isfinite(self.wy)):
            raise ValueError(f"non-finite wind at t={self.time}")


@dataclass(frozen=True)
class WindSeries:
    """Time-ordered wind samples, strictly increasing times."""

    samples: tuple[WindSample, ...]
    times: np.ndarray = field(init=False, repr=False, compare=False)
    vectors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        if not samples:
            raise ValueError("wind series is empty")
        times = np.array([s.time for s in samples])
        if np.any(np.diff(times) <= 0):
            raise ValueError("wind sample times must be strictly increasing")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "times", _frozen_array(times))
        object.__setattr__(self, "vectors", _frozen_array(np.array([[s.wx, s.wy] for s in samples])))

    @classmethod
    def constant(cls, wx: float, wy: float) -> "WindSeries":
        return cls((WindSample(0.0, wx, wy),))


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the level-set integrator."""

    cfl: float = 0.5
    eno_order: int = 2
    reinit_every: int = 10
    reinit_iterations: int = 10
    noise_sigma: float = 0.0
    boundary: Literal["extrapolate"] = "extrapolate"
    clamp_upwind: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.eno_order not in (1, 2):
            raise ValueError(f"eno_order must be 1 or 2, got {self.eno_order}")
        if self.reinit_every < 0:
            raise ValueError("reinit_every must be >= 0")
        if self.reinit_every > 0 and self.reinit_iterations < 1:
            raise ValueError("reinit_iterations must be >= 1 when reinit_every > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.boundary != "extrapolate":
            raise ValueError(f"unsupported boundary condition {self.boundary!r}")


@dataclass(frozen=True)
class FilterConfig:
    """Assimilation settings shared by the particle filter and the EnKF."""

    n_particles: int = 100
    n_members: int = 10
    sigma_blur: float = 2.0
    resample_always: bool = True
    q_beta: float = 1e-5
    q_gamma: float = 1e-4
    r_scale: float = 0.05
    downsample: int = 4
    n_member_contours: int = 20

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.n_members < 2:
            raise ValueError("n_members must be >= 2")
        if self.sigma_blur <= 0:
            raise ValueError("sigma_blur must be > 0")
        if self.q_beta < 0 or self.q_gamma < 0 or self.r_scale < 0:
            raise ValueError("q_beta, q_gamma and r_scale must be >= 0")
        if self.downsample < 1:
            raise ValueError("downsample must be >= 1")
        if self.n_member_contours < 0:
            raise ValueError("n_member_contours must be >= 0")


@dataclass(frozen=True)
class CircleIgnition:
    """Circular initial fire perimeter."""

    center: tuple[float, float]
    radius: float


@dataclass(frozen=True, eq=False)
class PolygonIgnition:
    """Polygonal initial fire perimeter."""

    polygon: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "polygon", _frozen_array(self.polygon))


Ignition = Union[CircleIgnition, PolygonIgnition, FrontContour]


@dataclass(frozen=True, eq=False)
class Particle:
    """One particle: a level-set field with its own ROS parameters and importance weight."""

    phi: LevelSetField
    params: RosParams
    weight: float


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Particles sharing one grid and one time; ``cycle`` keys the random substreams."""

    particles: tuple[Particle, ...]
    time: float
    rng_seed: int
    cycle: int = 0

    def __post_init__(self) -> None:
        particles = tuple(self.particles)
        if not particles:
            raise ValueError("particle set is empty")
        grid = particles[0].phi.grid
        for p in particles:
            grid.check_same(p.phi.grid)
            if p.phi.time != self.time:
                raise ValueError(f"particle time {p.phi.time} differs from set time {self.time}")
        object.__setattr__(self, "particles", particles)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.particles])

    @property
    def params_matrix(self) -> np.ndarray:
        """(n, 2) array of (beta, gamma)."""
        return np.array([p.params.as_array() for p in self.particles])

    @property
    def fields(self) -> list[LevelSetField]:
        return [p.phi for p in self.particles]

    def __len__(self) -> int:
        return len(self.particles)


@dataclass(frozen=True)
class EnkfEnsemble:
    """EnKF members over (beta, gamma) with random-walk and observation noise settings."""

    members: tuple[RosParams, ...]
    q_beta: float
    q_gamma: float
    r_scale: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 2:
            raise ValueError(f"an EnKF needs at least 2 members, got {len(self.members)}")
        if self.q_beta < 0 or self.q_gamma < 0 or self.r_scale < 0:
            raise ValueError("noise variances must be >= 0")

    @property
    def states(self) -> np.ndarray:
        """(2, n) state matrix, one column per member."""
        return np.array([m.as_array() for m in self.members]).T


@dataclass(frozen=True)
class Observation:
    """An observed fire front."""

    time: float
    front: FrontContour


@dataclass(frozen=True, eq=False)
class FrontRecord:
    """A tagged set of front polygons as written to fronts JSON files."""

    time: float
    polygons: tuple[np.ndarray, ...]
    tag: str

    @classmethod
    def from_contour(cls, contour: FrontContour, tag: str) -> "FrontRecord":
        return cls(contour.time, contour.polylines, tag)


@dataclass
class CycleRecord:
    """State of a filter at one recorded time."""

    time: float
    has_observation: bool
    forecast: FrontContour
    analysis: FrontContour
    members: list[FrontContour]
    variance: ScalarField
    params: np.ndarray
    weights: np.ndarray
    ess: float
    resampled: bool = False
    degenerate: bool = False
    skipped: bool = False
    ensemble_mean: Optional[FrontContour] = None


@dataclass
class FilterOutput:
    """Everything a filter run records, in time order."""

    kind: Literal["pf", "enkf"]
    cycles: list[CycleRecord] = field(default_factory=list)
    initial: Optional[FrontContour] = None
    steps: int = 0
    reinitializations: int = 0

    @property
    def final_params(self) -> np.ndarray:
        """Weighted mean (beta, gamma) at the last recorded cycle."""
        if not self.cycles:
            raise ValueError("no cycles recorded")
        last = self.cycles[-1]
        return np.average(last.params, axis=0, weights=last.weights)

    @property
    def flags(self) -> dict[str, list[float]]:
        return {
            "degenerate": [c.time for c in self.cycles if c.degenerate],
            "skipped_update": [c.time for c in self.cycles if c.skipped],
        }
