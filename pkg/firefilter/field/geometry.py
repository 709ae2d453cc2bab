import logging
from typing import Sequence

import numpy as np

from firefilter.utils.custom_exceptions import DegenerateFrontError
from firefilter.utils.models import CircleIgnition, Grid, Ignition, LevelSetField, PolygonIgnition

logger = logging.getLogger(__name__)


def signed_distance_circle(grid: Grid, center: tuple[float, float], radius: float, time: float = 0.0) -> LevelSetField:
    """Signed distance to a circle: ``|p - center| - radius``, negative inside."""
    if radius <= 0:
        raise DegenerateFrontError(f"circle radius must be positive, got {radius}")
    cx, cy = center
    xmin, ymin, xmax, ymax = grid.bounds
    nearest = np.hypot(cx - np.clip(cx, xmin, xmax), cy - np.clip(cy, ymin, ymax))
    farthest = max(np.hypot(cx - x, cy - y) for x in (xmin, xmax) for y in (ymin, ymax))
    if nearest >= radius:
        raise DegenerateFrontError(f"circle at ({cx}, {cy}) r={radius} lies entirely outside the grid")
    if farthest <= radius:
        raise DegenerateFrontError(f"circle at ({cx}, {cy}) r={radius} covers the whole grid")

    X, Y = grid.cell_centers()
    return LevelSetField.from_values(grid, np.hypot(X - cx, Y - cy) - radius, time)


def points_in_polygons(x: np.ndarray, y: np.ndarray, polygons: Sequence[np.ndarray]) -> np.ndarray:
    """Even-odd inside test of points against a set of polygons (nested polygons make holes)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    inside = np.zeros(x.shape, dtype=bool)
    for polygon in polygons:
        poly = np.asarray(polygon, dtype=np.float64)
        lo, hi = poly.min(axis=0), poly.max(axis=0)
        box = (x >= lo[0]) & (x <= hi[0]) & (y >= lo[1]) & (y <= hi[1])
        if not box.any():
            continue
        px, py = x[box], y[box]
        crossings = np.zeros(px.shape, dtype=bool)
        for (xa, ya), (xb, yb) in zip(poly, np.roll(poly, -1, axis=0)):
            if ya == yb:
                continue
            straddles = (ya > py) != (yb > py)
            x_cross = xa + (py - ya) * (xb - xa) / (yb - ya)
            crossings ^= straddles & (px < x_cross)
        inside[box] ^= crossings
    return inside


def _distance_to_segments(X: np.ndarray, Y: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    best = np.full(X.shape, np.inf)
    for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
        ab = b - a
        length2 = float(ab @ ab)
        if length2 == 0.0:
            t = np.zeros(X.shape)
        else:
            t = np.clip(((X - a[0]) * ab[0] + (Y - a[1]) * ab[1]) / length2, 0.0, 1.0)
        best = np.minimum(best, np.hypot(X - (a[0] + t * ab[0]), Y - (a[1] + t * ab[1])))
    return best


def signed_distance_polygons(grid: Grid, polygons: Sequence[np.ndarray], time: float = 0.0) -> LevelSetField:
    """Signed distance to the union of closed polygon boundaries, negative inside (even-odd rule)."""
    rings = [np.asarray(p, dtype=np.float64) for p in polygons]
    if not rings:
        raise DegenerateFrontError("no polygons given")
    for ring in rings:
        if ring.ndim != 2 or ring.shape[1] != 2 or len(ring) < 3:
            raise DegenerateFrontError("a polygon needs at least 3 (x, y) vertices")
    X, Y = grid.cell_centers()
    distance = np.minimum.reduce([_distance_to_segments(X, Y, ring) for ring in rings])
    inside = points_in_polygons(X, Y, rings)
    if not inside.any() or inside.all():
        raise DegenerateFrontError("polygon front does not cross the grid interior")
    logger.debug(f"Built signed distance for {len(rings)} polygon(s)")
    return LevelSetField.from_values(grid, np.where(inside, -distance, distance), time)


def signed_distance_polygon(grid: Grid, polygon: np.ndarray, time: float = 0.0) -> LevelSetField:
    return signed_distance_polygons(grid, [polygon], time)


def ignition_field(grid: Grid, ignition: Ignition, time: float = 0.0) -> LevelSetField:
    """Initial level-set field for a circle, a polygon or a mapped front."""
    if isinstance(ignition, CircleIgnition):
        return signed_distance_circle(grid, ignition.center, ignition.radius, time)
    if isinstance(ignition, PolygonIgnition):
        return signed_distance_polygon(grid, ignition.polygon, time)
    if ignition.is_empty:
        raise DegenerateFrontError("ignition front has no polygons")
    return signed_distance_polygons(grid, ignition.polylines, time)
