"""Agreement measures between a predicted and an observed fire front."""

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from firefilter.field.geometry import points_in_polygons
from firefilter.utils.models import FrontContour, Grid, RasterImage


def burned_mask(front: FrontContour, grid: Grid) -> RasterImage:
    """Cells whose centres lie inside the front (even-odd rule, so nested polygons are holes)."""
    if front.is_empty:
        return RasterImage(grid, np.zeros(grid.shape))
    X, Y = grid.cell_centers()
    return RasterImage(grid, points_in_polygons(X, Y, front.polylines).astype(np.float64))


def _masks(a: RasterImage, b: RasterImage) -> tuple[np.ndarray, np.ndarray]:
    a.grid.check_same(b.grid)
    return a.pixels > 0.5, b.pixels > 0.5


def jaccard(a: RasterImage, b: RasterImage) -> float:
    """Intersection over union of two masks; 1 when both are empty."""
    ma, mb = _masks(a, b)
    union = np.count_nonzero(ma | mb)
    if union == 0:
        return 1.0
    return np.count_nonzero(ma & mb) / union


def symmetric_difference_area(a: RasterImage, b: RasterImage) -> float:
    ma, mb = _masks(a, b)
    return float(np.count_nonzero(ma ^ mb)) * a.grid.cell_area


def hausdorff_distance(a: FrontContour, b: FrontContour) -> float:
    """Symmetric Hausdorff distance between the contours' vertex sets, in metres.

    0 when both contours are empty and inf when only one is.
    """
    if a.is_empty and b.is_empty:
        return 0.0
    if a.is_empty or b.is_empty:
        return float("inf")
    u, v = a.vertices(), b.vertices()
    return float(max(directed_hausdorff(u, v)[0], directed_hausdorff(v, u)[0]))
