import numpy as np

from firefilter.field.contour import extract_contour
from firefilter.field.raster import gaussian_blur, rasterize_contour
from firefilter.utils.models import FrontContour, Grid, LevelSetField, RasterImage


def likelihood_score(truth: RasterImage, predicted_blurred: RasterImage) -> float:
    """Unnormalized observation likelihood: sum over pixels of truth * blurred prediction."""
    truth.grid.check_same(predicted_blurred.grid)
    return float(np.sum(truth.pixels * predicted_blurred.pixels))


def front_image(front: FrontContour, grid: Grid, sigma_blur: float) -> RasterImage:
    """Observation operator applied to a front: rasterize, then blur."""
    return gaussian_blur(rasterize_contour(front, grid), sigma_blur)


def predicted_image(phi: LevelSetField, sigma_blur: float) -> RasterImage:
    return front_image(extract_contour(phi), phi.grid, sigma_blur)
