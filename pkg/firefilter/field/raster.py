import logging
import math

import numpy as np
from scipy.ndimage import gaussian_filter

from firefilter.utils.models import FrontContour, Grid, RasterImage

logger = logging.getLogger(__name__)


def _traverse_segment(u0: float, v0: float, u1: float, v1: float, out: np.ndarray) -> None:
    """Marks every cell a segment passes through; (u, v) are column/row coordinates with cell k on [k, k+1)."""
    ny, nx = out.shape
    j, i = math.floor(u0), math.floor(v0)
    j_end, i_end = math.floor(u1), math.floor(v1)
    du, dv = u1 - u0, v1 - v0

    step_j = 1 if du > 0 else -1
    step_i = 1 if dv > 0 else -1
    t_max_u = ((j + (du > 0)) - u0) / du if du != 0 else math.inf
    t_max_v = ((i + (dv > 0)) - v0) / dv if dv != 0 else math.inf
    t_delta_u = abs(1.0 / du) if du != 0 else math.inf
    t_delta_v = abs(1.0 / dv) if dv != 0 else math.inf

    for _ in range(abs(j_end - j) + abs(i_end - i) + 1):
        if 0 <= i < ny and 0 <= j < nx:
            out[i, j] = 1.0
        if t_max_u < t_max_v:
            t_max_u += t_delta_u
            j += step_j
        else:
            t_max_v += t_delta_v
            i += step_i


def rasterize_contour(contour: FrontContour, grid: Grid) -> RasterImage:
    """One-cell-thick binary image of the contour; segments outside the grid are clipped."""
    pixels = np.zeros(grid.shape)
    x0, y0 = grid.origin
    for polygon in contour.polylines:
        u = (polygon[:, 0] - x0) / grid.dx + 0.5
        v = (polygon[:, 1] - y0) / grid.dy + 0.5
        u_next, v_next = np.roll(u, -1), np.roll(v, -1)
        for k in range(len(polygon)):
            _traverse_segment(u[k], v[k], u_next[k], v_next[k], pixels)
    return RasterImage(grid, pixels)


def gaussian_blur(image: RasterImage, sigma: float, renormalize: bool = True) -> RasterImage:
    """Gaussian blur with a normalized kernel truncated at ceil(3 sigma) and zero padding.

    With ``renormalize`` the output is rescaled so its maximum equals the input maximum.
    """
    if sigma <= 0:
        raise ValueError(f"blur sigma must be positive, got {sigma}")
    blurred = gaussian_filter(image.pixels, sigma, mode="constant", cval=0.0, radius=math.ceil(3 * sigma))
    peak = blurred.max()
    if renormalize and peak > 0:
        blurred = blurred * (image.pixels.max() / peak)
    return RasterImage(image.grid, blurred)


def downsample_mean(pixels: np.ndarray, factor: int) -> np.ndarray:
    """Block-mean reduction; partial blocks at the far edges average over their actual cells."""
    if factor < 1:
        raise ValueError(f"downsample factor must be >= 1, got {factor}")
    if factor == 1:
        return np.array(pixels, dtype=np.float64)
    ny, nx = pixels.shape
    pad_y, pad_x = -ny % factor, -nx % factor
    padded = np.pad(np.asarray(pixels, dtype=np.float64), ((0, pad_y), (0, pad_x)), constant_values=np.nan)
    blocks = padded.reshape(padded.shape[0] // factor, factor, padded.shape[1] // factor, factor)
    return np.nanmean(blocks, axis=(1, 3))
