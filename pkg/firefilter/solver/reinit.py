import logging

import numpy as np

from firefilter.solver import differences
from firefilter.utils.custom_exceptions import DegenerateFrontError
from firefilter.utils.models import Grid, LevelSetField

logger = logging.getLogger(__name__)


def has_front(values: np.ndarray) -> bool:
    inside = values < 0
    return bool(inside.any() and not inside.all())


def reinitialize_values(values: np.ndarray, grid: Grid, iterations: int, order: int = 2) -> np.ndarray:
    """Iterates phi_tau = S(phi0) (1 - |grad phi|) with S(phi) = phi / sqrt(phi^2 + h^2)."""
    if not has_front(values):
        raise DegenerateFrontError("cannot reinitialize a field without a zero crossing")
    h = min(grid.dx, grid.dy)
    dtau = 0.5 * h
    sign = values / np.sqrt(values**2 + h**2)
    phi = np.array(values, dtype=np.float64)
    for _ in range(iterations):
        padded = differences.pad(phi)
        dmx, dpx = differences.one_sided(padded, grid.dx, axis=1, order=order)
        dmy, dpy = differences.one_sided(padded, grid.dy, axis=0, order=order)
        grad = differences.godunov(dmx, dpx, dmy, dpy, sign)
        phi = phi + dtau * sign * (1.0 - grad)
    return phi


def reinitialize(phi: LevelSetField, iterations: int, order: int = 2) -> LevelSetField:
    """Restores the signed-distance property of phi while keeping its zero level-set in place."""
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    return phi.with_values(reinitialize_values(phi.values, phi.grid, iterations, order))
