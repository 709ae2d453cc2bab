"""ENO one-sided differences and Godunov gradient magnitudes on a padded field.

The field is padded by two ghost cells per side with odd reflection, i.e. linear extrapolation
of phi across the border, so border cells see the interior slope.
"""

import numpy as np

GHOST = 2


def pad(values: np.ndarray) -> np.ndarray:
    return np.pad(values, GHOST, mode="reflect", reflect_type="odd")


def _shifted(padded: np.ndarray, offset: int, axis: int) -> np.ndarray:
    n = padded.shape[axis] - 2 * GHOST
    index = [slice(GHOST, -GHOST), slice(GHOST, -GHOST)]
    index[axis] = slice(GHOST + offset, GHOST + offset + n)
    return padded[tuple(index)]


def _smaller(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(np.abs(a) <= np.abs(b), a, b)


def one_sided(padded: np.ndarray, h: float, axis: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Backward and forward derivative estimates (D-, D+) along ``axis`` (1 = x, 0 = y)."""
    s = {o: _shifted(padded, o, axis) for o in range(-GHOST, GHOST + 1)}
    d_minus = (s[0] - s[-1]) / h
    d_plus = (s[1] - s[0]) / h
    if order == 2:
        d2 = {o: s[o + 1] - 2.0 * s[o] + s[o - 1] for o in (-1, 0, 1)}
        d_minus = d_minus + _smaller(d2[-1], d2[0]) / (2.0 * h)
        d_plus = d_plus - _smaller(d2[1], d2[0]) / (2.0 * h)
    return d_minus, d_plus


def central(padded: np.ndarray, h: float, axis: int) -> np.ndarray:
    return (_shifted(padded, 1, axis) - _shifted(padded, -1, axis)) / (2.0 * h)


def godunov(
    dmx: np.ndarray, dpx: np.ndarray, dmy: np.ndarray, dpy: np.ndarray, speed_sign: np.ndarray | float = 1.0
) -> np.ndarray:
    """Upwind |grad phi| for phi_t + u |grad phi| = 0, picking the branch by the sign of u."""
    expanding = np.sqrt(
        np.maximum(dmx, 0.0) ** 2 + np.minimum(dpx, 0.0) ** 2 + np.maximum(dmy, 0.0) ** 2 + np.minimum(dpy, 0.0) ** 2
    )
    if np.all(np.asarray(speed_sign) >= 0):
        return expanding
    receding = np.sqrt(
        np.minimum(dmx, 0.0) ** 2 + np.maximum(dpx, 0.0) ** 2 + np.minimum(dmy, 0.0) ** 2 + np.maximum(dpy, 0.0) ** 2
    )
    return np.where(np.asarray(speed_sign) >= 0, expanding, receding)
