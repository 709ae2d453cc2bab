from typing import Sequence

import numpy as np

from firefilter.utils.models import LevelSetField, ScalarField


def _stack(fields: Sequence[LevelSetField], weights: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    if not fields:
        raise ValueError("no fields given")
    if len(fields) != len(weights):
        raise ValueError(f"{len(fields)} fields but {len(weights)} weights")
    grid = fields[0].grid
    for f in fields[1:]:
        grid.check_same(f.grid)
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights sum to zero")
    return np.stack([f.values for f in fields]), w / total


def mean_field(fields: Sequence[LevelSetField], weights: Sequence[float]) -> LevelSetField:
    """Cellwise weighted mean of phi; the mean front is the contour of this field."""
    stack, w = _stack(fields, weights)
    return LevelSetField.from_values(fields[0].grid, np.tensordot(w, stack, axes=1), fields[0].time)


def variance_field(fields: Sequence[LevelSetField], weights: Sequence[float]) -> ScalarField:
    """Cellwise weighted variance of phi (two-pass)."""
    stack, w = _stack(fields, weights)
    mean = np.tensordot(w, stack, axes=1)
    return ScalarField(fields[0].grid, np.tensordot(w, (stack - mean) ** 2, axes=1))
