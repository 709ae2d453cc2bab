import logging

import numpy as np

from firefilter.utils.models import Particle, ParticleSet

logger = logging.getLogger(__name__)


def ess(weights: np.ndarray) -> float:
    """Effective sample size 1 / sum(w^2) of normalized weights."""
    w = np.asarray(weights, dtype=np.float64)
    return float(1.0 / np.sum(w**2))


def systematic_indices(weights: np.ndarray, offset: float) -> np.ndarray:
    """Indices picked by systematic resampling for a single uniform ``offset`` in [0, 1)."""
    w = np.asarray(weights, dtype=np.float64)
    n = len(w)
    if not 0.0 <= offset < 1.0:
        raise ValueError(f"offset must lie in [0, 1), got {offset}")
    cumulative = np.cumsum(w / w.sum())
    cumulative[-1] = 1.0
    positions = (offset + np.arange(n)) / n
    return np.minimum(np.searchsorted(cumulative, positions, side="right"), n - 1)


def resample_systematic(ps: ParticleSet, rng: np.random.Generator) -> ParticleSet:
    """Systematic resampling; the returned particles carry uniform weights 1/n."""
    n = len(ps)
    indices = systematic_indices(ps.weights, float(rng.random()))
    logger.debug(f"Resampled {n} particles into {len(np.unique(indices))} distinct ancestors")
    particles = tuple(Particle(ps.particles[k].phi, ps.particles[k].params, 1.0 / n) for k in indices)
    return ParticleSet(particles, ps.time, ps.rng_seed, ps.cycle)
