"""Sequential importance resampling over level-set particles.

Each particle owns a fire-front field and its own (beta, gamma) draw. Prediction propagates every
field independently; the update scores each predicted front against the observed one through a
blurred-raster likelihood and resamples.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from firefilter.assimilation.likelihood import likelihood_score, predicted_image
from firefilter.assimilation.parallel import map_ordered
from firefilter.assimilation.resampling import ess, resample_systematic
from firefilter.assimilation.schedule import record_times
from firefilter.data.config import RunConfig
from firefilter.field.contour import extract_contour
from firefilter.field.geometry import ignition_field
from firefilter.field.raster import rasterize_contour
from firefilter.field.statistics import mean_field, variance_field
from firefilter.solver.level_set import PropagationStats, propagate_with_stats, smoothed_noise
from firefilter.spread.ros import sample_prior
from firefilter.utils.custom_exceptions import DomainTooSmallError, FilterError, FireFilterError
from firefilter.utils.models import (
    CycleRecord,
    FilterOutput,
    Grid,
    Ignition,
    Observation,
    Particle,
    ParticleSet,
    RosParams,
    RosPrior,
    SolverConfig,
    WindSeries,
)
from firefilter.utils.seeding import PRIOR_SLOT, RESAMPLE_SLOT, substream

logger = logging.getLogger(__name__)


@dataclass
class UpdateResult:
    """Outcome of one particle-filter update."""

    particles: ParticleSet
    scores: np.ndarray
    ess: float
    resampled: bool
    degenerate: bool


def pf_init(
    grid: Grid,
    ignition: Ignition,
    prior: RosPrior,
    n: int,
    solver_config: SolverConfig,
    seed: int,
) -> ParticleSet:
    """Particles sharing the ignition field, each with an independent prior draw and weight 1/n.

    With process noise enabled each particle's initial field is perturbed by one noise draw, so
    the set starts around the ignition front rather than on it.
    """
    if n < 1:
        raise ValueError(f"need at least one particle, got {n}")
    phi0 = ignition_field(grid, ignition)
    particles = []
    for i in range(n):
        rng = substream(seed, PRIOR_SLOT, i)
        params = sample_prior(prior, rng)
        phi = phi0
        if solver_config.noise_sigma > 0:
            phi = phi0.with_values(phi0.values + smoothed_noise(grid.shape, solver_config.noise_sigma, rng))
        particles.append(Particle(phi, params, 1.0 / n))
    logger.info(f"Initialized {n} particles from seed {seed}")
    return ParticleSet(tuple(particles), phi0.time, seed, cycle=0)


def _predict(
    ps: ParticleSet, t_next: float, wind_series: WindSeries, solver_config: SolverConfig, threads: int
) -> tuple[ParticleSet, PropagationStats]:
    if t_next < ps.time:
        raise ValueError(f"t_next={t_next} is before the particle time {ps.time}")
    if t_next == ps.time:
        return ps, PropagationStats()
    cycle = ps.cycle + 1

    def advance(slot: int) -> tuple[Particle, PropagationStats]:
        particle = ps.particles[slot]
        rng = substream(ps.rng_seed, cycle, slot)
        try:
            phi, stats = propagate_with_stats(particle.phi, t_next, particle.params, wind_series, solver_config, rng)
        except DomainTooSmallError as e:
            raise DomainTooSmallError(e.time, particle_index=slot) from e
        return Particle(phi, particle.params, particle.weight), stats

    results = map_ordered(advance, range(len(ps)), threads)
    total = PropagationStats()
    for _, stats in results:
        total += stats
    return ParticleSet(tuple(p for p, _ in results), t_next, ps.rng_seed, cycle), total


def pf_predict(
    ps: ParticleSet, t_next: float, wind_series: WindSeries, solver_config: SolverConfig, threads: int = 1
) -> ParticleSet:
    """Propagates every particle to ``t_next`` with its own parameters and noise stream."""
    return _predict(ps, t_next, wind_series, solver_config, threads)[0]


def pf_update(
    ps: ParticleSet, obs: Observation, sigma_blur: float, resample_always: bool = True, threads: int = 1
) -> UpdateResult:
    """Reweights particles by the blurred-raster likelihood of ``obs`` and resamples.

    Resampling happens on every update with ``resample_always``, otherwise when ESS < n/2. If every
    score is zero the weights fall back to uniform, no resampling happens and the result is flagged
    as degenerate.
    """
    if abs(obs.time - ps.time) > 1e-9:
        raise ValueError(f"observation time {obs.time} does not match particle time {ps.time}")
    n = len(ps)
    grid = ps.particles[0].phi.grid
    truth = rasterize_contour(obs.front, grid)

    def score(particle: Particle) -> float:
        return likelihood_score(truth, predicted_image(particle.phi, sigma_blur))

    scores = np.array(map_ordered(score, ps.particles, threads))
    weights = ps.weights * scores
    total = weights.sum()
    if total <= 0 or not np.isfinite(total):
        logger.warning(f"All particle scores are zero at t={ps.time:.3f} s; resetting to uniform weights")
        uniform = ParticleSet(
            tuple(Particle(p.phi, p.params, 1.0 / n) for p in ps.particles), ps.time, ps.rng_seed, ps.cycle
        )
        return UpdateResult(uniform, scores, float(n), resampled=False, degenerate=True)

    weights = weights / total
    reweighted = tuple(Particle(p.phi, p.params, float(w)) for p, w in zip(ps.particles, weights))
    weighted = ParticleSet(reweighted, ps.time, ps.rng_seed, ps.cycle)
    n_eff = ess(weights)
    if resample_always or n_eff < n / 2:
        logger.info(f"Resampling at t={ps.time:.3f} s (ESS={n_eff:.1f} of {n})")
        resampled = resample_systematic(weighted, substream(ps.rng_seed, ps.cycle, RESAMPLE_SLOT))
        return UpdateResult(resampled, scores, n_eff, resampled=True, degenerate=False)
    return UpdateResult(weighted, scores, n_eff, resampled=False, degenerate=False)


def posterior_mean_params(ps: ParticleSet) -> RosParams:
    """Weighted mean of the particle parameters."""
    beta, gamma = np.average(ps.params_matrix, axis=0, weights=ps.weights)
    return RosParams(max(0.0, float(beta)), float(gamma))


def _record(
    ps: ParticleSet,
    forecast: ParticleSet,
    has_observation: bool,
    n_contours: int,
    update: Optional[UpdateResult] = None,
) -> CycleRecord:
    fields, weights = ps.fields, ps.weights
    return CycleRecord(
        time=ps.time,
        has_observation=has_observation,
        forecast=extract_contour(mean_field(forecast.fields, forecast.weights)),
        analysis=extract_contour(mean_field(fields, weights)),
        members=[extract_contour(phi) for phi in fields[:n_contours]],
        variance=variance_field(fields, weights),
        params=ps.params_matrix,
        weights=weights,
        ess=update.ess if update else ess(weights),
        resampled=update.resampled if update else False,
        degenerate=update.degenerate if update else False,
    )


def pf_run(
    grid: Grid,
    ignition: Ignition,
    prior: RosPrior,
    observations: Sequence[Observation],
    wind_series: WindSeries,
    config: RunConfig,
    threads: int = 1,
) -> FilterOutput:
    """Alternates prediction and update over the observations.

    Records a cycle at every observation and at every ``obs_interval`` tick up to ``t_end``; ticks
    without an observation are forecast-only.
    """
    settings = config.filter
    output = FilterOutput(kind="pf")
    ps = pf_init(grid, ignition, prior, settings.n_particles, config.solver, config.seed)
    output.initial = extract_contour(mean_field(ps.fields, ps.weights))

    for t, obs_index in record_times(observations, config.t_end, config.obs_interval):
        try:
            forecast, stats = _predict(ps, t, wind_series, config.solver, threads)
            output.steps += stats.steps
            output.reinitializations += stats.reinitializations
            if obs_index is None:
                ps = forecast
                output.cycles.append(_record(ps, forecast, False, settings.n_member_contours))
                continue
            logger.info(f"Assimilating observation {obs_index} at t={t:.3f} s")
            obs = observations[obs_index]
            update = pf_update(forecast, obs, settings.sigma_blur, settings.resample_always, threads)
            ps = update.particles
            output.cycles.append(_record(ps, forecast, True, settings.n_member_contours, update))
        except (FireFilterError, ValueError) as e:
            raise FilterError(str(e), obs_index, e) from e

    if output.cycles:
        beta, gamma = output.final_params
        logger.info(f"Particle filter finished: posterior mean beta={beta:.4f}, gamma={gamma:.4f}")
    return output
