"""Stochastic ensemble Kalman filter over the rate-of-spread parameters (beta, gamma).

The state is the parameter pair only; the fire front enters through the observation operator,
which propagates a shared reference field with each member's parameters and maps the resulting
front to a blurred, block-averaged image.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from firefilter.assimilation.likelihood import front_image
from firefilter.assimilation.parallel import map_ordered
from firefilter.assimilation.schedule import record_times
from firefilter.data.config import RunConfig
from firefilter.field.contour import extract_contour
from firefilter.field.geometry import ignition_field
from firefilter.field.raster import downsample_mean
from firefilter.field.statistics import mean_field, variance_field
from firefilter.solver.level_set import PropagationStats, propagate_with_stats
from firefilter.spread.ros import sample_prior
from firefilter.utils.custom_exceptions import FilterError, FireFilterError
from firefilter.utils.models import (
    CycleRecord,
    EnkfEnsemble,
    FilterOutput,
    FrontContour,
    Grid,
    Ignition,
    LevelSetField,
    Observation,
    RosParams,
    RosPrior,
    SolverConfig,
    WindSeries,
)
from firefilter.utils.seeding import ENKF_OBS_SLOT, ENKF_WALK_SLOT, PRIOR_SLOT, substream

logger = logging.getLogger(__name__)


def enkf_init(
    prior: RosPrior, n_members: int, q_beta: float, q_gamma: float, r_scale: float, seed: int
) -> EnkfEnsemble:
    members = tuple(sample_prior(prior, substream(seed, PRIOR_SLOT, i)) for i in range(n_members))
    return EnkfEnsemble(members, q_beta, q_gamma, r_scale)


def random_walk(states: np.ndarray, q_beta: float, q_gamma: float, rng: np.random.Generator) -> np.ndarray:
    """Adds N(0, q) noise to each member's (beta, gamma) and clamps beta at zero."""
    scale = np.sqrt(np.array([q_beta, q_gamma]))[:, None]
    walked = states + scale * rng.standard_normal(states.shape)
    walked[0] = np.maximum(walked[0], 0.0)
    return walked


def perturb_observation(obs: np.ndarray, n: int, r_scale: float, rng: np.random.Generator) -> np.ndarray:
    """(p, n) matrix of observation copies with independent N(0, r_scale) pixel noise."""
    obs = np.asarray(obs, dtype=np.float64).ravel()
    return obs[:, None] + np.sqrt(r_scale) * rng.standard_normal((obs.size, n))


def enkf_analysis(
    states: np.ndarray, predicted: np.ndarray, perturbed_obs: np.ndarray, r_scale: float
) -> Optional[np.ndarray]:
    """Perturbed-observation EnKF update of a (m, N) state matrix.

    The gain is formed in ensemble space, K = X' (Y'^T Y' + (N - 1) r I)^-1 Y'^T, with X' and Y'
    the state and predicted-observation anomalies; it equals the usual
    C_xy (C_yy + r I)^-1 without building the p x p innovation covariance.
    Returns None when the gain is not finite.
    """
    states = np.asarray(states, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    perturbed_obs = np.asarray(perturbed_obs, dtype=np.float64)
    n = states.shape[1]
    if n < 2:
        raise ValueError(f"an EnKF update needs at least 2 members, got {n}")
    if predicted.shape[1] != n or perturbed_obs.shape != predicted.shape:
        raise ValueError(
            f"shape mismatch: states {states.shape}, predicted {predicted.shape}, observations {perturbed_obs.shape}"
        )
    x_anom = states - states.mean(axis=1, keepdims=True)
    y_anom = predicted - predicted.mean(axis=1, keepdims=True)
    system = y_anom.T @ y_anom + (n - 1) * r_scale * np.eye(n)
    innovation = y_anom.T @ (perturbed_obs - predicted)
    try:
        weights = np.linalg.solve(system, innovation)
    except np.linalg.LinAlgError:
        return None
    increment = x_anom @ weights
    if not np.all(np.isfinite(increment)):
        return None
    return states + increment


def ensemble_mean_params(states: np.ndarray) -> RosParams:
    """Member mean of a (2, n) state matrix, with beta clamped at zero."""
    beta, gamma = states.mean(axis=1)
    return RosParams(max(0.0, float(beta)), float(gamma))


def observe(front: FrontContour, grid: Grid, sigma_blur: float, factor: int) -> np.ndarray:
    """Observation vector of a front: blurred raster, block-averaged and flattened."""
    return downsample_mean(front_image(front, grid, sigma_blur).pixels, factor).ravel()


def _propagate_members(
    reference: LevelSetField,
    t: float,
    states: np.ndarray,
    wind_series: WindSeries,
    solver_config: SolverConfig,
    seed: int,
    cycle: int,
    threads: int,
) -> tuple[list[LevelSetField], PropagationStats]:
    def advance(slot: int) -> tuple[LevelSetField, PropagationStats]:
        params = RosParams(float(states[0, slot]), float(states[1, slot]))
        return propagate_with_stats(reference, t, params, wind_series, solver_config, substream(seed, cycle, slot))

    results = map_ordered(advance, range(states.shape[1]), threads)
    total = PropagationStats()
    for _, stats in results:
        total += stats
    return [phi for phi, _ in results], total


def enkf_run(
    grid: Grid,
    ignition: Ignition,
    prior: RosPrior,
    observations: Sequence[Observation],
    wind_series: WindSeries,
    config: RunConfig,
    threads: int = 1,
) -> FilterOutput:
    """Runs the parameter EnKF against the observations.

    Per cycle: random-walk the members, propagate the reference field with each member's
    parameters, update the parameters from the observed front, then advance the reference field
    with the updated ensemble mean. Member contours and the variance field come from
    re-propagating the members with their updated parameters.
    """
    settings = config.filter
    seed = config.seed
    ensemble = enkf_init(prior, settings.n_members, settings.q_beta, settings.q_gamma, settings.r_scale, seed)
    states = ensemble.states
    n = states.shape[1]
    uniform = np.full(n, 1.0 / n)
    reference = ignition_field(grid, ignition)
    output = FilterOutput(kind="enkf", initial=extract_contour(reference))

    for cycle, (t, obs_index) in enumerate(record_times(observations, config.t_end, config.obs_interval), start=1):
        try:
            states = random_walk(states, settings.q_beta, settings.q_gamma, substream(seed, cycle, ENKF_WALK_SLOT))
            fields, stats = _propagate_members(reference, t, states, wind_series, config.solver, seed, cycle, threads)
            output.steps += stats.steps
            output.reinitializations += stats.reinitializations
            forecast = extract_contour(mean_field(fields, uniform))

            skipped = False
            if obs_index is not None:
                logger.info(f"EnKF update with observation {obs_index} at t={t:.3f} s")
                predicted = np.column_stack(
                    [observe(extract_contour(phi), grid, settings.sigma_blur, settings.downsample) for phi in fields]
                )
                truth = observe(observations[obs_index].front, grid, settings.sigma_blur, settings.downsample)
                perturbed = perturb_observation(truth, n, settings.r_scale, substream(seed, cycle, ENKF_OBS_SLOT))
                updated = enkf_analysis(states, predicted, perturbed, settings.r_scale)
                if updated is None:
                    logger.warning(f"Skipping EnKF update at t={t:.3f} s: gain is not finite")
                    skipped = True
                else:
                    updated[0] = np.maximum(updated[0], 0.0)
                    states = updated
                    fields, stats = _propagate_members(
                        reference, t, states, wind_series, config.solver, seed, cycle, threads
                    )
                    output.steps += stats.steps
                    output.reinitializations += stats.reinitializations

            mean_params = ensemble_mean_params(states)
            reference, stats = propagate_with_stats(
                reference, t, mean_params, wind_series, config.solver, substream(seed, cycle, n)
            )
            output.steps += stats.steps
            output.reinitializations += stats.reinitializations
        except (FireFilterError, ValueError) as e:
            raise FilterError(str(e), obs_index, e) from e

        logger.debug(f"Ensemble mean at t={t:.3f} s: beta={mean_params.beta:.4f}, gamma={mean_params.gamma:.4f}")
        output.cycles.append(
            CycleRecord(
                time=t,
                has_observation=obs_index is not None,
                forecast=forecast,
                analysis=extract_contour(reference),
                members=[extract_contour(phi) for phi in fields[: settings.n_member_contours]],
                variance=variance_field(fields, uniform),
                params=states.T.copy(),
                weights=uniform.copy(),
                ess=float(n),
                skipped=skipped,
                ensemble_mean=extract_contour(mean_field(fields, uniform)),
            )
        )

    if output.cycles:
        beta, gamma = output.final_params
        logger.info(f"EnKF finished: ensemble mean beta={beta:.4f}, gamma={gamma:.4f}")
    return output
