from typing import Optional, Sequence

from firefilter.utils.models import Observation

TIME_TOLERANCE = 1e-6


def check_observations(observations: Sequence[Observation], t0: float = 0.0) -> None:
    """Observation times must be strictly increasing and later than the start time."""
    previous = t0
    for k, obs in enumerate(observations):
        if obs.time <= previous:
            raise ValueError(f"observation {k} at t={obs.time} s is not after t={previous} s")
        previous = obs.time


def record_times(
    observations: Sequence[Observation], t_end: float, obs_interval: float, t0: float = 0.0
) -> list[tuple[float, Optional[int]]]:
    """Times at which a filter records its state, each paired with the index of the observation there.

    The union of the observation times and the regular ``obs_interval`` grid up to ``t_end``; grid
    times within TIME_TOLERANCE of an observation collapse onto it.
    """
    check_observations(observations, t0)
    times: list[tuple[float, Optional[int]]] = [(obs.time, k) for k, obs in enumerate(observations)]
    k = 1
    while t0 + k * obs_interval <= t_end + TIME_TOLERANCE:
        t = t0 + k * obs_interval
        if all(abs(t - obs.time) > TIME_TOLERANCE for obs in observations):
            times.append((t, None))
        k += 1
    return sorted(times, key=lambda item: item[0])
