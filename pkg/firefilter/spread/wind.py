import numpy as np

from firefilter.utils.models import WindSeries


def wind_at(series: WindSeries, t: float) -> tuple[float, float]:
    """Zero-order hold: latest sample with time <= t, or the first sample before the series starts."""
    idx = int(np.searchsorted(series.times, t, side="right")) - 1
    wx, wy = series.vectors[max(idx, 0)]
    return float(wx), float(wy)


def next_sample_time(series: WindSeries, t: float) -> float:
    """Time of the first sample strictly after ``t`` (inf when none)."""
    idx = int(np.searchsorted(series.times, t, side="right"))
    return float(series.times[idx]) if idx < len(series.times) else float("inf")


def mean_wind(series: WindSeries, t0: float, t1: float) -> tuple[float, float]:
    """Time-weighted mean of the held wind over [t0, t1]."""
    if t1 < t0:
        raise ValueError(f"empty interval [{t0}, {t1}]")
    if t1 == t0:
        return wind_at(series, t0)
    inner = series.times[(series.times > t0) & (series.times < t1)]
    knots = np.concatenate([[t0], inner, [t1]])
    total = np.zeros(2)
    for a, b in zip(knots[:-1], knots[1:]):
        total += (b - a) * np.array(wind_at(series, a))
    wx, wy = total / (t1 - t0)
    return float(wx), float(wy)
