import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from firefilter.utils.custom_exceptions import DataFormatError
from firefilter.utils.models import WindSample, WindSeries

logger = logging.getLogger(__name__)

VECTOR_COLUMNS = ["time_s", "wx_mps", "wy_mps"]
BEARING_COLUMNS = ["time_s", "speed_mps", "dir_deg"]


def _numeric(frame: pd.DataFrame) -> pd.DataFrame:
    values = frame.apply(pd.to_numeric, errors="coerce")
    bad = ~np.isfinite(values.to_numpy(dtype=np.float64)).all(axis=1)
    if bad.any():
        raise DataFormatError("missing or non-finite value", row=int(np.argmax(bad)) + 1)
    return values


def _undecodable_row(path: Union[str, Path]) -> Optional[int]:
    """Data row (1-based, after the header) of the first line that is not UTF-8; None for the header."""
    with open(path, "rb") as f:
        for k, line in enumerate(f):
            try:
                line.decode("utf-8")
            except UnicodeDecodeError:
                return k if k > 0 else None
    return None


def load_wind_csv(path: Union[str, Path]) -> WindSeries:
    """Reads a wind CSV in vector (wx, wy) or bearing (speed, direction blown toward) form.

    Rows are numbered from 1 after the header in error messages.
    """
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise DataFormatError("wind file is empty") from e
    except pd.errors.ParserError as e:
        raise DataFormatError(f"cannot parse wind file: {e}") from e
    except UnicodeDecodeError as e:
        raise DataFormatError("wind file is not valid UTF-8", row=_undecodable_row(path)) from e
    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    if columns == VECTOR_COLUMNS:
        values = _numeric(frame)
        wx, wy = values["wx_mps"].to_numpy(), values["wy_mps"].to_numpy()
    elif columns == BEARING_COLUMNS:
        values = _numeric(frame)
        speed = values["speed_mps"].to_numpy()
        theta = np.deg2rad(values["dir_deg"].to_numpy())
        wx, wy = speed * np.cos(theta), speed * np.sin(theta)
    else:
        expected = f"{','.join(VECTOR_COLUMNS)} or {','.join(BEARING_COLUMNS)}"
        raise DataFormatError(f"expected header {expected}, got {','.join(columns)}")
    if frame.empty:
        raise DataFormatError("wind file has no samples")

    times = values["time_s"].to_numpy()
    for k in range(len(times)):
        if times[k] < 0:
            raise DataFormatError(f"negative time {times[k]}", row=k + 1)
        if k > 0 and times[k] <= times[k - 1]:
            raise DataFormatError(f"time {times[k]} is not after {times[k - 1]}", row=k + 1)

    samples = tuple(WindSample(float(t), float(u), float(v)) for t, u, v in zip(times, wx, wy))
    logger.debug(f"Loaded {len(samples)} wind samples from {path}")
    return WindSeries(samples)


def write_wind_csv(series: WindSeries, path: Union[str, Path]) -> None:
    """Writes the vector form of a wind series."""
    frame = pd.DataFrame(
        {"time_s": series.times, "wx_mps": series.vectors[:, 0], "wy_mps": series.vectors[:, 1]}, columns=VECTOR_COLUMNS
    )
    frame.to_csv(path, index=False, lineterminator="\n")
