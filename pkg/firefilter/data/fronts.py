import json
import logging
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from firefilter.utils.custom_exceptions import DataFormatError
from firefilter.utils.models import FrontContour, FrontRecord, Observation

logger = logging.getLogger(__name__)

TAGS = ("truth", "forecast", "analysis", "mean")


def is_valid_tag(tag: str) -> bool:
    if tag in TAGS:
        return True
    prefix, _, index = tag.partition("-")
    return prefix == "member" and index.isdigit()


def _parse_record(item: Any, row: int) -> FrontRecord:
    if not isinstance(item, dict):
        raise DataFormatError("expected an object", row=row)
    time = item.get("time_s")
    if isinstance(time, bool) or not isinstance(time, (int, float)) or not np.isfinite(time):
        raise DataFormatError("time_s must be a finite number", row=row)
    raw_polygons = item.get("polygons")
    if not isinstance(raw_polygons, list):
        raise DataFormatError("polygons must be a list", row=row)
    polygons = []
    for polygon in raw_polygons:
        try:
            vertices = np.array(polygon, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise DataFormatError("polygon vertices must be [x, y] pairs", row=row) from e
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise DataFormatError("polygon vertices must be [x, y] pairs", row=row)
        if len(vertices) < 3:
            raise DataFormatError(f"polygon has {len(vertices)} vertices, needs at least 3", row=row)
        if not np.all(np.isfinite(vertices)):
            raise DataFormatError("polygon vertices must be finite", row=row)
        polygons.append(vertices)
    tag = item.get("tag", "truth")
    if not isinstance(tag, str) or not is_valid_tag(tag):
        raise DataFormatError(f"unknown tag {tag!r}", row=row)
    return FrontRecord(float(time), tuple(polygons), tag)


def load_front_records(path: Union[str, Path]) -> list[FrontRecord]:
    """Reads every record of a fronts file, in file order; rows are numbered from 1."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"invalid JSON: {e}") from e
        except UnicodeDecodeError as e:
            raise DataFormatError(f"fronts file is not valid UTF-8: {e.reason} at byte {e.start}") from e
    if not isinstance(data, list):
        raise DataFormatError("fronts file must hold a JSON array")
    return [_parse_record(item, k + 1) for k, item in enumerate(data)]


def load_fronts_json(path: Union[str, Path]) -> list[Observation]:
    """Reads observed fronts; times must be strictly increasing."""
    records = load_front_records(path)
    observations = []
    for k, record in enumerate(records):
        if observations and record.time <= observations[-1].time:
            raise DataFormatError(f"time {record.time} is not after {observations[-1].time}", row=k + 1)
        observations.append(Observation(record.time, FrontContour(record.polygons, record.time)))
    logger.debug(f"Loaded {len(observations)} observed fronts from {path}")
    return observations


def records_to_payload(records: Sequence[FrontRecord]) -> list[dict[str, Any]]:
    return [
        {
            "time_s": float(r.time),
            "tag": r.tag,
            "polygons": [np.asarray(p, dtype=np.float64).tolist() for p in r.polygons],
        }
        for r in records
    ]


def write_fronts_json(records: Sequence[FrontRecord], path: Union[str, Path]) -> None:
    """Writes records in the schema ``load_fronts_json`` reads, plus each record's tag."""
    for record in records:
        if not is_valid_tag(record.tag):
            raise ValueError(f"unknown tag {record.tag!r}")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(records_to_payload(records), f)
        f.write("\n")
