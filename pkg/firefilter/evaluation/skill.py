import logging
from typing import Sequence

import pandas as pd

from firefilter.evaluation.metrics import burned_mask, hausdorff_distance, jaccard, symmetric_difference_area
from firefilter.utils.custom_exceptions import DataFormatError
from firefilter.utils.models import FrontContour, FrontRecord, Grid, Observation

logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-6
SKILL_COLUMNS = ["time_s", "tag", "jaccard", "sym_diff_m2", "hausdorff_m"]


def check_alignment(predicted_times: Sequence[float], truth_times: Sequence[float]) -> None:
    """Every predicted time needs a truth time within TIME_TOLERANCE and vice versa."""
    unmatched_pred = [t for t in predicted_times if all(abs(t - s) > TIME_TOLERANCE for s in truth_times)]
    unmatched_truth = [s for s in truth_times if all(abs(t - s) > TIME_TOLERANCE for t in predicted_times)]
    if unmatched_pred or unmatched_truth:
        raise DataFormatError(
            f"time misalignment: predictions without truth at {unmatched_pred}, truth without predictions at "
            f"{unmatched_truth}"
        )


def skill_table(predicted: Sequence[FrontRecord], truth: Sequence[Observation], grid: Grid) -> pd.DataFrame:
    """Scores each predicted record against the observation at its time."""
    rows = []
    for record in predicted:
        matches = [obs for obs in truth if abs(obs.time - record.time) <= TIME_TOLERANCE]
        if not matches:
            raise DataFormatError(f"no truth front at t={record.time} s")
        observed = matches[0].front
        front = FrontContour(record.polygons, record.time)
        pred_mask, truth_mask = burned_mask(front, grid), burned_mask(observed, grid)
        rows.append(
            {
                "time_s": record.time,
                "tag": record.tag,
                "jaccard": jaccard(pred_mask, truth_mask),
                "sym_diff_m2": symmetric_difference_area(pred_mask, truth_mask),
                "hausdorff_m": hausdorff_distance(front, observed),
            }
        )
    logger.debug(f"Scored {len(rows)} predicted fronts")
    return pd.DataFrame(rows, columns=SKILL_COLUMNS)
