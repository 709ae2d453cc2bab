import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from firefilter.evaluation.metrics import burned_mask, hausdorff_distance, jaccard, symmetric_difference_area
from firefilter.evaluation.skill import SKILL_COLUMNS, check_alignment, skill_table
from firefilter.field.contour import extract_contour
from firefilter.field.geometry import signed_distance_circle
from firefilter.solver.level_set import propagate
from firefilter.utils.custom_exceptions import DataFormatError, GridMismatchError
from firefilter.utils.models import (
    FrontContour,
    FrontRecord,
    Grid,
    Observation,
    RasterImage,
    RosParams,
    SolverConfig,
    WindSeries,
)


def _square(x0: float, y0: float, side: float, time: float = 0.0) -> FrontContour:
    corners = np.array([[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]])
    return FrontContour((corners,), time)


def test_burned_mask_counts_cell_centres(grid: Grid) -> None:
    mask = burned_mask(_square(2.25, 2.25, 4.0), grid)
    assert mask.pixels.sum() == 64
    assert mask.pixels[5, 5] == 1.0 and mask.pixels[4, 4] == 0.0
    assert burned_mask(FrontContour((), 0.0), grid).pixels.sum() == 0


def test_holes_are_not_burned(grid: Grid) -> None:
    outer = _square(2.25, 2.25, 8.0).polylines[0]
    inner = _square(4.25, 4.25, 4.0).polylines[0]
    mask = burned_mask(FrontContour((outer, inner), 0.0), grid)
    assert mask.pixels.sum() == 16 * 16 - 8 * 8


def test_overlap_scores(grid: Grid) -> None:
    a = burned_mask(_square(2.25, 2.25, 4.0), grid)
    b = burned_mask(_square(4.25, 2.25, 4.0), grid)
    far = burned_mask(_square(20.25, 20.25, 4.0), grid)
    empty = burned_mask(FrontContour((), 0.0), grid)

    assert jaccard(a, a) == 1.0
    assert jaccard(empty, empty) == 1.0
    assert jaccard(a, far) == 0.0
    assert jaccard(a, b) == pytest.approx(1 / 3)
    assert symmetric_difference_area(a, b) == pytest.approx(16.0)
    assert symmetric_difference_area(a, a) == 0.0


def test_scores_need_a_shared_grid(grid: Grid) -> None:
    other = Grid(nx=40, ny=40, dx=0.5, dy=0.5)
    with pytest.raises(GridMismatchError):
        jaccard(burned_mask(_square(2.25, 2.25, 4.0), grid), burned_mask(_square(2.25, 2.25, 4.0), other))


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (6, 6), elements=st.sampled_from([0.0, 1.0])),
    arrays(np.float64, (6, 6), elements=st.sampled_from([0.0, 1.0])),
)
def test_jaccard_is_a_symmetric_fraction(a: np.ndarray, b: np.ndarray) -> None:
    g = Grid(nx=6, ny=6, dx=1.0, dy=1.0)
    ia, ib = RasterImage(g, a), RasterImage(g, b)
    assert 0.0 <= jaccard(ia, ib) <= 1.0
    assert jaccard(ia, ib) == jaccard(ib, ia)
    assert symmetric_difference_area(ia, ib) == np.count_nonzero(a != b)


def test_hausdorff_distance() -> None:
    a = _square(0.0, 0.0, 4.0)
    assert hausdorff_distance(a, _square(1.0, 0.0, 4.0)) == pytest.approx(1.0)
    assert hausdorff_distance(a, _square(0.0, 3.0, 4.0)) == pytest.approx(3.0)
    assert hausdorff_distance(a, a) == 0.0
    assert hausdorff_distance(FrontContour((), 0.0), FrontContour((), 0.0)) == 0.0
    assert hausdorff_distance(a, FrontContour((), 0.0)) == float("inf")


def test_extracted_front_encloses_the_negative_region(grid: Grid) -> None:
    phi = signed_distance_circle(grid, (20.0, 20.0), 8.0)
    moved = propagate(phi, 10.0, RosParams(0.1, 0.2), WindSeries.constant(2.0, 1.0), SolverConfig())
    for field in (phi, moved):
        mask = burned_mask(extract_contour(field), grid).pixels > 0.5
        assert np.mean(mask == (field.values < 0)) >= 0.98


def test_skill_table_scores_each_record(grid: Grid) -> None:
    truth = [Observation(t, _square(10.25, 10.25, 2.0 + t / 5, t)) for t in (10.0, 20.0)]
    predicted = [
        FrontRecord.from_contour(truth[0].front, "analysis"),
        FrontRecord.from_contour(_square(11.25, 10.25, 6.0, 20.0 + 1e-9), "forecast"),
    ]
    table = skill_table(predicted, truth, grid)
    assert list(table.columns) == SKILL_COLUMNS
    assert table["tag"].tolist() == ["analysis", "forecast"]
    assert table.loc[0, "jaccard"] == 1.0
    assert table.loc[0, "sym_diff_m2"] == 0.0
    assert table.loc[0, "hausdorff_m"] == 0.0
    assert table.loc[1, "hausdorff_m"] == pytest.approx(1.0)
    assert 0.0 < table.loc[1, "jaccard"] < 1.0


def test_skill_table_needs_a_truth_front(grid: Grid) -> None:
    truth = [Observation(10.0, _square(10.25, 10.25, 4.0, 10.0))]
    with pytest.raises(DataFormatError):
        skill_table([FrontRecord.from_contour(_square(10.25, 10.25, 4.0, 15.0), "analysis")], truth, grid)


def test_alignment_names_the_unmatched_times() -> None:
    check_alignment([10.0, 20.0 + 1e-8], [10.0, 20.0])
    with pytest.raises(DataFormatError, match="30.0"):
        check_alignment([10.0, 30.0], [10.0, 20.0])
