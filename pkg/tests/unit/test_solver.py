import numpy as np
import pytest

from firefilter.field.contour import extract_contour
from firefilter.field.geometry import signed_distance_circle
from firefilter.solver import differences
from firefilter.solver.level_set import (
    grad_mag_upwind,
    propagate,
    propagate_with_stats,
    smoothed_noise,
    stable_dt,
    step,
    touches_border,
)
from firefilter.solver.reinit import reinitialize
from firefilter.utils.custom_exceptions import CflViolationError, DegenerateFrontError, DomainTooSmallError
from firefilter.utils.models import Grid, LevelSetField, RosParams, SolverConfig, WindSample, WindSeries

CALM = WindSeries.constant(0.0, 0.0)


def _radii(front_vertices: np.ndarray, center: tuple[float, float]) -> np.ndarray:
    return np.hypot(front_vertices[:, 0] - center[0], front_vertices[:, 1] - center[1])


def _band_gradient_error(phi: LevelSetField, low: float = 2.0, high: float = 8.0) -> float:
    gy, gx = np.gradient(phi.values, phi.grid.dy, phi.grid.dx)
    cells = np.abs(phi.values) / phi.grid.dx
    band = (cells > low) & (cells < high)
    band[:3, :] = band[-3:, :] = band[:, :3] = band[:, -3:] = False
    return float(np.max(np.abs(np.hypot(gx, gy)[band] - 1.0)))


@pytest.mark.parametrize("order", [1, 2])
def test_differences_are_exact_on_linear_fields(order: int) -> None:
    y, x = np.mgrid[0:12, 0:10] * 0.5
    padded = differences.pad(2.0 * x - 3.0 * y)
    for axis, slope in ((1, 2.0), (0, -3.0)):
        d_minus, d_plus = differences.one_sided(padded, 0.5, axis=axis, order=order)
        np.testing.assert_allclose(d_minus, slope, atol=1e-12)
        np.testing.assert_allclose(d_plus, slope, atol=1e-12)


def test_upwind_gradient_of_a_plane_is_one() -> None:
    g = Grid(nx=20, ny=20, dx=0.25, dy=0.25)
    X, _ = g.cell_centers()
    phi = LevelSetField.from_values(g, X - 2.0, 0.0)
    np.testing.assert_allclose(grad_mag_upwind(phi).values, 1.0, atol=1e-12)


def test_stable_dt_uses_the_largest_speed() -> None:
    g = Grid(nx=20, ny=20, dx=0.25, dy=0.25)
    phi = signed_distance_circle(g, (2.5, 2.5), 1.0)
    dt = stable_dt(phi, RosParams(0.1, 0.2), (3.0, 0.0), SolverConfig())
    assert dt == pytest.approx(0.5 * 0.25 / 0.7)
    assert stable_dt(phi, RosParams(0.0, 0.0), (3.0, 0.0), SolverConfig(), remaining=4.0) == 4.0


def test_step_rejects_cfl_violations() -> None:
    g = Grid(nx=20, ny=20, dx=0.25, dy=0.25)
    X, _ = g.cell_centers()
    phi = LevelSetField.from_values(g, X - 2.0, 0.0)
    params = RosParams(0.5, 0.0)
    with pytest.raises(CflViolationError):
        step(phi, 1.0, params, (0.0, 0.0), SolverConfig())
    assert step(phi, 0.0, params, (0.0, 0.0), SolverConfig()) is phi
    advanced = step(phi, 0.2, params, (0.0, 0.0), SolverConfig())
    assert advanced.time == pytest.approx(0.2)
    # a plane front moves by u dt everywhere
    np.testing.assert_allclose(advanced.values, phi.values - 0.1, atol=1e-12)


def test_circle_expands_at_beta() -> None:
    g = Grid(nx=200, ny=200, dx=0.25, dy=0.25)
    phi = propagate(signed_distance_circle(g, (25.0, 25.0), 5.0), 20.0, RosParams(0.5, 0.0), CALM, SolverConfig())
    assert phi.time == 20.0
    r = _radii(extract_contour(phi).vertices(), (25.0, 25.0))
    assert np.all(np.abs(r - 15.0) <= 2 * g.dx)


def test_wind_stretches_the_front_downwind() -> None:
    g = Grid(nx=160, ny=80, dx=0.25, dy=0.25)
    phi0 = signed_distance_circle(g, (10.0, 10.0), 5.0)
    phi = propagate(phi0, 30.0, RosParams(0.1, 0.2), WindSeries.constant(3.0, 0.0), SolverConfig())
    vertices = extract_contour(phi).vertices()
    downwind = vertices[:, 0].max() - 10.0
    crosswind = 0.5 * (vertices[:, 1].max() - vertices[:, 1].min())
    assert downwind == pytest.approx(26.0, abs=0.5)
    assert crosswind == pytest.approx(8.0, abs=0.5)


def test_propagation_keeps_signed_distance_away_from_the_front() -> None:
    g = Grid(nx=200, ny=200, dx=0.25, dy=0.25)
    phi = propagate(signed_distance_circle(g, (25.0, 25.0), 5.0), 20.0, RosParams(0.5, 0.0), CALM, SolverConfig())
    assert _band_gradient_error(phi) <= 0.1


def test_reinitialize_restores_unit_gradient_and_keeps_the_front() -> None:
    g = Grid(nx=80, ny=80, dx=0.25, dy=0.25)
    circle = signed_distance_circle(g, (10.0, 10.0), 5.0)
    stretched = circle.with_values(3.0 * circle.values)
    phi = reinitialize(stretched, iterations=20)
    assert _band_gradient_error(phi, 2.0, 6.0) <= 0.1
    r = _radii(extract_contour(phi).vertices(), (10.0, 10.0))
    assert np.all(np.abs(r - 5.0) <= 0.1)


def test_reinitialize_needs_a_front(grid: Grid) -> None:
    flat = LevelSetField.from_values(grid, np.ones(grid.shape), 0.0)
    with pytest.raises(DegenerateFrontError):
        reinitialize(flat, iterations=5)


def test_burned_region_never_shrinks() -> None:
    g = Grid(nx=80, ny=80, dx=0.5, dy=0.5)
    phi = signed_distance_circle(g, (15.0, 20.0), 3.0)
    params, wind, config = RosParams(0.05, 0.2), (2.0, 0.5), SolverConfig()
    burned = phi.values < 0
    for _ in range(40):
        phi = step(phi, stable_dt(phi, params, wind, config), params, wind, config)
        now = phi.values < 0
        assert np.all(now[burned])
        burned = now
    assert burned.sum() > (signed_distance_circle(g, (15.0, 20.0), 3.0).values < 0).sum()


def test_calm_spread_stays_circular() -> None:
    g = Grid(nx=100, ny=100, dx=0.25, dy=0.25)
    phi = propagate(signed_distance_circle(g, (12.5, 12.5), 3.0), 10.0, RosParams(0.5, 0.0), CALM, SolverConfig())
    r = _radii(extract_contour(phi).vertices(), (12.5, 12.5))
    assert float(r.max() - r.min()) <= 2 * g.dx
    assert float(r.mean()) == pytest.approx(8.0, abs=2 * g.dx)


def test_propagate_to_the_current_time_is_a_no_op(grid: Grid) -> None:
    phi = signed_distance_circle(grid, (20.0, 20.0), 3.0, time=5.0)
    result, stats = propagate_with_stats(phi, 5.0, RosParams(0.1, 0.0), CALM, SolverConfig())
    assert result is phi
    assert stats.steps == 0
    with pytest.raises(ValueError):
        propagate(phi, 4.0, RosParams(0.1, 0.0), CALM, SolverConfig())


def test_steps_stop_on_wind_sample_boundaries(grid: Grid) -> None:
    phi = signed_distance_circle(grid, (20.0, 20.0), 3.0)
    wind = WindSeries(tuple(WindSample(0.1 * k, 0.0, 0.0) for k in range(11)))
    _, stats = propagate_with_stats(phi, 1.0, RosParams(0.01, 0.0), wind, SolverConfig(reinit_every=0))
    assert stats.steps == 10
    assert stats.reinitializations == 0


def test_reinitialization_cadence_is_counted(grid: Grid) -> None:
    phi = signed_distance_circle(grid, (20.0, 20.0), 3.0)
    # dt = 0.5 * 0.5 / 0.5 = 0.5 s, so 20 steps
    _, stats = propagate_with_stats(phi, 10.0, RosParams(0.5, 0.0), CALM, SolverConfig(reinit_every=10))
    assert stats.steps == 20
    assert stats.reinitializations == 2


def test_front_reaching_the_border_raises() -> None:
    g = Grid(nx=40, ny=40, dx=0.25, dy=0.25)
    phi = signed_distance_circle(g, (5.0, 5.0), 2.0)
    with pytest.raises(DomainTooSmallError, match="domain too small"):
        propagate(phi, 10.0, RosParams(1.0, 0.0), CALM, SolverConfig())
    assert touches_border(np.full(g.shape, -1.0))
    assert not touches_border(phi.values)


def test_receding_front_stays_finite_without_upwind_clamp() -> None:
    g = Grid(nx=120, ny=80, dx=0.25, dy=0.25)
    phi0 = signed_distance_circle(g, (15.0, 10.0), 5.0)
    config = SolverConfig(clamp_upwind=False)
    phi = propagate(phi0, 5.0, RosParams(0.1, 0.2), WindSeries.constant(3.0, 0.0), config)
    assert np.all(np.isfinite(phi.values))
    vertices = extract_contour(phi).vertices()
    # upwind side moves back at 0.5 m/s, downwind side forward at 0.7 m/s
    assert vertices[:, 0].min() == pytest.approx(15.0 - 5.0 + 2.5, abs=0.5)
    assert vertices[:, 0].max() == pytest.approx(15.0 + 5.0 + 3.5, abs=0.5)


def test_noise_has_the_requested_marginal_spread() -> None:
    noise = smoothed_noise((200, 200), 0.5, np.random.default_rng(7))
    assert noise.std() == pytest.approx(0.5, rel=0.1)
    assert abs(noise.mean()) < 0.05


def test_noise_needs_a_generator_and_is_reproducible(grid: Grid) -> None:
    phi = signed_distance_circle(grid, (20.0, 20.0), 3.0)
    noisy = SolverConfig(noise_sigma=0.05)
    with pytest.raises(ValueError):
        propagate(phi, 2.0, RosParams(0.1, 0.0), CALM, noisy)
    a = propagate(phi, 2.0, RosParams(0.1, 0.0), CALM, noisy, np.random.default_rng(11))
    b = propagate(phi, 2.0, RosParams(0.1, 0.0), CALM, noisy, np.random.default_rng(11))
    np.testing.assert_array_equal(a.values, b.values)


@pytest.mark.slow
def test_refining_the_grid_does_not_increase_the_radius_error() -> None:
    errors = []
    for n, dx in ((100, 0.5), (200, 0.25)):
        g = Grid(nx=n, ny=n, dx=dx, dy=dx)
        phi = propagate(signed_distance_circle(g, (25.0, 25.0), 5.0), 20.0, RosParams(0.5, 0.0), CALM, SolverConfig())
        errors.append(abs(float(_radii(extract_contour(phi).vertices(), (25.0, 25.0)).mean()) - 15.0))
    assert errors[1] <= max(errors[0], 0.05)


@pytest.mark.slow
def test_first_order_scheme_converges_at_first_order() -> None:
    errors = []
    for n, dx in ((100, 0.5), (200, 0.25)):
        g = Grid(nx=n, ny=n, dx=dx, dy=dx)
        phi = propagate(
            signed_distance_circle(g, (25.0, 25.0), 5.0), 20.0, RosParams(0.5, 0.0), CALM, SolverConfig(eno_order=1)
        )
        errors.append(abs(float(_radii(extract_contour(phi).vertices(), (25.0, 25.0)).mean()) - 15.0))
    assert 1.5 <= errors[0] / errors[1] <= 3.0
