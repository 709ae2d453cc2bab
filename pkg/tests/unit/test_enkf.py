from typing import Any

import numpy as np
import pytest

from firefilter.assimilation.enkf import (
    enkf_analysis,
    enkf_init,
    enkf_run,
    ensemble_mean_params,
    observe,
    perturb_observation,
    random_walk,
)
from firefilter.data.config import config_from_dict
from firefilter.data.synthetic import simulate_fronts
from firefilter.field.contour import extract_contour
from firefilter.field.geometry import ignition_field, signed_distance_circle
from firefilter.utils.models import Grid, Observation, RosPrior, WindSeries


def test_analysis_matches_the_kalman_gain_formula() -> None:
    rng = np.random.default_rng(0)
    n = 12
    states = rng.normal([[0.1], [0.2]], [[0.02], [0.05]], size=(2, n))
    operator = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    predicted = operator @ states + 0.01 * rng.standard_normal((3, n))
    perturbed = np.array([[0.12], [0.3], [0.27]]) + 0.05 * rng.standard_normal((3, n))
    r = 0.01

    x_anom = states - states.mean(axis=1, keepdims=True)
    y_anom = predicted - predicted.mean(axis=1, keepdims=True)
    c_xy = x_anom @ y_anom.T / (n - 1)
    c_yy = y_anom @ y_anom.T / (n - 1)
    expected = states + c_xy @ np.linalg.solve(c_yy + r * np.eye(3), perturbed - predicted)

    np.testing.assert_allclose(enkf_analysis(states, predicted, perturbed, r), expected, atol=1e-9)


def test_analysis_pulls_a_linear_ensemble_to_the_truth() -> None:
    rng = np.random.default_rng(1)
    truth = np.array([0.3, -0.1])
    operator = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    states = rng.normal(0.0, 0.5, size=(2, 50))
    perturbed = perturb_observation(operator @ truth, 50, 1e-4, rng)
    updated = enkf_analysis(states, operator @ states, perturbed, 1e-4)
    assert updated is not None
    before = np.linalg.norm(states.mean(axis=1) - truth)
    after = np.linalg.norm(updated.mean(axis=1) - truth)
    assert after < 0.1 * before


def test_collapsed_ensemble_is_left_unchanged() -> None:
    states = np.tile([[0.1], [0.15]], (1, 5))
    predicted = np.tile([[0.2], [0.4], [0.0]], (1, 5))
    perturbed = predicted + 1.0
    np.testing.assert_allclose(enkf_analysis(states, predicted, perturbed, 0.05), states, atol=1e-12)


def test_singular_gain_skips_the_update() -> None:
    states = np.tile([[0.1], [0.15]], (1, 4))
    predicted = np.zeros((3, 4))
    assert enkf_analysis(states, predicted, predicted + 1.0, 0.0) is None


def test_analysis_checks_its_inputs() -> None:
    with pytest.raises(ValueError):
        enkf_analysis(np.ones((2, 1)), np.ones((3, 1)), np.ones((3, 1)), 0.1)
    with pytest.raises(ValueError):
        enkf_analysis(np.ones((2, 4)), np.ones((3, 4)), np.ones((3, 5)), 0.1)


def test_observation_perturbations() -> None:
    obs = np.linspace(0.0, 1.0, 400)
    np.testing.assert_array_equal(perturb_observation(obs, 3, 0.0, np.random.default_rng(0)), np.tile(obs[:, None], 3))
    perturbed = perturb_observation(obs, 50, 0.04, np.random.default_rng(0))
    assert perturbed.shape == (400, 50)
    assert np.var(perturbed - obs[:, None]) == pytest.approx(0.04, rel=0.05)


def test_random_walk_clamps_beta() -> None:
    states = np.array([[0.0, 0.0, 0.5], [0.1, 0.2, 0.3]])
    np.testing.assert_array_equal(random_walk(states, 0.0, 0.0, np.random.default_rng(0)), states)
    walked = random_walk(states, 1.0, 1e-4, np.random.default_rng(3))
    assert np.all(walked[0] >= 0)
    assert np.all(np.abs(walked[1] - states[1]) < 0.1)


def test_ensemble_mean_params_clamps_beta() -> None:
    mean = ensemble_mean_params(np.array([[-0.2, 0.1], [0.1, 0.3]]))
    assert mean.beta == 0.0
    assert mean.gamma == pytest.approx(0.2)
    members = enkf_init(RosPrior(0.1, 0.02, 0.15, 0.03), 5, 1e-5, 1e-4, 0.05, seed=1)
    expected = members.states.mean(axis=1)
    assert ensemble_mean_params(members.states).as_array() == pytest.approx(expected)


def test_enkf_init_draws_reproducible_members() -> None:
    prior = RosPrior(0.1, 0.02, 0.15, 0.03)
    a = enkf_init(prior, 6, 1e-5, 1e-4, 0.05, seed=3)
    b = enkf_init(prior, 6, 1e-5, 1e-4, 0.05, seed=3)
    assert a.members == b.members
    assert a.states.shape == (2, 6)
    with pytest.raises(ValueError):
        enkf_init(prior, 1, 1e-5, 1e-4, 0.05, seed=3)


def test_observation_vector_is_block_averaged(grid: Grid) -> None:
    front = extract_contour(signed_distance_circle(grid, (20.0, 20.0), 6.0))
    vector = observe(front, grid, sigma_blur=2.0, factor=3)
    assert vector.shape == (27 * 27,)
    assert 0.0 < vector.max() <= 1.0


def test_enkf_run_with_a_collapsed_ensemble_keeps_its_parameters(run_config: dict[str, Any]) -> None:
    run_config["prior"] = {"mu_beta": 0.1, "sigma_beta": 0.0, "mu_gamma": 0.15, "sigma_gamma": 0.0}
    run_config["filter"].update({"q_beta": 0.0, "q_gamma": 0.0})
    config = config_from_dict(run_config)
    wind = WindSeries.constant(1.0, 0.0)
    phi0 = ignition_field(config.grid, config.ignition)
    fronts, _ = simulate_fronts(phi0, [10.0, 20.0], config.params, wind, config.solver)
    observations = [Observation(f.time, f) for f in fronts]

    output = enkf_run(config.grid, config.ignition, config.prior, observations, wind, config)

    assert output.kind == "enkf"
    assert [c.time for c in output.cycles] == [10.0, 20.0, 30.0]
    assert [c.has_observation for c in output.cycles] == [True, True, False]
    for cycle in output.cycles:
        np.testing.assert_allclose(cycle.params, np.tile([0.1, 0.15], (4, 1)), atol=1e-12)
        assert not cycle.skipped
        assert cycle.ess == 4.0
        assert len(cycle.members) == 3
    np.testing.assert_allclose(output.final_params, [0.1, 0.15])
    assert output.flags == {"degenerate": [], "skipped_update": []}
