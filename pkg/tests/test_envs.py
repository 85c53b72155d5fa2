# -*- coding: utf-8 -*-

import numpy as np
import pytest

from rta_ablation.envs import (
    DockingEnv,
    DockingParams,
    PendulumEnv,
    PendulumParams,
    Terminal,
    control_matrix,
    docking_dynamics,
    docking_matrices,
    docking_observe,
    docking_step,
    evaluation_reward,
    make_dynamics,
    make_env,
    observe,
    pendulum_dynamics,
    pendulum_step,
    safety_reward_components,
    sample_initial_state,
)
from rta_ablation.exceptions import ConfigurationError, InvariantViolation


def test_pendulum_dynamics_from_half_radian(pendulum_params):
    next_state = pendulum_dynamics([0.5, 0.0], 0.0, pendulum_params)
    np.testing.assert_allclose(next_state, [0.5179785, 0.359569], atol=1e-6)


def test_pendulum_torque_is_clipped(pendulum_params):
    clipped = pendulum_dynamics([0.0, 0.0], 100.0, pendulum_params)
    bounded = pendulum_dynamics([0.0, 0.0], 15.0, pendulum_params)
    np.testing.assert_allclose(clipped, bounded)


def test_pendulum_theta_uses_pre_step_omega(pendulum_params):
    # upright with zero torque: only the omega * dt term moves theta
    next_state = pendulum_dynamics([0.0, 1.0], 0.0, pendulum_params)
    np.testing.assert_allclose(next_state, [0.05, 1.0], atol=1e-12)


def test_pendulum_step_violation_terminates(pendulum_params):
    outcome = pendulum_step([0.99, 2.0], 0.0, pendulum_params)
    assert outcome.safety_violated
    assert outcome.terminal == Terminal.CONSTRAINT_VIOLATION
    assert outcome.done


def test_pendulum_step_timeout(pendulum_params):
    outcome = pendulum_step([0.0, 0.0], 0.0, pendulum_params, steps_taken=199)
    assert outcome.terminal == Terminal.TIMEOUT
    assert outcome.steps == 200


def test_pendulum_reward_upright_at_rest(pendulum_params):
    outcome = pendulum_step([0.0, 0.0], 0.0, pendulum_params)
    assert outcome.reward == pytest.approx(5.0)


def test_pendulum_reward_on_next_state_switch():
    params = PendulumParams(reward_on_next_state=True)
    outcome = pendulum_step([0.5, 0.0], 0.0, params)
    theta, omega = outcome.next_state
    assert outcome.reward == pytest.approx(5.0 - theta**2 - 0.1 * omega**2)


def test_non_finite_state_is_a_hard_fault(pendulum_params):
    with pytest.raises(InvariantViolation):
        pendulum_dynamics([np.nan, 0.0], 0.0, pendulum_params)


def test_docking_matrices_match_printed_values(docking_params):
    A, B = docking_matrices(docking_params, dims=3)
    n = docking_params.mean_motion
    assert A[3, 0] == pytest.approx(3 * n**2)
    assert A[3, 4] == pytest.approx(2 * n)
    assert A[4, 3] == pytest.approx(-2 * n)
    assert A[5, 2] == pytest.approx(-(n**2))
    np.testing.assert_allclose(np.diag(A), np.ones(6))
    assert B.shape == (6, 3)
    assert B[3, 0] == pytest.approx(1 / 12)


def test_docking_2d_input_matrix_keeps_xy(docking_params):
    _, B = docking_matrices(docking_params, dims=2)
    assert B.shape == (6, 2)
    assert not B[5].any()


def test_docking_proximity_reward(docking_params):
    state = np.array([120.0, 0.0, 0.0, -1.0, 0.0, 0.0])
    outcome = docking_step(state, [0.0, 0.0], docking_params, dims=2)
    assert outcome.next_state[0] == pytest.approx(119.0)
    assert outcome.reward == pytest.approx(0.0125)
    assert outcome.terminal == Terminal.NONE


@pytest.mark.parametrize(
    "state, terminal, reward_sign",
    [
        ([20.5, 0.0, 0.0, -1.0, 0.0, 0.0], Terminal.CRASHED, -1),
        ([20.1, 0.0, 0.0, -0.15, 0.0, 0.0], Terminal.DOCKED, 1),
        ([199.5, 0.0, 0.0, 1.0, 0.0, 0.0], Terminal.OUT_OF_BOUNDS, -1),
    ],
)
def test_docking_terminal_conditions(docking_params, state, terminal, reward_sign):
    outcome = docking_step(state, [0.0, 0.0, 0.0], docking_params, dims=3)
    assert outcome.terminal == terminal
    assert np.sign(outcome.reward) == reward_sign


def test_docking_violation_does_not_terminate(docking_params):
    state = np.array([100.0, 0.0, 0.0, -5.0, 0.0, 0.0])
    outcome = docking_step(state, [0.0, 0.0, 0.0], docking_params, dims=3)
    assert outcome.safety_violated
    assert outcome.terminal == Terminal.NONE


def test_docking_2d_keeps_z_at_zero(docking_params):
    state = np.array([100.0, 50.0, 0.0, 0.1, -0.2, 0.0])
    outcome = docking_step(state, [0.5, 0.5, 0.5], docking_params, dims=2)
    assert outcome.next_state[2] == 0.0
    assert outcome.next_state[5] == 0.0
    assert outcome.observation.shape == (4,)


def test_docking_2d_is_the_planar_slice_of_3d(docking_params, rng):
    for _ in range(50):
        state = np.zeros(6)
        state[[0, 1]] = rng.uniform(-150.0, 150.0, size=2)
        state[[3, 4]] = rng.uniform(-1.0, 1.0, size=2)
        force = rng.uniform(-1.5, 1.5, size=2)
        planar = docking_step(state, force, docking_params, dims=2)
        spatial = docking_step(state, np.append(force, 0.0), docking_params, dims=3)
        np.testing.assert_array_equal(planar.next_state, spatial.next_state)
        assert planar.reward == spatial.reward
        assert planar.terminal == spatial.terminal
        assert planar.safety_violated == spatial.safety_violated


@pytest.mark.parametrize("env_kind", ["docking2d", "docking3d"])
def test_docking_dynamics_closure_matches_kernel(env_kind, docking_params, rng):
    dims = 2 if env_kind == "docking2d" else 3
    dynamics = make_dynamics(env_kind, docking_params)
    for _ in range(10):
        state = sample_initial_state(env_kind, rng, docking_params)
        state[3 : 3 + dims] = rng.uniform(-0.5, 0.5, size=dims)
        force = rng.uniform(-1.0, 1.0, size=dims)
        expected = docking_dynamics(state, force, docking_params, dims)
        np.testing.assert_allclose(dynamics(state, force), expected, rtol=0, atol=1e-12)


def test_docking_action_size_checked(docking_params):
    with pytest.raises(ConfigurationError):
        docking_step(np.zeros(6) + 100.0, [0.1], docking_params, dims=3)


def test_observations(pendulum_params):
    np.testing.assert_allclose(observe("pendulum", [0.0, 2.0]), [1.0, 0.0, 2.0])
    state = np.arange(6, dtype=float)
    np.testing.assert_allclose(docking_observe(state, 2), [0.0, 1.0, 3.0, 4.0])
    np.testing.assert_allclose(observe("docking3d", state), state)


@pytest.mark.parametrize("env_kind", ["pendulum", "docking2d", "docking3d"])
def test_initial_states_within_distribution(env_kind, rng):
    for _ in range(50):
        state = sample_initial_state(env_kind, rng)
        if env_kind == "pendulum":
            assert abs(state[0]) <= 0.8 and abs(state[1]) <= 1.0
        else:
            distance = np.linalg.norm(state[:3])
            assert 100.0 <= distance <= 150.0
            np.testing.assert_allclose(state[3:], 0.0)
            if env_kind == "docking2d":
                assert state[2] == 0.0


def test_safety_reward_components(docking_params, pendulum_params):
    fast = np.array([100.0, 0.0, 0.0, 12.0, 0.0, 0.0])
    components = safety_reward_components(fast, True, docking_params)
    assert components["intervention"] == pytest.approx(-0.001)
    assert components["over_max_velocity"] == pytest.approx(-0.1 - 0.1 * 2.0)
    assert safety_reward_components([0.0, 0.0], True, pendulum_params) == {
        "intervention": 0.0,
        "over_max_velocity": 0.0,
    }


def test_evaluation_reward_adds_intervention(docking_params):
    state = np.array([120.0, 0.0, 0.0, -1.0, 0.0, 0.0])
    outcome = docking_step(state, [0.0, 0.0], docking_params, dims=2)
    assert evaluation_reward(outcome, True, docking_params) == pytest.approx(0.0125 - 0.001)


@pytest.mark.parametrize("env_kind", ["pendulum", "docking2d", "docking3d"])
def test_dynamics_are_control_affine(env_kind, rng):
    dynamics = make_dynamics(env_kind)
    B = control_matrix(env_kind)
    state = sample_initial_state(env_kind, rng)
    u = rng.uniform(-0.5, 0.5, size=B.shape[1])
    np.testing.assert_allclose(dynamics(state, u), dynamics(state, np.zeros_like(u)) + B @ u, atol=1e-12)


def test_gymnasium_contract():
    env = make_env("pendulum")
    assert isinstance(env, PendulumEnv)
    obs, info = env.reset(options={"state": [0.1, 0.0]})
    assert env.observation_space.shape == obs.shape
    obs, reward, terminated, truncated, info = env.step(np.array([0.0]))
    assert not terminated and not truncated
    assert info["outcome"].steps == 1
    assert isinstance(reward, float)


def test_gymnasium_truncates_on_timeout():
    env = PendulumEnv(PendulumParams(max_episode_steps=3))
    env.reset(options={"state": [0.0, 0.0]})
    results = [env.step(np.array([0.0])) for _ in range(3)]
    assert results[-1][3] and not results[-1][2]


def test_docking_env_dims_checked():
    with pytest.raises(ConfigurationError):
        DockingEnv(dims=4)
    assert make_env("docking2d").action_space.shape == (2,)


def test_docking_params_validated():
    with pytest.raises(ConfigurationError):
        DockingParams(init_radius_min=10.0)


def test_pendulum_return_is_at_most_1000(pendulum_params, rng):
    env = PendulumEnv(pendulum_params)
    env.reset(options={"state": np.zeros(2)})
    total, done = 0.0, False
    while not done:
        _, reward, terminated, truncated, _ = env.step([0.0])
        total += reward
        done = terminated or truncated
    assert total == pytest.approx(1000.0)
    for _ in range(5):
        env.reset(seed=int(rng.integers(1 << 31)))
        total, done = 0.0, False
        while not done:
            _, reward, terminated, truncated, _ = env.step(rng.uniform(-15.0, 15.0, size=1))
            total += reward
            done = terminated or truncated
        assert total <= 1000.0


def test_pendulum_violation_on_last_step_is_not_a_timeout(pendulum_params):
    outcome = pendulum_step([0.99, 3.0], 15.0, pendulum_params, steps_taken=199)
    assert outcome.safety_violated
    assert outcome.terminal == Terminal.CONSTRAINT_VIOLATION


def test_docking_arrival_on_last_step_is_not_a_timeout(docking_params):
    outcome = docking_step([20.1, 0.0, 0.0, -0.15, 0.0, 0.0], [0.0, 0.0, 0.0], docking_params, dims=3, steps_taken=999)
    assert outcome.terminal == Terminal.DOCKED


@pytest.mark.parametrize("env_kind", ["pendulum", "docking2d"])
def test_one_terminal_reason_per_episode(env_kind, rng):
    env = make_env(env_kind)
    bound = env.action_space.high
    for _ in range(3):
        env.reset(seed=int(rng.integers(1 << 31)))
        reasons = []
        done = False
        while not done:
            _, _, terminated, truncated, info = env.step(rng.uniform(-bound, bound))
            done = terminated or truncated
            assert not (terminated and truncated)
            if info["terminal"] != Terminal.NONE.value:
                reasons.append(info["terminal"])
        assert len(reasons) == 1
