# -*- coding: utf-8 -*-

import numpy as np
import pytest

from rta_ablation.envs import make_dynamics
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.safety import (
    admissible,
    docking_backup,
    docking_explicit_h,
    docking_near_rest,
    docking_phis,
    make_safety_spec,
    pendulum_backup,
    pendulum_phi,
    rollout_backup,
)


def test_pendulum_phi():
    assert pendulum_phi([0.25, 3.0]) == pytest.approx(0.75)
    assert pendulum_phi([-1.25, 0.0]) == pytest.approx(-0.25)


@pytest.mark.parametrize("theta, torque", [(-0.1, 1.0186), (np.pi / 2, -15.0), (-np.pi / 2, 15.0), (0.0, 0.0)])
def test_pendulum_backup(theta, torque):
    action = pendulum_backup([theta, 0.0])
    assert action.shape == (1,)
    assert action[0] == pytest.approx(torque, abs=1e-4)


def test_docking_speed_limit_at_rest(docking_params):
    phis = docking_phis([100.0, 0.0, 0.0, 0.0, 0.0, 0.0], docking_params)
    assert phis[0] == pytest.approx(0.4054)
    np.testing.assert_allclose(phis[1:], 100.0)


def test_docking_velocity_limits(docking_params):
    phis = docking_phis([100.0, 0.0, 0.0, 0.0, -11.0, 0.0], docking_params)
    assert phis[2] == pytest.approx(100.0 - 121.0)
    assert not admissible(phis)


def test_docking_explicit_gradient_matches_differences(docking_params, rng):
    for _ in range(10):
        state = np.concatenate([rng.uniform(-120, 120, 3), rng.uniform(-2, 2, 3)])
        _, jacobian = docking_explicit_h(state, docking_params)
        numeric = np.zeros_like(jacobian)
        for j in range(6):
            offset = np.zeros(6)
            offset[j] = 1e-6
            upper, _ = docking_explicit_h(state + offset, docking_params)
            lower, _ = docking_explicit_h(state - offset, docking_params)
            numeric[:, j] = (upper - lower) / 2e-6
        np.testing.assert_allclose(jacobian, numeric, atol=1e-6)


def test_docking_backup_damps_and_saturates(docking_params):
    slow = docking_backup([0, 0, 0, 0.1, -0.2, 0.0], docking_params, dims=3)
    np.testing.assert_allclose(slow, [-0.24, 0.48, 0.0])
    fast = docking_backup([0, 0, 0, 5.0, -5.0, 1.0], docking_params, dims=2)
    np.testing.assert_allclose(fast, [-1.0, 1.0])


def test_near_rest():
    assert docking_near_rest([100, 0, 0, 0.005, 0.005, 0.0])
    assert not docking_near_rest([100, 0, 0, 0.02, 0.0, 0.0])


def test_rollout_stops_early():
    trajectory = rollout_backup(
        [1.0], backup=lambda s: np.zeros(1), dynamics=lambda s, u: s - 0.25, k=10, stop=lambda s: s[0] <= 0.5
    )
    np.testing.assert_allclose(trajectory[:, 0], [0.75, 0.5])


def test_rollout_rejects_zero_horizon():
    with pytest.raises(ConfigurationError):
        rollout_backup([0.0], lambda s: s, lambda s, u: s, k=0)


def test_pendulum_backup_keeps_initial_box_admissible():
    spec = make_safety_spec("pendulum")
    dynamics = make_dynamics("pendulum")
    for corner in ([0.8, 1.0], [-0.8, -1.0], [0.8, -1.0], [-0.8, 1.0]):
        trajectory = rollout_backup(corner, spec.backup, dynamics, spec.horizon)
        assert np.all(np.abs(trajectory[:, 0]) < 1.0)
    # the upright-holding law pulls theta back from the edge of the box
    first = rollout_backup([0.8, 0.0], spec.backup, dynamics, 1)[0]
    assert first[0] < 0.8


@pytest.mark.parametrize("env_kind", ["docking2d", "docking3d"])
def test_docking_backup_keeps_boundary_state_admissible(env_kind):
    spec = make_safety_spec(env_kind)
    dynamics = make_dynamics(env_kind)
    # moving straight at the chief on the speed limit
    state = np.array([100.0, 0.0, 0.0, -0.405, 0.0, 0.0])
    assert spec.admissible(state)
    trajectory = rollout_backup(state, spec.backup, dynamics, spec.horizon, stop=spec.early_exit)
    assert all(spec.admissible(rolled) for rolled in trajectory)
    assert spec.early_exit(trajectory[-1])


def test_safety_spec_shapes():
    pendulum = make_safety_spec("pendulum")
    assert pendulum.explicit_h is None
    assert pendulum.horizon == 100
    with pytest.raises(ConfigurationError):
        pendulum.member([0.0, 0.0])

    docking = make_safety_spec("docking3d", horizon=50)
    assert docking.horizon == 50
    assert docking.constraint_names[0] == "speed_limit"
    assert docking.lipschitz == (1.0, 20.0, 20.0, 20.0)
    assert docking.member([100.0, 0.0, 0.0, 0.0, 0.0, 0.0])
