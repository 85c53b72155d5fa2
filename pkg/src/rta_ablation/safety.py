# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Safety semantics of each environment: constraint functions phi_i, explicit
control-invariant constraints h_i with analytic gradients, backup controllers
and the backup rollout used by the implicit filters.
"""

# Imports #####################################################################

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from rta_ablation.exceptions import ConfigurationError

if TYPE_CHECKING:
    from rta_ablation.envs import DockingParams, PendulumParams

logger = logging.getLogger(__name__)

PENDULUM_BACKUP_GAIN = 32.0 / np.pi
DOCKING_BACKUP_GAIN = 0.2
DOCKING_REST_SPEED = 0.01

PENDULUM_HORIZON = 100
DOCKING_HORIZON = 500

# Classes #####################################################################


@dataclass(frozen=True)
class SafetySpec:
    """
    Everything the RTA filters need to know about an environment's safety

    Attributes
    ----------
    env_kind : str
        Environment kind the spec was built for
    constraint_names : tuple of str
        Names of the phi_i, in the order ``constraints`` returns them
    constraints : callable
        state -> np.ndarray of phi_i values
    backup : callable
        state -> action within the actuator bounds
    horizon : int
        Backup rollout length for the implicit filters
    early_exit : callable
        state -> bool; states from which the backup is known to stay admissible
    lipschitz : tuple of float
        Lipschitz constant of each phi_i over the admissible set
    explicit_h : callable, optional
        state -> (values, jacobian) of the explicit safe set; None when the
        environment only supports implicit filters
    """

    env_kind: str
    constraint_names: tuple
    constraints: Callable
    backup: Callable
    horizon: int
    early_exit: Callable
    lipschitz: tuple
    explicit_h: Optional[Callable] = None

    def admissible(self, state) -> bool:
        return admissible(self.constraints(state))

    def member(self, state) -> bool:
        """Explicit safe-set membership"""
        if self.explicit_h is None:
            raise ConfigurationError(f"{self.env_kind} has no explicit safe set")
        values, _ = self.explicit_h(state)
        return bool(np.all(values >= 0))


# Functions ###################################################################


def admissible(constraint_values) -> bool:
    """True when every phi_i is non-negative"""
    return bool(np.all(np.asarray(constraint_values) >= 0))


# Pendulum ####################################################################


def pendulum_phi(state, params: Optional["PendulumParams"] = None) -> float:
    """phi_1 = 1 - |theta|"""
    limit = params.theta_limit if params is not None else 1.0
    return float(limit - abs(state[0]))


def pendulum_constraints(state, params: Optional["PendulumParams"] = None) -> np.ndarray:
    return np.array([pendulum_phi(state, params)])


def pendulum_backup(state, params: Optional["PendulumParams"] = None) -> np.ndarray:
    """
    Proportional upright-holding law -(32/pi) theta, clamped to the torque bound

    Returns
    -------
    torque : np.ndarray
        Shape (1,)
    """
    bound = params.torque_bound if params is not None else 15.0
    torque = np.clip(-PENDULUM_BACKUP_GAIN * state[0], -bound, bound)
    return np.array([torque], dtype=np.float64)


def pendulum_in_initial_box(state, params: Optional["PendulumParams"] = None) -> bool:
    theta_bound = params.init_theta_bound if params is not None else 0.8
    omega_bound = params.init_omega_bound if params is not None else 1.0
    return bool(abs(state[0]) <= theta_bound and abs(state[1]) <= omega_bound)


# Docking #####################################################################


def docking_phis(state, params: "DockingParams") -> np.ndarray:
    """
    Docking constraints [speed limit, |xdot|, |ydot|, |zdot|]

    The speed limit is nu_D - nu_H + c d_H; the velocity limits are
    v_max^2 - v_axis^2. In 2D the z entry is identically v_max^2.
    """
    state = np.asarray(state, dtype=np.float64)
    distance = np.linalg.norm(state[:3])
    speed = np.linalg.norm(state[3:])
    v_max_sq = params.v_max**2
    return np.array(
        [
            params.docking_speed - speed + params.speed_limit_slope * distance,
            v_max_sq - state[3] ** 2,
            v_max_sq - state[4] ** 2,
            v_max_sq - state[5] ** 2,
        ]
    )


def docking_explicit_h(state, params: "DockingParams"):
    """
    Explicit safe set h_i = phi_i with analytic gradients

    The gradient of the speed limit w.r.t. velocity is -v / nu_H, taken as 0
    at rest; w.r.t. position it is c p / d_H, taken as 0 at the origin.

    Parameters
    ----------
    state : array-like
        Docking state, 6 entries
    params : DockingParams
        Task constants

    Returns
    -------
    values : np.ndarray
        Shape (4,)
    jacobian : np.ndarray
        Shape (4, 6), row i is grad h_i
    """
    state = np.asarray(state, dtype=np.float64)
    position, velocity = state[:3], state[3:]
    distance = np.linalg.norm(position)
    speed = np.linalg.norm(velocity)

    jacobian = np.zeros((4, 6))
    if distance > 0:
        jacobian[0, :3] = params.speed_limit_slope * position / distance
    if speed > 0:
        jacobian[0, 3:] = -velocity / speed
    for axis in range(3):
        jacobian[axis + 1, 3 + axis] = -2.0 * velocity[axis]
    return docking_phis(state, params), jacobian


def docking_backup(state, params: "DockingParams", dims: int = 3, gain: float = DOCKING_BACKUP_GAIN) -> np.ndarray:
    """
    Per-axis velocity damping u = clip(-k_v m v, -F, F)

    Parameters
    ----------
    state : array-like
        Docking state
    params : DockingParams
        Vehicle mass and force bound
    dims : int
        Number of force entries returned
    gain : float
        k_v in 1/s

    Returns
    -------
    force : np.ndarray
        Shape (dims,)
    """
    velocity = np.asarray(state, dtype=np.float64)[3 : 3 + dims]
    return np.clip(-gain * params.mass * velocity, -params.force_bound, params.force_bound)


def docking_near_rest(state, speed: float = DOCKING_REST_SPEED) -> bool:
    return bool(np.linalg.norm(np.asarray(state)[3:]) <= speed)


# Rollout #####################################################################


def rollout_backup(state, backup: Callable, dynamics: Callable, k: int, stop: Optional[Callable] = None) -> np.ndarray:
    """
    Closed-loop trajectory of the backup controller

    Parameters
    ----------
    state : array-like
        Start state (not included in the output)
    backup : callable
        state -> action
    dynamics : callable
        The live step function, state, action -> next_state
    k : int
        Number of steps, at least 1
    stop : callable, optional
        state -> bool; the rollout ends after the first state for which it
        holds

    Returns
    -------
    trajectory : np.ndarray
        Shape (steps, state_dim); rows are phi_1(state) .. phi_steps(state)
    """
    if k < 1:
        raise ConfigurationError(f"backup horizon must be >= 1, got {k}")
    current = np.asarray(state, dtype=np.float64)
    trajectory = []
    for _ in range(k):
        current = dynamics(current, backup(current))
        trajectory.append(current)
        if stop is not None and stop(current):
            break
    return np.array(trajectory)


def make_safety_spec(env_kind: str, params=None, horizon: Optional[int] = None) -> SafetySpec:
    """
    Bundle the safety semantics of an environment kind

    Parameters
    ----------
    env_kind : str
        pendulum, docking2d or docking3d
    params : PendulumParams or DockingParams, optional
        Defaults to the standard constants
    horizon : int, optional
        Override of the implicit backup horizon

    Returns
    -------
    SafetySpec
    """
    from rta_ablation.envs import default_params, dims_for

    dims = dims_for(env_kind)
    params = params or default_params(env_kind)

    if env_kind == "pendulum":
        return SafetySpec(
            env_kind=env_kind,
            constraint_names=("theta_limit",),
            constraints=lambda state: pendulum_constraints(state, params),
            backup=lambda state: pendulum_backup(state, params),
            horizon=horizon or PENDULUM_HORIZON,
            early_exit=lambda state: pendulum_in_initial_box(state, params),
            lipschitz=(1.0,),
            explicit_h=None,
        )

    velocity_lipschitz = 2.0 * params.v_max
    return SafetySpec(
        env_kind=env_kind,
        constraint_names=("speed_limit", "max_xdot", "max_ydot", "max_zdot"),
        constraints=lambda state: docking_phis(state, params),
        backup=lambda state: docking_backup(state, params, dims),
        horizon=horizon or DOCKING_HORIZON,
        early_exit=docking_near_rest,
        lipschitz=(max(1.0, params.speed_limit_slope),) + (velocity_lipschitz,) * 3,
        explicit_h=lambda state: docking_explicit_h(state, params),
    )
