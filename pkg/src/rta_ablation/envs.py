# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Deterministic discrete-time environments for the RTA ablation: an inverted
pendulum and the Clohessy-Wiltshire spacecraft docking problem in 2D and 3D.

The step kernels are pure functions over numpy state vectors. The gymnasium
classes at the bottom only own the step counter and the initial-condition RNG.
"""

# Imports #####################################################################

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
import gymnasium as gym
from gymnasium import spaces

from rta_ablation.exceptions import ConfigurationError, InvariantViolation
from rta_ablation.safety import docking_phis, pendulum_phi

logger = logging.getLogger(__name__)

ENV_KINDS = ("pendulum", "docking2d", "docking3d")

# Classes #####################################################################


class Terminal(str, Enum):
    """Reason an episode ended; exactly one fires per episode end"""

    NONE = "none"
    DOCKED = "docked"
    CRASHED = "crashed"
    OUT_OF_BOUNDS = "out_of_bounds"
    CONSTRAINT_VIOLATION = "constraint_violation"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class PendulumParams:
    """Physical and episode constants of the pendulum task"""

    g: float = 10.0
    l: float = 1.0
    m: float = 1.0
    dt: float = 0.05
    torque_bound: float = 15.0
    theta_limit: float = 1.0
    init_theta_bound: float = 0.8
    init_omega_bound: float = 1.0
    max_episode_steps: int = 200
    reward_offset: float = 5.0
    punishment: float = -1.0
    omega_limit: float = 60.0
    reward_on_next_state: bool = False

    def __post_init__(self):
        positive = {
            key: value
            for key, value in self.__dict__.items()
            if key not in ("punishment", "reward_on_next_state")
        }
        for key, value in positive.items():
            if not value > 0:
                raise ConfigurationError(f"PendulumParams.{key} must be > 0, got {value}")
        if not self.punishment < 0:
            raise ConfigurationError(
                f"PendulumParams.punishment must be < 0, got {self.punishment}"
            )


@dataclass(frozen=True)
class DockingParams:
    """Clohessy-Wiltshire docking constants (SI units)"""

    mean_motion: float = 0.001027
    mass: float = 12.0
    force_bound: float = 1.0
    docking_radius: float = 20.0
    docking_speed: float = 0.2
    oob_radius: float = 200.0
    init_radius_min: float = 100.0
    init_radius_max: float = 150.0
    v_max: float = 10.0
    max_episode_steps: int = 1000
    dt: float = 1.0
    proximity_coeff: float = 0.0125
    rta_punishment: float = -0.001
    terminal_reward: float = 1.0
    over_velocity_base: float = -0.1
    over_velocity_slope: float = -0.1

    def __post_init__(self):
        if not (
            self.docking_radius < self.init_radius_min <= self.init_radius_max < self.oob_radius
        ):
            raise ConfigurationError(
                "DockingParams requires docking_radius < init_radius_min <= "
                "init_radius_max < oob_radius"
            )
        if not self.docking_speed < self.v_max:
            raise ConfigurationError("DockingParams requires docking_speed < v_max")
        if not (self.mean_motion > 0 and self.mass > 0 and self.dt > 0 and self.force_bound > 0):
            raise ConfigurationError("DockingParams mean_motion, mass, dt, force_bound must be > 0")

    @property
    def speed_limit_slope(self) -> float:
        """The constant c of the distance dependent speed limit, 2n per second"""
        return 2.0 * self.mean_motion

    @property
    def init_radius_range(self) -> tuple:
        return (self.init_radius_min, self.init_radius_max)

    @property
    def punishment(self) -> float:
        return self.rta_punishment


EnvParams = Union[PendulumParams, DockingParams]


@dataclass(frozen=True)
class StepOutcome:
    """Everything one environment step produces"""

    next_state: np.ndarray
    observation: np.ndarray
    reward: float
    terminal: Terminal = Terminal.NONE
    safety_violated: bool = False
    steps: int = 0
    info: dict = field(default_factory=dict)

    @property
    def done(self) -> bool:
        return self.terminal != Terminal.NONE


# Functions ###################################################################


def _check_finite(name: str, values) -> np.ndarray:
    """Return values as a float64 array, raising on NaN or inf"""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InvariantViolation(f"non-finite {name}: {values}")
    return values


def dims_for(env_kind: str) -> int:
    """Spatial dimension of a docking env kind (the pendulum has none)"""
    if env_kind == "docking2d":
        return 2
    if env_kind == "docking3d":
        return 3
    if env_kind == "pendulum":
        return 1
    raise ConfigurationError(f"unknown env kind {env_kind!r}; expected one of {ENV_KINDS}")


def default_params(env_kind: str) -> EnvParams:
    """Standard constants for an env kind"""
    dims_for(env_kind)
    if env_kind == "pendulum":
        return PendulumParams()
    return DockingParams()


def action_dim(env_kind: str) -> int:
    return dims_for(env_kind)


def action_bound(params: EnvParams) -> float:
    """Symmetric per-axis actuator bound in environment units"""
    if isinstance(params, PendulumParams):
        return params.torque_bound
    return params.force_bound


def observation_dim(env_kind: str) -> int:
    if env_kind == "pendulum":
        return 3
    return 2 * dims_for(env_kind)


# Pendulum ####################################################################


def alias_angle(theta):
    """Wrap an angle into [-pi, pi)"""
    return np.mod(theta + np.pi, 2.0 * np.pi) - np.pi


def pendulum_reward(state: np.ndarray, u: float, params: PendulumParams) -> float:
    """Offset quadratic pendulum reward for one (state, torque) pair"""
    theta, omega = state
    return float(params.reward_offset - (theta**2 + 0.1 * omega**2 + 0.001 * u**2))


def pendulum_dynamics(state, u, params: PendulumParams) -> np.ndarray:
    """
    One Euler step of the pendulum plant

    Parameters
    ----------
    state : array-like
        [theta, omega] with theta measured from upright
    u : float or array-like
        Torque; clipped to the actuator bound before integration
    params : PendulumParams
        Plant constants

    Returns
    -------
    next_state : np.ndarray
        [theta', omega'] with omega clipped and theta aliased
    """
    state = _check_finite("pendulum state", state)
    u = float(np.clip(_check_finite("pendulum action", u).reshape(-1)[0], -params.torque_bound, params.torque_bound))
    theta, omega = state
    # angular acceleration at the pre-step state
    accel = (-3.0 * params.g / (2.0 * params.l)) * np.sin(theta + np.pi) + 3.0 * u / (
        params.m * params.l**2
    )
    next_omega = omega + accel * params.dt
    # theta uses omega_t, not omega_{t+1}
    next_theta = theta + omega * params.dt + accel * params.dt**2
    next_omega = np.clip(next_omega, -params.omega_limit, params.omega_limit)
    next_theta = alias_angle(next_theta)
    return np.array([next_theta, next_omega], dtype=np.float64)


def pendulum_observe(state) -> np.ndarray:
    """Observation [cos(theta), sin(theta), omega]"""
    theta, omega = np.asarray(state, dtype=np.float64)
    return np.array([np.cos(theta), np.sin(theta), omega], dtype=np.float64)


def pendulum_step(state, u, params: PendulumParams, steps_taken: int = 0) -> StepOutcome:
    """
    Advance the pendulum one step and classify the result

    Parameters
    ----------
    state : array-like
        [theta, omega]
    u : float or array-like
        Requested torque
    params : PendulumParams
        Plant and episode constants
    steps_taken : int
        Steps already taken in the episode

    Returns
    -------
    StepOutcome
    """
    state = _check_finite("pendulum state", state)
    u_applied = float(
        np.clip(_check_finite("pendulum action", u).reshape(-1)[0], -params.torque_bound, params.torque_bound)
    )
    next_state = pendulum_dynamics(state, u_applied, params)
    if params.reward_on_next_state:
        reward = pendulum_reward(next_state, u_applied, params)
    else:
        reward = pendulum_reward(state, u_applied, params)
    steps = steps_taken + 1
    violated = bool(pendulum_phi(next_state, params) < 0)
    if violated:
        terminal = Terminal.CONSTRAINT_VIOLATION
    elif steps >= params.max_episode_steps:
        terminal = Terminal.TIMEOUT
    else:
        terminal = Terminal.NONE
    return StepOutcome(
        next_state=next_state,
        observation=pendulum_observe(next_state),
        reward=reward,
        terminal=terminal,
        safety_violated=violated,
        steps=steps,
        info={"applied_action": np.array([u_applied])},
    )


# Docking #####################################################################


def docking_matrices(params: DockingParams, dims: int = 3):
    """
    Discrete CWH matrices s' = A s + B u

    The matrices are the Euler discretisation of the continuous equations with
    step params.dt; at dt = 1 s they are the printed matrices entry for entry.

    Parameters
    ----------
    params : DockingParams
        Orbit and vehicle constants
    dims : int
        2 keeps only the x, y force columns of B

    Returns
    -------
    A : np.ndarray
        6 x 6 state matrix
    B : np.ndarray
        6 x dims input matrix
    """
    n = params.mean_motion
    dt = params.dt
    a_cont = np.zeros((6, 6))
    a_cont[0, 3] = a_cont[1, 4] = a_cont[2, 5] = 1.0
    a_cont[3, 0] = 3.0 * n**2
    a_cont[3, 4] = 2.0 * n
    a_cont[4, 3] = -2.0 * n
    a_cont[5, 2] = -(n**2)
    A = np.eye(6) + dt * a_cont
    B = np.zeros((6, 3))
    B[3, 0] = B[4, 1] = B[5, 2] = dt / params.mass
    return A, B[:, :dims]


def docking_action(u, params: DockingParams, dims: int) -> np.ndarray:
    """Clip a force request per axis; in 2D a trailing z force is dropped"""
    u = _check_finite("docking action", u).reshape(-1)
    if u.size == 3 and dims == 2:
        u = u[:2]
    if u.size != dims:
        raise ConfigurationError(f"docking action must have {dims} entries, got {u.size}")
    return np.clip(u, -params.force_bound, params.force_bound)


def docking_dynamics(state, u, params: DockingParams, dims: int = 3) -> np.ndarray:
    """One step of the linear CWH model with a clipped force"""
    state = _check_finite("docking state", state)
    A, B = docking_matrices(params, dims)
    return A @ state + B @ docking_action(u, params, dims)


def distance_speed(state) -> tuple:
    """(d_H, nu_H): distance from the chief and relative speed"""
    state = np.asarray(state, dtype=np.float64)
    return float(np.linalg.norm(state[:3])), float(np.linalg.norm(state[3:]))


def docking_observe(state, dims: int = 3) -> np.ndarray:
    state = np.asarray(state, dtype=np.float64)
    if dims == 2:
        return state[[0, 1, 3, 4]].copy()
    return state.copy()


def docking_step(state, u, params: DockingParams, dims: int = 3, steps_taken: int = 0) -> StepOutcome:
    """
    Advance the deputy one step and classify the result

    The dense reward is 0.0125 per metre of approach; docked gives +1 and
    crashed, out of bounds and timeout give -1. A constraint violation is
    reported but does not end the episode.

    Parameters
    ----------
    state : array-like
        [x, y, z, xdot, ydot, zdot]
    u : array-like
        Force request, dims entries (a 3-vector is accepted in 2D)
    params : DockingParams
        Orbit and task constants
    dims : int
        2 or 3
    steps_taken : int
        Steps already taken in the episode

    Returns
    -------
    StepOutcome
    """
    state = _check_finite("docking state", state)
    u_applied = docking_action(u, params, dims)
    next_state = docking_dynamics(state, u_applied, params, dims)
    if dims == 2:
        next_state[2] = 0.0
        next_state[5] = 0.0
    dist_before, _ = distance_speed(state)
    dist_after, speed_after = distance_speed(next_state)
    reward = params.proximity_coeff * (dist_before - dist_after)
    steps = steps_taken + 1

    if dist_after <= params.docking_radius:
        if speed_after <= params.docking_speed:
            terminal = Terminal.DOCKED
            reward += params.terminal_reward
        else:
            terminal = Terminal.CRASHED
            reward -= params.terminal_reward
    elif dist_after > params.oob_radius:
        terminal = Terminal.OUT_OF_BOUNDS
        reward -= params.terminal_reward
    elif steps >= params.max_episode_steps:
        terminal = Terminal.TIMEOUT
        reward -= params.terminal_reward
    else:
        terminal = Terminal.NONE

    violated = bool(np.any(docking_phis(next_state, params) < 0))
    return StepOutcome(
        next_state=next_state,
        observation=docking_observe(next_state, dims),
        reward=float(reward),
        terminal=terminal,
        safety_violated=violated,
        steps=steps,
        info={"applied_action": u_applied, "distance": dist_after, "speed": speed_after},
    )


# Shared ######################################################################


def observe(env_kind: str, state) -> np.ndarray:
    if env_kind == "pendulum":
        return pendulum_observe(state)
    return docking_observe(state, dims_for(env_kind))


def sample_initial_state(env_kind: str, rng: np.random.Generator, params: Optional[EnvParams] = None):
    """
    Draw an initial state from the training distribution

    Parameters
    ----------
    env_kind : str
        One of ENV_KINDS
    rng : np.random.Generator
        Seeded generator owned by the caller
    params : PendulumParams or DockingParams, optional
        Defaults to the standard constants

    Returns
    -------
    state : np.ndarray
    """
    params = params or default_params(env_kind)
    if env_kind == "pendulum":
        theta = rng.uniform(-params.init_theta_bound, params.init_theta_bound)
        omega = rng.uniform(-params.init_omega_bound, params.init_omega_bound)
        return np.array([theta, omega], dtype=np.float64)

    dims = dims_for(env_kind)
    radius = rng.uniform(params.init_radius_min, params.init_radius_max)
    if dims == 2:
        angle = rng.uniform(0.0, 2.0 * np.pi)
        direction = np.array([np.cos(angle), np.sin(angle), 0.0])
    else:
        # isotropic normal draw gives a uniform direction on the sphere
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
    state = np.zeros(6)
    state[:3] = radius * direction
    return state


def safety_reward_components(next_state, rta_intervening: bool, params: EnvParams) -> dict:
    """
    Safety reward terms of the docking reward table

    The pendulum reward table has no safety terms, so both entries are zero.

    Returns
    -------
    components : dict
        {"intervention": float, "over_max_velocity": float}
    """
    components = {"intervention": 0.0, "over_max_velocity": 0.0}
    if isinstance(params, PendulumParams):
        return components
    if rta_intervening:
        components["intervention"] = params.rta_punishment
    _, speed = distance_speed(next_state)
    if speed > params.v_max:
        components["over_max_velocity"] = params.over_velocity_base + params.over_velocity_slope * (
            speed - params.v_max
        )
    return components


def evaluation_reward(outcome: StepOutcome, rta_intervening: bool, params: EnvParams) -> float:
    """Reported reward: the task reward plus every safety component"""
    components = safety_reward_components(outcome.next_state, rta_intervening, params)
    return float(outcome.reward + sum(components.values()))


def make_dynamics(env_kind: str, params: Optional[EnvParams] = None) -> Callable:
    """
    The live step function as a closure state, action -> next_state

    Filters simulate with this exact function, so predictions carry no model
    mismatch.
    """
    params = params or default_params(env_kind)
    if env_kind == "pendulum":

        def dynamics(state, action):
            return pendulum_dynamics(state, action, params)

        return dynamics

    dims = dims_for(env_kind)
    A, B = docking_matrices(params, dims)

    def dynamics(state, action):
        state = _check_finite("docking state", state)
        next_state = A @ state + B @ docking_action(action, params, dims)
        if dims == 2:
            next_state[2] = 0.0
            next_state[5] = 0.0
        return next_state

    return dynamics


def control_matrix(env_kind: str, params: Optional[EnvParams] = None) -> np.ndarray:
    """
    Input matrix B of the control-affine form f(s, u) = f(s, 0) + B u

    For the pendulum the form holds away from the omega clip and the theta
    wrap, which is the whole admissible set.
    """
    params = params or default_params(env_kind)
    if env_kind == "pendulum":
        gain = 3.0 / (params.m * params.l**2)
        return np.array([[gain * params.dt**2], [gain * params.dt]])
    _, B = docking_matrices(params, dims_for(env_kind))
    return B


def step_kernel(env_kind: str, state, action, params: EnvParams, steps_taken: int = 0) -> StepOutcome:
    if env_kind == "pendulum":
        return pendulum_step(state, action, params, steps_taken)
    return docking_step(state, action, params, dims_for(env_kind), steps_taken)


# Gymnasium wrappers ##########################################################


class SafeControlEnv(gym.Env):
    """
    Gymnasium wrapper around a pure step kernel

    The full StepOutcome of the last step is returned in info["outcome"] and
    the plant state is exposed as ``state`` for the RTA filters.
    """

    metadata = {"render_modes": []}

    def __init__(self, env_kind: str, params: Optional[EnvParams] = None):
        super().__init__()
        self.env_kind = env_kind
        self.dims = dims_for(env_kind)
        self.params = params or default_params(env_kind)
        bound = action_bound(self.params)
        self.action_space = spaces.Box(
            low=-bound, high=bound, shape=(action_dim(env_kind),), dtype=np.float64
        )
        high = np.full(observation_dim(env_kind), np.inf)
        self.observation_space = spaces.Box(low=-high, high=high, dtype=np.float64)
        self.state: Optional[np.ndarray] = None
        self.steps = 0

    @property
    def max_episode_steps(self) -> int:
        return self.params.max_episode_steps

    def reset(self, *, seed: Optional[int] = None, options: Optional[dict] = None):
        super().reset(seed=seed)
        options = options or {}
        if "state" in options:
            self.state = _check_finite("initial state", options["state"]).copy()
        else:
            self.state = sample_initial_state(self.env_kind, self.np_random, self.params)
        self.steps = 0
        return observe(self.env_kind, self.state), {"state": self.state.copy()}

    def step(self, action):
        if self.state is None:
            raise RuntimeError("reset() must be called before step()")
        outcome = step_kernel(self.env_kind, self.state, action, self.params, self.steps)
        self.state = outcome.next_state
        self.steps = outcome.steps
        terminated = outcome.terminal not in (Terminal.NONE, Terminal.TIMEOUT)
        truncated = outcome.terminal == Terminal.TIMEOUT
        info = {
            "outcome": outcome,
            "terminal": outcome.terminal.value,
            "safety_violated": outcome.safety_violated,
        }
        return outcome.observation, outcome.reward, terminated, truncated, info


class PendulumEnv(SafeControlEnv):
    """Inverted pendulum kept within 1 rad of upright"""

    def __init__(self, params: Optional[PendulumParams] = None):
        super().__init__("pendulum", params)


class DockingEnv(SafeControlEnv):
    """Deputy spacecraft docking with the chief at the origin"""

    def __init__(self, dims: int = 3, params: Optional[DockingParams] = None):
        if dims not in (2, 3):
            raise ConfigurationError(f"docking dims must be 2 or 3, got {dims}")
        super().__init__(f"docking{dims}d", params)


def make_env(env_kind: str, params: Optional[EnvParams] = None) -> SafeControlEnv:
    """Build the gymnasium environment for an env kind"""
    if env_kind == "pendulum":
        return PendulumEnv(params)
    return DockingEnv(dims_for(env_kind), params)
