# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Run time assurance filters. Each filter maps (state, desired action) to a
FilterDecision holding the action that is actually applied.

    explicit_simplex  one-step prediction against the explicit safe set
    implicit_simplex  one-step prediction plus a backup rollout
    explicit_asif     barrier-constrained projection on the explicit h_i
    implicit_asif     barrier-constrained projection on the rollout minimum
"""

# Imports #####################################################################

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from rta_ablation.envs import action_bound, control_matrix, default_params, make_dynamics
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.qp import QpProblem, solve_qp
from rta_ablation.safety import SafetySpec, admissible, make_safety_spec, rollout_backup

logger = logging.getLogger(__name__)

FILTER_KINDS = ("none", "explicit_simplex", "implicit_simplex", "explicit_asif", "implicit_asif")
EXPLICIT_KINDS = ("explicit_simplex", "explicit_asif")
IMPLICIT_KINDS = ("implicit_simplex", "implicit_asif")
INTERVENTION_THRESHOLD = 1e-6

# Classes #####################################################################


@dataclass(frozen=True)
class BarrierParams:
    """
    Discrete barrier strengthening h(f(s, u)) >= (1 - gamma dt) h(s)

    Attributes
    ----------
    gamma : float
        Class-kappa gain in 1/s, gamma dt must lie in (0, 1]
    dt : float
        Environment step in seconds
    slack_tolerance : float
        Feasibility tolerance of the QP rows and the post-solve check
    fd_step : float
        Relative central-difference step for the implicit barrier gradient
    """

    gamma: float
    dt: float
    slack_tolerance: float = 1e-9
    fd_step: float = 1e-4

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError(f"barrier gamma must be > 0, got {self.gamma}")
        if not 0 < self.gamma * self.dt <= 1:
            raise ConfigurationError("barrier gamma * dt must lie in (0, 1]")

    @classmethod
    def for_env(cls, env_kind: str, params=None, **overrides) -> "BarrierParams":
        params = params or default_params(env_kind)
        values = {"gamma": 0.05 / params.dt, "dt": params.dt}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class FilterParams:
    """User-tunable filter settings; None keeps the environment default"""

    horizon: Optional[int] = None
    gamma: Optional[float] = None
    slack_tolerance: Optional[float] = None
    fd_step: Optional[float] = None

    def __post_init__(self):
        if self.horizon is not None and self.horizon < 1:
            raise ConfigurationError(f"filter horizon must be >= 1, got {self.horizon}")

    def to_dict(self) -> dict:
        return {key: value for key, value in self.__dict__.items() if value is not None}


@dataclass(frozen=True)
class FilterDecision:
    """
    Attributes
    ----------
    actuated_action : np.ndarray
        u_act, the action sent to the plant
    intervened : bool
        Whether the filter replaced or modified the desired action
    correction : float
        ||u_act - u_NN||, 0 when not intervening
    diagnostics : dict
        slack (constraint values at the predicted next state), fallback
        (None, "infeasible" or "verification") and rollout_steps
    """

    actuated_action: np.ndarray
    intervened: bool
    correction: float = 0.0
    diagnostics: dict = field(default_factory=dict)


# Functions ###################################################################


def _pass_through(u_nn: np.ndarray, **diagnostics) -> FilterDecision:
    return FilterDecision(actuated_action=u_nn, intervened=False, correction=0.0, diagnostics=diagnostics)


def _intervene(u_nn: np.ndarray, u_act: np.ndarray, **diagnostics) -> FilterDecision:
    return FilterDecision(
        actuated_action=np.asarray(u_act, dtype=np.float64),
        intervened=True,
        correction=float(np.linalg.norm(u_act - u_nn)),
        diagnostics=diagnostics,
    )


# Simplex #####################################################################


def explicit_simplex(state, u_nn, spec: SafetySpec, dynamics: Callable) -> FilterDecision:
    """
    Pass u_NN when its one-step prediction stays in the explicit safe set,
    otherwise switch to the backup controller
    """
    if spec.explicit_h is None:
        raise ConfigurationError(f"{spec.env_kind} has no explicit safe set")
    predicted = dynamics(state, u_nn)
    values, _ = spec.explicit_h(predicted)
    if np.all(values >= 0):
        return _pass_through(u_nn, slack=values, fallback=None)
    return _intervene(u_nn, spec.backup(state), slack=values, fallback=None)


def implicit_simplex(state, u_nn, spec: SafetySpec, dynamics: Callable, horizon: Optional[int] = None) -> FilterDecision:
    """
    Simplex switching on a simulated backup trajectory

    The u_NN step is simulated first; a violating prediction switches to the
    backup immediately. Otherwise the backup is rolled out from the prediction
    for up to ``horizon`` steps and u_NN passes when every rolled state is
    admissible. Reaching the early-exit region, the prediction included,
    counts as safe.

    Parameters
    ----------
    state : np.ndarray
        Current plant state
    u_nn : np.ndarray
        Desired action, already inside the actuator box
    spec : SafetySpec
        Constraints, backup and early-exit region
    dynamics : callable
        The live step function
    horizon : int, optional
        Rollout length; defaults to spec.horizon

    Returns
    -------
    FilterDecision
    """
    horizon = horizon or spec.horizon
    predicted = dynamics(state, u_nn)
    slack = spec.constraints(predicted)
    if not admissible(slack):
        return _intervene(u_nn, spec.backup(state), slack=slack, fallback=None, rollout_steps=0)
    if spec.early_exit(predicted):
        return _pass_through(u_nn, slack=slack, fallback=None, rollout_steps=0)

    def stop(rolled):
        return spec.early_exit(rolled) or not spec.admissible(rolled)

    trajectory = rollout_backup(predicted, spec.backup, dynamics, horizon, stop=stop)
    safe = all(spec.admissible(rolled) for rolled in trajectory)
    if safe:
        return _pass_through(u_nn, slack=slack, fallback=None, rollout_steps=len(trajectory))
    return _intervene(u_nn, spec.backup(state), slack=slack, fallback=None, rollout_steps=len(trajectory))


# ASIF ########################################################################


def barrier_constraint_rows(
    state,
    h_fn: Callable,
    dynamics: Callable,
    control: np.ndarray,
    barrier: BarrierParams,
    value_fn: Optional[Callable] = None,
):
    """
    Linear barrier rows grad h(s0)^T B u >= (1 - gamma dt) h(s) - h(s0)

    s0 = f(s, 0) is the drift prediction, so for control-affine dynamics the
    rows are the first-order expansion of h(f(s, u)) >= (1 - gamma dt) h(s).

    Parameters
    ----------
    state : np.ndarray
        Current plant state
    h_fn : callable
        state -> (values, jacobian)
    dynamics : callable
        The live step function
    control : np.ndarray
        Input matrix B, shape (state_dim, action_dim)
    barrier : BarrierParams
        Strengthening gain and step
    value_fn : callable, optional
        state -> values, used for h(s) when the gradient is expensive

    Returns
    -------
    rows : np.ndarray
        Shape (m, action_dim)
    bounds : np.ndarray
        Shape (m,)
    """
    values_now = value_fn(state) if value_fn is not None else h_fn(state)[0]
    drift = dynamics(state, np.zeros(control.shape[1]))
    values_drift, jacobian = h_fn(drift)
    jacobian = np.atleast_2d(jacobian)
    if jacobian.shape[-1] != control.shape[0]:
        raise ConfigurationError("barrier gradient does not match the state dimension")
    rows = jacobian @ control
    bounds = (1.0 - barrier.gamma * barrier.dt) * np.atleast_1d(values_now) - np.atleast_1d(values_drift)
    return rows, bounds


def implicit_barrier_rollout(state, spec: SafetySpec, dynamics: Callable, horizon: int) -> tuple:
    """
    (h_bar(s), number of backup states the minimum ran over)

    The rollout ends early once the backup enters the early-exit region, so
    the count is 0 for horizon 1 or a state already in that region.
    """
    value = float(np.min(spec.constraints(state)))
    if horizon <= 1 or spec.early_exit(state):
        return value, 0
    trajectory = rollout_backup(state, spec.backup, dynamics, horizon - 1, stop=spec.early_exit)
    for rolled in trajectory:
        value = min(value, float(np.min(spec.constraints(rolled))))
    return value, len(trajectory)


def implicit_barrier(state, spec: SafetySpec, dynamics: Callable, horizon: int) -> float:
    """h_bar(s): min_i phi_i over s and the first horizon - 1 backup states"""
    return implicit_barrier_rollout(state, spec, dynamics, horizon)[0]


def implicit_barrier_gradient(state, spec: SafetySpec, dynamics: Callable, horizon: int, fd_step: float = 1e-4) -> np.ndarray:
    """Central differences of h_bar with step fd_step * max(1, |s_j|)"""
    state = np.asarray(state, dtype=np.float64)
    gradient = np.zeros_like(state)
    for j in range(state.size):
        step = fd_step * max(1.0, abs(state[j]))
        offset = np.zeros_like(state)
        offset[j] = step
        upper = implicit_barrier(state + offset, spec, dynamics, horizon)
        lower = implicit_barrier(state - offset, spec, dynamics, horizon)
        gradient[j] = (upper - lower) / (2.0 * step)
    return gradient


def _asif(state, u_nn, h_fn, spec, dynamics, control, barrier, bound, extra, value_fn=None) -> FilterDecision:
    if value_fn is None:

        def value_fn(point):
            return h_fn(point)[0]

    rows, bounds = barrier_constraint_rows(state, h_fn, dynamics, control, barrier, value_fn)
    n = u_nn.size
    problem = QpProblem(
        target=u_nn,
        rows=rows,
        bounds=bounds,
        lower=np.full(n, -bound),
        upper=np.full(n, bound),
        tolerance=barrier.slack_tolerance,
    )
    solution = solve_qp(problem)
    fallback = None
    if not solution.feasible:
        fallback = "infeasible"
        u_act = spec.backup(state)
    else:
        u_act = solution.action
        values = value_fn(dynamics(state, u_act))
        if np.any(np.atleast_1d(values) < -barrier.slack_tolerance):
            fallback = "verification"
            u_act = spec.backup(state)

    slack = spec.constraints(dynamics(state, u_act))
    if fallback is None and np.linalg.norm(u_act - u_nn) <= INTERVENTION_THRESHOLD:
        return _pass_through(u_nn, slack=slack, fallback=None, **extra)
    if fallback is not None:
        logger.debug("ASIF fallback (%s) at state %s", fallback, state)
    return _intervene(u_nn, u_act, slack=slack, fallback=fallback, **extra)


def explicit_asif(state, u_nn, spec: SafetySpec, dynamics: Callable, control: np.ndarray, barrier: BarrierParams, bound: float) -> FilterDecision:
    """
    Closest action to u_NN that keeps every explicit h_i decaying no faster
    than (1 - gamma dt) per step
    """
    if spec.explicit_h is None:
        raise ConfigurationError(f"{spec.env_kind} has no explicit safe set")
    return _asif(state, u_nn, spec.explicit_h, spec, dynamics, control, barrier, bound, {})


def implicit_asif(
    state,
    u_nn,
    spec: SafetySpec,
    dynamics: Callable,
    control: np.ndarray,
    barrier: BarrierParams,
    bound: float,
    horizon: Optional[int] = None,
) -> FilterDecision:
    """
    ASIF on the single implicit barrier h_bar built from the backup rollout

    Parameters
    ----------
    state : np.ndarray
        Current plant state
    u_nn : np.ndarray
        Desired action inside the actuator box
    spec : SafetySpec
        Constraints and backup
    dynamics : callable
        The live step function
    control : np.ndarray
        Input matrix B
    barrier : BarrierParams
        Strengthening gain and finite-difference step
    bound : float
        Actuator bound per axis
    horizon : int, optional
        Rollout length; defaults to spec.horizon

    Returns
    -------
    FilterDecision
    """
    horizon = horizon or spec.horizon

    def h_fn(point):
        value = implicit_barrier(point, spec, dynamics, horizon)
        gradient = implicit_barrier_gradient(point, spec, dynamics, horizon, barrier.fd_step)
        return np.array([value]), gradient[np.newaxis, :]

    value_now, rollout_steps = implicit_barrier_rollout(state, spec, dynamics, horizon)

    def h_value(point):
        if point is state:
            return np.array([value_now])
        return np.array([implicit_barrier(point, spec, dynamics, horizon)])

    return _asif(
        state, u_nn, h_fn, spec, dynamics, control, barrier, bound, {"rollout_steps": rollout_steps}, value_fn=h_value
    )


@dataclass(frozen=True)
class RtaFilter:
    """
    A stateless per-step filter bound to one environment

    Calling it clips the desired action into the actuator box and returns the
    FilterDecision of the configured kind.
    """

    kind: str
    env_kind: str
    spec: Optional[SafetySpec]
    dynamics: Optional[Callable]
    control: Optional[np.ndarray]
    barrier: Optional[BarrierParams]
    bound: float
    horizon: Optional[int] = None

    def __call__(self, state, u_nn) -> FilterDecision:
        u_nn = np.clip(np.asarray(u_nn, dtype=np.float64).reshape(-1), -self.bound, self.bound)
        if self.kind == "none":
            return _pass_through(u_nn, fallback=None)
        state = np.asarray(state, dtype=np.float64)
        if self.kind == "explicit_simplex":
            return explicit_simplex(state, u_nn, self.spec, self.dynamics)
        if self.kind == "implicit_simplex":
            return implicit_simplex(state, u_nn, self.spec, self.dynamics, self.horizon)
        if self.kind == "explicit_asif":
            return explicit_asif(state, u_nn, self.spec, self.dynamics, self.control, self.barrier, self.bound)
        return implicit_asif(
            state, u_nn, self.spec, self.dynamics, self.control, self.barrier, self.bound, self.horizon
        )


def check_pairing(kind: str, env_kind: str) -> None:
    """Raise ConfigurationError for an unknown kind or an unsupported pairing"""
    if kind not in FILTER_KINDS:
        raise ConfigurationError(f"unknown filter kind {kind!r}; expected one of {FILTER_KINDS}")
    if env_kind == "pendulum" and kind in EXPLICIT_KINDS:
        raise ConfigurationError(f"pendulum has no explicit safe set; {kind} is not supported")


def make_filter(kind: str, env_kind: str, params=None, filter_params: Optional[FilterParams] = None) -> RtaFilter:
    """
    Build the filter for an (env, kind) pairing

    Parameters
    ----------
    kind : str
        One of FILTER_KINDS
    env_kind : str
        pendulum, docking2d or docking3d
    params : PendulumParams or DockingParams, optional
        Environment constants; defaults to the standard values
    filter_params : FilterParams, optional
        Horizon and barrier overrides

    Returns
    -------
    RtaFilter
    """
    check_pairing(kind, env_kind)
    params = params or default_params(env_kind)
    filter_params = filter_params or FilterParams()
    bound = action_bound(params)
    if kind == "none":
        return RtaFilter(kind, env_kind, None, None, None, None, bound)

    spec = make_safety_spec(env_kind, params, horizon=filter_params.horizon)
    barrier = BarrierParams.for_env(
        env_kind,
        params,
        gamma=filter_params.gamma,
        slack_tolerance=filter_params.slack_tolerance,
        fd_step=filter_params.fd_step,
    )
    logger.debug("built %s filter for %s (horizon %s)", kind, env_kind, spec.horizon)
    return RtaFilter(
        kind=kind,
        env_kind=env_kind,
        spec=spec,
        dynamics=make_dynamics(env_kind, params),
        control=control_matrix(env_kind, params),
        barrier=barrier,
        bound=bound,
        horizon=spec.horizon,
    )
