# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Standalone property checks of the RTA filters: safety invariance under a
random policy and optimality of the ASIF projection against a grid search.
"""

# Imports #####################################################################

import logging
from typing import List, Optional

import numpy as np
import pandas as pd

from rta_ablation.envs import (
    ENV_KINDS,
    Terminal,
    action_bound,
    action_dim,
    default_params,
    dims_for,
    sample_initial_state,
    step_kernel,
)
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.qp import QpProblem, solve_qp
from rta_ablation.rta import FILTER_KINDS, barrier_constraint_rows, check_pairing, make_filter

logger = logging.getLogger(__name__)

AUDIT_COLUMNS = [
    "check",
    "env",
    "filter",
    "episodes",
    "violating_episodes",
    "interventions",
    "qp_deviation",
    "grid_deviation",
    "min_row_slack",
    "passed",
]
ROW_TOLERANCE = 1e-6
GRID_TOLERANCE = 1e-3
GRID_POINTS = 41
GRID_REFINEMENTS = 3
CONTROL_VIOLATION_FRACTION = 0.05

# Functions ###################################################################


def valid_pairings(include_control: bool = True) -> List[tuple]:
    """
    Every supported (env, filter) pairing

    Parameters
    ----------
    include_control : bool
        Also list the unfiltered pendulum, which is expected to violate

    Returns
    -------
    pairings : list of tuple
    """
    pairings = []
    for env_kind in ENV_KINDS:
        for kind in FILTER_KINDS:
            if kind == "none":
                continue
            try:
                check_pairing(kind, env_kind)
            except ConfigurationError:
                continue
            pairings.append((env_kind, kind))
    if include_control:
        pairings.append(("pendulum", "none"))
    return pairings


def random_policy_episode(env_kind: str, rta_filter, rng: np.random.Generator, params, max_steps: Optional[int] = None):
    """
    One episode of uniformly random actions through the filter

    Returns
    -------
    violated : bool
        Whether any step left the admissible set
    interventions : int
        Steps on which the filter changed the action
    """
    state = sample_initial_state(env_kind, rng, params)
    bound = action_bound(params)
    n_act = action_dim(env_kind)
    steps, interventions, violated = 0, 0, False
    while True:
        u_nn = rng.uniform(-bound, bound, size=n_act)
        decision = rta_filter(state, u_nn)
        interventions += int(decision.intervened)
        outcome = step_kernel(env_kind, state, decision.actuated_action, params, steps)
        state, steps = outcome.next_state, outcome.steps
        violated = violated or outcome.safety_violated
        if outcome.terminal != Terminal.NONE:
            break
        if max_steps is not None and steps >= max_steps:
            break
    return violated, interventions


def invariance_audit(episodes: int = 1000, max_steps: Optional[int] = None, seed: int = 0) -> pd.DataFrame:
    """
    Random-policy episodes for every pairing

    A filtered pairing passes with zero violating episodes; the unfiltered
    pendulum passes when at least 5% of its episodes violate.
    """
    rows = []
    pairings = valid_pairings()
    for number, (env_kind, kind) in enumerate(pairings, start=1):
        logger.info("Audit %d / %d: %s with %s", number, len(pairings), env_kind, kind)
        params = default_params(env_kind)
        rta_filter = make_filter(kind, env_kind, params)
        rng = np.random.default_rng([int(seed), number])
        violating, interventions = 0, 0
        for _ in range(episodes):
            violated, count = random_policy_episode(env_kind, rta_filter, rng, params, max_steps)
            violating += int(violated)
            interventions += count
        if kind == "none":
            passed = violating >= CONTROL_VIOLATION_FRACTION * episodes
        else:
            passed = violating == 0
        rows.append(
            {
                "check": "invariance",
                "env": env_kind,
                "filter": kind,
                "episodes": episodes,
                "violating_episodes": violating,
                "interventions": interventions,
                "passed": bool(passed),
            }
        )
    return pd.DataFrame(rows, columns=AUDIT_COLUMNS)


def boundary_state(env_kind: str, rng: np.random.Generator, params) -> np.ndarray:
    """A docking state on the speed-limit boundary, moving in a random direction"""
    dims = dims_for(env_kind)
    distance = rng.uniform(params.docking_radius, params.init_radius_max)
    speed = params.docking_speed + params.speed_limit_slope * distance
    state = np.zeros(6)
    for block, scale in ((slice(0, 3), distance), (slice(3, 6), speed)):
        direction = np.zeros(3)
        direction[:dims] = rng.normal(size=dims)
        state[block] = scale * direction / np.linalg.norm(direction)
    return state


def grid_projection(problem: QpProblem, points: int = GRID_POINTS, refinements: int = GRID_REFINEMENTS) -> float:
    """
    Smallest feasible deviation found by a refining grid search over the box

    Returns
    -------
    deviation : float
        np.inf when no grid point is feasible
    """
    target = np.asarray(problem.target, dtype=np.float64)
    A, b = problem.stacked()
    lower, upper = np.asarray(problem.lower, dtype=np.float64), np.asarray(problem.upper, dtype=np.float64)
    best_point, best = None, np.inf
    for _ in range(refinements + 1):
        axes = [np.linspace(lo, hi, points) for lo, hi in zip(lower, upper)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, target.size)
        feasible = np.all(grid @ A.T >= b - problem.tolerance, axis=1)
        if not np.any(feasible):
            break
        candidates = grid[feasible]
        deviations = np.linalg.norm(candidates - target, axis=1)
        i = int(np.argmin(deviations))
        if deviations[i] < best:
            best_point, best = candidates[i], float(deviations[i])
        # zoom into two cells around the best point
        spacing = (upper - lower) / (points - 1)
        lower = np.maximum(problem.lower, best_point - 2.0 * spacing)
        upper = np.minimum(problem.upper, best_point + 2.0 * spacing)
    return best


def qp_optimality_audit(samples: int = 100, seed: int = 0) -> pd.DataFrame:
    """
    Explicit ASIF projections at boundary states against the grid oracle

    A sample passes when the QP deviation is within 1e-3 of the grid optimum
    and every barrier row holds within 1e-6.
    """
    rows = []
    for env_kind in ("docking2d", "docking3d"):
        params = default_params(env_kind)
        rta_filter = make_filter("explicit_asif", env_kind, params)
        bound = rta_filter.bound
        rng = np.random.default_rng([int(seed), 100, dims_for(env_kind)])
        for _ in range(samples):
            state = boundary_state(env_kind, rng, params)
            u_nn = rng.uniform(-bound, bound, size=action_dim(env_kind))
            barrier_rows, barrier_bounds = barrier_constraint_rows(
                state, rta_filter.spec.explicit_h, rta_filter.dynamics, rta_filter.control, rta_filter.barrier
            )
            problem = QpProblem(
                target=u_nn,
                rows=barrier_rows,
                bounds=barrier_bounds,
                lower=np.full(u_nn.size, -bound),
                upper=np.full(u_nn.size, bound),
                tolerance=rta_filter.barrier.slack_tolerance,
            )
            solution = solve_qp(problem)
            grid_deviation = grid_projection(problem)
            if not solution.feasible:
                # both searches must agree that the region is empty
                passed = not np.isfinite(grid_deviation)
                qp_deviation, min_slack = np.inf, np.nan
            else:
                qp_deviation = float(np.linalg.norm(solution.action - u_nn))
                min_slack = float(np.min(barrier_rows @ solution.action - barrier_bounds))
                passed = min_slack >= -ROW_TOLERANCE and qp_deviation <= grid_deviation + GRID_TOLERANCE
            rows.append(
                {
                    "check": "qp_optimality",
                    "env": env_kind,
                    "filter": "explicit_asif",
                    "qp_deviation": qp_deviation,
                    "grid_deviation": grid_deviation,
                    "min_row_slack": min_slack,
                    "passed": bool(passed),
                }
            )
    return pd.DataFrame(rows, columns=AUDIT_COLUMNS)


def filters_audit(episodes: int = 1000, max_steps: Optional[int] = None, samples: int = 100, seed: int = 0) -> pd.DataFrame:
    """
    Run both audits

    Parameters
    ----------
    episodes : int
        Random-policy episodes per pairing
    max_steps : int, optional
        Per-episode step cap below the environments' own
    samples : int
        Boundary states per docking variant
    seed : int
        Root of every generator used

    Returns
    -------
    audit_df : pandas dataframe
        AUDIT_COLUMNS, one row per pairing and one per boundary sample
    """
    audit_df = pd.concat([invariance_audit(episodes, max_steps, seed), qp_optimality_audit(samples, seed)], ignore_index=True)
    failed = int((~audit_df["passed"].astype(bool)).sum())
    if failed:
        logger.error("%d audit rows failed", failed)
    else:
        logger.info("all %d audit rows passed", len(audit_df))
    return audit_df
