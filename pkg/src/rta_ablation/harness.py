# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Training and evaluation of one (experiment, seed) run, and the aggregation of
several runs into per-epoch curves with 95% confidence bands.
"""

# Imports #####################################################################

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from rta_ablation.agents import Transition, hyperparams_for, make_agent
from rta_ablation.envs import (
    PendulumParams,
    Terminal,
    action_bound,
    action_dim,
    default_params,
    evaluation_reward,
    make_env,
    observation_dim,
    safety_reward_components,
    sample_initial_state,
)
from rta_ablation.checkpoints import save_checkpoint
from rta_ablation.exceptions import TrainingAborted
from rta_ablation.metrics import (
    DependenceThresholds,
    EpisodeMetrics,
    confidence_band,
    detect_dependence,
    episodes_frame,
    summarize_episodes,
)
from rta_ablation.rta import FilterDecision, FilterParams, check_pairing, make_filter
from rta_ablation.trainconfig import check_config_filter, config_kind, rewrite, training_filter_kind, training_reward

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = (1630, 2241, 2320, 2990, 3281, 4930, 5640, 8005, 9348, 9462)
MODES = ("on", "off")

# independent generator streams per (seed, stream id)
STREAM_NET_INIT = 0
STREAM_POLICY = 1
STREAM_TRAIN_INIT = 2
STREAM_INTERIM_EVAL = 3
STREAM_FINAL_EVAL = 4

# Classes #####################################################################


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One cell of a study: environment, filter, training configuration and
    learner, run once per seed
    """

    name: str
    env_kind: str
    algorithm: str
    filter_kind: str
    config: str
    hyperparams: object = None
    filter_params: FilterParams = FilterParams()
    env_params: object = None
    seeds: tuple = DEFAULT_SEEDS
    eval_episodes_interim: int = 10
    eval_episodes_final: int = 100
    eval_every: int = 1
    thresholds: DependenceThresholds = DependenceThresholds()

    def __post_init__(self):
        check_pairing(self.filter_kind, self.env_kind)
        check_config_filter(self.config, self.filter_kind)
        object.__setattr__(self, "config", config_kind(self.config).value)
        if self.hyperparams is None:
            object.__setattr__(self, "hyperparams", hyperparams_for(self.algorithm, self.env_kind))
        if self.env_params is None:
            object.__setattr__(self, "env_params", default_params(self.env_kind))
        object.__setattr__(self, "seeds", tuple(int(seed) for seed in self.seeds))
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")

    def to_dict(self) -> dict:
        """Plain echo of the spec, seeds included"""
        return {
            "name": self.name,
            "env": self.env_kind,
            "algorithm": self.algorithm,
            "filter": self.filter_kind,
            "config": self.config,
            "hyperparameters": self.hyperparams.to_dict(),
            "filter_params": self.filter_params.to_dict(),
            "env_params": dict(self.env_params.__dict__),
            "seeds": list(self.seeds),
            "eval_episodes_interim": self.eval_episodes_interim,
            "eval_episodes_final": self.eval_episodes_final,
            "eval_every": self.eval_every,
            "thresholds": dict(self.thresholds.__dict__),
        }

    def config_hash(self) -> str:
        """12 hex digits identifying everything but the seed list"""
        payload = self.to_dict()
        payload.pop("seeds")
        text = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


@dataclass
class RunResult:
    """
    Outcome of train(spec, seed)

    ``wall_clock`` is kept in memory only so result files stay byte-identical
    across reruns.
    """

    name: str
    spec: dict
    spec_hash: str
    seed: int
    status: str = "complete"
    error: Optional[str] = None
    diagnostics: dict = field(default_factory=dict)
    curves: List[dict] = field(default_factory=list)
    training: List[dict] = field(default_factory=list)
    final: dict = field(default_factory=dict)
    final_episodes: List[dict] = field(default_factory=list)
    dependence: Optional[dict] = None
    wall_clock: float = 0.0

    @property
    def failed(self) -> bool:
        return self.status != "complete"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "spec": self.spec,
            "spec_hash": self.spec_hash,
            "seed": self.seed,
            "status": self.status,
            "error": self.error,
            "diagnostics": self.diagnostics,
            "curves": self.curves,
            "training": self.training,
            "final": self.final,
            "final_episodes": self.final_episodes,
            "dependence": self.dependence,
        }

    @classmethod
    def from_dict(cls, values: dict) -> "RunResult":
        return cls(**{key: values[key] for key in cls.__dataclass_fields__ if key in values})


# Functions ###################################################################


def stream(seed: int, stream_id: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream_id, *extra])


def is_success(params, terminal: Terminal, violations: int) -> bool:
    """Pendulum: a full episode without violation; docking: docked"""
    if isinstance(params, PendulumParams):
        return terminal == Terminal.TIMEOUT and violations == 0
    return terminal == Terminal.DOCKED


def run_episode(agent, env, rta_filter, mode: str, initial_state, max_steps: Optional[int] = None) -> EpisodeMetrics:
    """
    One frozen deterministic episode

    Parameters
    ----------
    agent : PpoAgent or SacAgent
        Policy, never updated here
    env : SafeControlEnv
        Environment instance
    rta_filter : RtaFilter
        Filter applied in mode "on"
    mode : str
        "on" or "off"
    initial_state : np.ndarray
        Start state
    max_steps : int, optional
        Extra step cap below the environment's own

    Returns
    -------
    EpisodeMetrics
    """
    obs, _ = env.reset(options={"state": initial_state})
    total, length, interventions, violations, corrections = 0.0, 0, 0, 0, []
    terminal = Terminal.NONE
    while True:
        output = agent.act(obs, deterministic=True)
        if mode == "on":
            decision = rta_filter(env.state, output.env_action)
        else:
            desired = np.clip(output.env_action, -rta_filter.bound, rta_filter.bound)
            decision = FilterDecision(actuated_action=desired, intervened=False)
        obs, _, terminated, truncated, info = env.step(decision.actuated_action)
        outcome = info["outcome"]
        total += evaluation_reward(outcome, decision.intervened, env.params)
        length += 1
        if decision.intervened:
            interventions += 1
            corrections.append(decision.correction)
        violations += int(outcome.safety_violated)
        terminal = outcome.terminal
        if terminated or truncated:
            break
        if max_steps is not None and length >= max_steps:
            terminal = Terminal.TIMEOUT
            break
    return EpisodeMetrics(
        ret=total,
        length=length,
        success=is_success(env.params, terminal, violations),
        interventions_or_violations=interventions if mode == "on" else violations,
        correction=float(np.mean(corrections)) if corrections else 0.0,
        interventions=interventions,
        violations=violations,
    )


def evaluate(agent, env, rta_filter, mode: str, episodes: int, rng: np.random.Generator, max_steps: Optional[int] = None):
    """
    Frozen-policy evaluation with the filter on or off

    Initial states come from ``rng`` only, so two calls with equally seeded
    generators share their initial conditions.

    Returns
    -------
    summary : dict
        See metrics.summarize_episodes
    episodes_df : pandas dataframe
        One row per episode
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")

    records = []
    for _ in range(episodes):
        initial = sample_initial_state(env.env_kind, rng, env.params)
        records.append(run_episode(agent, env, rta_filter, mode, initial, max_steps))
    episodes_df = episodes_frame(records)
    return summarize_episodes(episodes_df), episodes_df


def _evaluate_both(agent, env, rta_filter, episodes, seed, stream_id, *extra, max_steps=None):
    out = {}
    for mode in MODES:
        out[mode] = evaluate(agent, env, rta_filter, mode, episodes, stream(seed, stream_id, *extra), max_steps)
    return out


def train(spec: ExperimentSpec, seed: int, checkpoint_path: Optional[str] = None) -> RunResult:
    """
    Train one learner and evaluate it with and without its RTA

    Every step runs policy -> filter -> environment -> configuration rewrite ->
    learner storage. After every ``eval_every`` epochs the frozen policy is
    evaluated in both modes; a final evaluation of ``eval_episodes_final``
    episodes per mode closes the run.

    Parameters
    ----------
    spec : ExperimentSpec
        The experiment cell
    seed : int
        Seed of every generator stream of the run
    checkpoint_path : str, optional
        Where to store the final networks (HDF5)

    Returns
    -------
    RunResult
        status "failed" with partial curves when the learner aborts
    """
    started = time.perf_counter()
    hp = spec.hyperparams
    params = spec.env_params
    result = RunResult(name=spec.name, spec=spec.to_dict(), spec_hash=spec.config_hash(), seed=int(seed))

    env = make_env(spec.env_kind, params)
    # evaluation runs on its own instance so the training episode is untouched
    eval_env = make_env(spec.env_kind, params)
    train_filter = make_filter(
        training_filter_kind(spec.config, spec.filter_kind), spec.env_kind, params, spec.filter_params
    )
    eval_filter = make_filter(spec.filter_kind, spec.env_kind, params, spec.filter_params)
    agent = make_agent(
        spec.algorithm,
        observation_dim(spec.env_kind),
        action_dim(spec.env_kind),
        action_bound(params),
        hp,
        stream(seed, STREAM_NET_INIT),
    )
    policy_rng = stream(seed, STREAM_POLICY)
    init_rng = stream(seed, STREAM_TRAIN_INIT)

    try:
        obs, _ = env.reset(options={"state": sample_initial_state(spec.env_kind, init_rng, params)})
        episode_steps = 0
        for epoch in range(1, hp.epochs + 1):
            counts = {"epoch": epoch, "steps": 0, "episodes": 0, "interventions": 0, "violations": 0}
            for t in range(hp.epoch_length):
                output = agent.act(obs, policy_rng)
                decision = train_filter(env.state, output.env_action)
                next_obs, _, terminated, truncated, info = env.step(decision.actuated_action)
                outcome = info["outcome"]
                components = safety_reward_components(outcome.next_state, decision.intervened, params)
                record = Transition(
                    obs=obs,
                    action=output.action,
                    reward=training_reward(spec.config, outcome.reward, components),
                    next_obs=next_obs,
                    done=terminated,
                    value=output.value,
                    log_prob=output.log_prob,
                )
                record = rewrite(
                    spec.config,
                    record,
                    decision,
                    outcome.safety_violated,
                    params.punishment,
                    relabel=lambda actuated, current=obs: agent.relabel(current, actuated),
                )
                agent.store(record)
                counts["steps"] += 1
                counts["interventions"] += int(decision.intervened)
                counts["violations"] += int(outcome.safety_violated)
                episode_steps += 1
                obs = next_obs

                if spec.algorithm == "sac" and agent.ready():
                    agent.update(policy_rng)

                timeout = truncated or episode_steps >= hp.max_episode_length
                epoch_end = t == hp.epoch_length - 1
                if terminated or timeout or epoch_end:
                    agent.end_path(obs, terminated=terminated)
                    counts["episodes"] += int(terminated or timeout)
                    obs, _ = env.reset(options={"state": sample_initial_state(spec.env_kind, init_rng, params)})
                    episode_steps = 0

            if spec.algorithm == "ppo":
                counts.update(agent.update())
            result.training.append(counts)

            if epoch % spec.eval_every == 0:
                interim = _evaluate_both(
                    agent,
                    eval_env,
                    eval_filter,
                    spec.eval_episodes_interim,
                    seed,
                    STREAM_INTERIM_EVAL,
                    epoch,
                    max_steps=hp.max_episode_length,
                )
                for mode, (summary, _) in interim.items():
                    result.curves.append({"epoch": epoch, "mode": mode, **summary})
                logger.info(
                    "%s seed %s: Epoch %d / %d, return on %.2f off %.2f",
                    spec.name,
                    seed,
                    epoch,
                    hp.epochs,
                    interim["on"][0]["return_mean"],
                    interim["off"][0]["return_mean"],
                )
    except TrainingAborted as exc:
        logger.error("%s seed %s aborted: %s", spec.name, seed, exc)
        result.status = "failed"
        result.error = str(exc)
        result.diagnostics = exc.diagnostics
        result.wall_clock = time.perf_counter() - started
        return result

    final = _evaluate_both(
        agent, eval_env, eval_filter, spec.eval_episodes_final, seed, STREAM_FINAL_EVAL, max_steps=hp.max_episode_length
    )
    for mode, (summary, episodes_df) in final.items():
        result.final[mode] = summary
        for row in episodes_df.to_dict(orient="records"):
            result.final_episodes.append({"mode": mode, **row})
    result.dependence = detect_dependence(result.final["on"], result.final["off"], spec.thresholds).to_dict()
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, agent.tensors(), {"name": spec.name, "seed": int(seed), "spec_hash": result.spec_hash})
    result.wall_clock = time.perf_counter() - started
    logger.info("%s seed %s finished in %.1f s", spec.name, seed, result.wall_clock)
    return result


def aggregate_seeds(results: List[RunResult], metrics=("return", "success")) -> pd.DataFrame:
    """
    Per-epoch mean and 95% confidence half-width across seeds

    Parameters
    ----------
    results : list of RunResult
        Runs of one experiment, any order
    metrics : sequence of str
        Summary metrics to aggregate

    Returns
    -------
    curves_df : pandas dataframe
        Columns epoch, mode, metric, mean, ci, n sorted by epoch, mode and metric
    """
    rows = []
    for result in results:
        for row in result.curves:
            for metric in metrics:
                rows.append({"epoch": row["epoch"], "mode": row["mode"], "metric": metric, "value": row[f"{metric}_mean"]})
    if not rows:
        return pd.DataFrame(columns=["epoch", "mode", "metric", "mean", "ci", "n"])
    long_df = pd.DataFrame(rows)
    out = []
    for (epoch, mode, metric), group in long_df.groupby(["epoch", "mode", "metric"], sort=True):
        # sort values so the result is permutation invariant to the last bit
        mean, ci = confidence_band(np.sort(group["value"].to_numpy()))
        out.append({"epoch": int(epoch), "mode": mode, "metric": metric, "mean": mean, "ci": ci, "n": int(len(group))})
    return pd.DataFrame(out)
