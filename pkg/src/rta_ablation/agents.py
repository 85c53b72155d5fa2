# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
PPO and SAC learners on the numpy networks of rta_ablation.networks.

Both agents act in normalised units [-1, 1]; ``PolicyOutput.env_action`` is
the action scaled by the actuator bound. The loss heads return their
gradients alongside the loss so they can be checked by finite differences.
"""

# Imports #####################################################################

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from rta_ablation.exceptions import ConfigurationError, TrainingAborted
from rta_ablation.networks import Adam, Mlp, all_finite, polyak_update

logger = logging.getLogger(__name__)

ALGORITHMS = ("ppo", "sac")
LOG_STD_MIN, LOG_STD_MAX = -20.0, 2.0
LOG_2PI = np.log(2.0 * np.pi)

# Hyperparameters #############################################################


@dataclass(frozen=True)
class PpoHyperparams:
    """PPO settings; ``for_env`` returns the reference settings for an env kind"""

    epoch_length: int = 4000
    epochs: int = 100
    gamma: float = 0.0
    clip_ratio: float = 0.2
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    updates_per_epoch: int = 80
    target_kl: float = 0.01
    gae_lambda: float = 0.0
    max_episode_length: int = 200
    hidden_sizes: Tuple[int, ...] = (64, 64)
    log_std_init: float = -0.5
    normalize_advantages: bool = True

    def __post_init__(self):
        if not 0 < self.clip_ratio < 1:
            raise ConfigurationError(f"clip_ratio must lie in (0, 1), got {self.clip_ratio}")
        for name in ("gamma", "gae_lambda"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")
        if self.epoch_length < 1 or self.epochs < 0 or self.updates_per_epoch < 1:
            raise ConfigurationError("epoch_length and updates_per_epoch must be >= 1, epochs >= 0")
        object.__setattr__(self, "hidden_sizes", tuple(int(size) for size in self.hidden_sizes))

    @classmethod
    def for_env(cls, env_kind: str, **overrides) -> "PpoHyperparams":
        if env_kind == "pendulum":
            values = {}
        else:
            values = dict(
                epoch_length=10564,
                epochs=100,
                gamma=0.988633,
                actor_lr=0.001344,
                critic_lr=0.001344,
                updates_per_epoch=34,
                gae_lambda=0.904496,
                max_episode_length=1000,
            )
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> dict:
        values = asdict(self)
        values["hidden_sizes"] = list(self.hidden_sizes)
        return values


@dataclass(frozen=True)
class SacHyperparams:
    """SAC settings; ``for_env`` returns the reference settings for an env kind"""

    epoch_length: int = 400
    epochs: int = 40
    replay_size: int = 10000
    gamma: float = 0.99
    polyak: float = 0.995
    alpha: float = 0.2
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    minibatch_size: int = 256
    update_after: int = 1
    max_episode_length: int = 200
    hidden_sizes: Tuple[int, ...] = (64, 64)
    critic_output: str = "relu"

    def __post_init__(self):
        if not 0 < self.polyak < 1:
            raise ConfigurationError(f"polyak must lie in (0, 1), got {self.polyak}")
        if not 0 <= self.gamma <= 1:
            raise ConfigurationError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.critic_output not in ("relu", "linear"):
            raise ConfigurationError(f"critic_output must be relu or linear, got {self.critic_output!r}")
        if self.replay_size < 1 or self.minibatch_size < 1 or self.epoch_length < 1 or self.epochs < 0:
            raise ConfigurationError("replay_size, minibatch_size, epoch_length must be >= 1, epochs >= 0")
        object.__setattr__(self, "hidden_sizes", tuple(int(size) for size in self.hidden_sizes))

    @classmethod
    def for_env(cls, env_kind: str, **overrides) -> "SacHyperparams":
        if env_kind == "pendulum":
            values = {}
        else:
            values = dict(epoch_length=1000, epochs=1000, max_episode_length=1000)
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> dict:
        values = asdict(self)
        values["hidden_sizes"] = list(self.hidden_sizes)
        return values


def hyperparams_for(algorithm: str, env_kind: str, **overrides):
    """Default hyperparameters of an (algorithm, env) pair with overrides applied"""
    if algorithm == "ppo":
        return PpoHyperparams.for_env(env_kind, **overrides)
    if algorithm == "sac":
        return SacHyperparams.for_env(env_kind, **overrides)
    raise ConfigurationError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


# Records #####################################################################


@dataclass(frozen=True)
class Transition:
    """
    One learner record

    PPO uses value and log_prob; SAC uses next_obs and done.
    """

    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: Optional[np.ndarray] = None
    done: bool = False
    value: Optional[float] = None
    log_prob: Optional[float] = None


@dataclass(frozen=True)
class PolicyOutput:
    action: np.ndarray
    env_action: np.ndarray
    log_prob: Optional[float] = None
    value: Optional[float] = None


# Distributions ###############################################################


def gaussian_log_prob(action, mean, log_std) -> np.ndarray:
    """Diagonal Gaussian log-density summed over the last axis"""
    z = (np.asarray(action) - mean) / np.exp(log_std)
    d = np.shape(mean)[-1]
    return -0.5 * np.sum(z**2, axis=-1) - np.sum(log_std * np.ones_like(mean), axis=-1) - 0.5 * d * LOG_2PI


def squash_correction(u) -> np.ndarray:
    """log(1 - tanh(u)^2) written stably as 2 (log 2 - u - softplus(-2u))"""
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


def squashed_log_prob(u, mean, log_std) -> np.ndarray:
    """Log-density of a = tanh(u) for u drawn from N(mean, exp(log_std)^2)"""
    return gaussian_log_prob(u, mean, log_std) - np.sum(squash_correction(u), axis=-1)


# GAE #########################################################################


def discount_cumsum(values, discount: float) -> np.ndarray:
    """y_t = sum_k discount^k x_{t+k}"""
    values = np.asarray(values, dtype=np.float64)
    out = np.zeros_like(values)
    running = 0.0
    for t in reversed(range(values.size)):
        running = values[t] + discount * running
        out[t] = running
    return out


def compute_gae(rewards, values, last_value: float, gamma: float, lam: float):
    """
    GAE(gamma, lambda) advantages and bootstrapped rewards-to-go for one path

    Parameters
    ----------
    rewards, values : array-like
        Per-step rewards and critic values, equal length
    last_value : float
        Bootstrap value of the state after the path; 0 for a terminal end
    gamma, lam : float
        Discount and GAE lambda

    Returns
    -------
    advantages : np.ndarray
    returns : np.ndarray
    """
    rewards = np.append(np.asarray(rewards, dtype=np.float64), last_value)
    values = np.append(np.asarray(values, dtype=np.float64), last_value)
    deltas = rewards[:-1] + gamma * values[1:] - values[:-1]
    advantages = discount_cumsum(deltas, gamma * lam)
    returns = discount_cumsum(rewards, gamma)[:-1]
    return advantages, returns


class PpoBuffer:
    """On-policy storage for one epoch of PPO transitions"""

    def __init__(self, size: int, obs_dim: int, act_dim: int, gamma: float, lam: float):
        self.obs = np.zeros((size, obs_dim))
        self.actions = np.zeros((size, act_dim))
        self.rewards = np.zeros(size)
        self.values = np.zeros(size)
        self.log_probs = np.zeros(size)
        self.advantages = np.zeros(size)
        self.returns = np.zeros(size)
        self.gamma, self.lam = gamma, lam
        self.size = size
        self.ptr = 0
        self.path_start = 0

    def store(self, record: Transition) -> None:
        if self.ptr >= self.size:
            raise RuntimeError("PpoBuffer is full; call get() first")
        self.obs[self.ptr] = record.obs
        self.actions[self.ptr] = record.action
        self.rewards[self.ptr] = record.reward
        self.values[self.ptr] = record.value
        self.log_probs[self.ptr] = record.log_prob
        self.ptr += 1

    def finish_path(self, last_value: float = 0.0) -> None:
        path = slice(self.path_start, self.ptr)
        self.advantages[path], self.returns[path] = compute_gae(
            self.rewards[path], self.values[path], last_value, self.gamma, self.lam
        )
        self.path_start = self.ptr

    def get(self, normalize: bool = True) -> Dict[str, np.ndarray]:
        n = self.ptr
        advantages = self.advantages[:n].copy()
        if normalize and n > 1:
            std = advantages.std()
            advantages = (advantages - advantages.mean()) / (std if std > 0 else 1.0)
        batch = {
            "obs": self.obs[:n].copy(),
            "actions": self.actions[:n].copy(),
            "advantages": advantages,
            "returns": self.returns[:n].copy(),
            "log_probs": self.log_probs[:n].copy(),
        }
        self.ptr = 0
        self.path_start = 0
        return batch


class ReplayBuffer:
    """Fixed-capacity FIFO ring of SAC transitions"""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, act_dim))
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.ptr = 0
        self.count = 0

    def __len__(self) -> int:
        return self.count

    def store(self, record: Transition) -> None:
        self.obs[self.ptr] = record.obs
        self.next_obs[self.ptr] = record.next_obs
        self.actions[self.ptr] = record.action
        self.rewards[self.ptr] = record.reward
        self.dones[self.ptr] = float(record.done)
        self.ptr = (self.ptr + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)

    def order(self) -> np.ndarray:
        """Slot indices from oldest to newest"""
        if self.count < self.capacity:
            return np.arange(self.count)
        return (np.arange(self.capacity) + self.ptr) % self.capacity

    def sample(self, rng: np.random.Generator, batch_size: int) -> Dict[str, np.ndarray]:
        idx = rng.integers(0, self.count, size=batch_size)
        return {
            "obs": self.obs[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_obs": self.next_obs[idx],
            "dones": self.dones[idx],
        }


# Loss heads ##################################################################


def ppo_policy_loss(actor: Mlp, log_std: np.ndarray, obs, actions, advantages, old_log_probs, clip_ratio: float):
    """
    Clipped surrogate loss of the Gaussian policy

    Returns
    -------
    loss : float
    grads : dict
        Actor parameter gradients plus "log_std"
    info : dict
        approx_kl and clip_fraction of the current parameters
    """
    mean, cache = actor.forward(obs)
    n = mean.shape[0]
    std = np.exp(log_std)
    log_probs = gaussian_log_prob(actions, mean, log_std)
    ratio = np.exp(log_probs - old_log_probs)
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio)
    unclipped_term = ratio * advantages
    loss = -float(np.mean(np.minimum(unclipped_term, clipped * advantages)))

    # dL/dlogp is nonzero only where the unclipped term is selected
    coef = -np.where(unclipped_term <= clipped * advantages, unclipped_term, 0.0) / n
    z = (actions - mean) / std
    grads, _ = actor.backward(cache, coef[:, None] * z / std)
    grads["log_std"] = np.sum(coef[:, None] * (z**2 - 1.0), axis=0)
    info = {
        "approx_kl": float(np.mean(old_log_probs - log_probs)),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > clip_ratio)),
    }
    return loss, grads, info


def value_loss(critic: Mlp, inputs, targets):
    """Mean squared error of a scalar-output network"""
    predictions, cache = critic.forward(inputs)
    diff = predictions[:, 0] - targets
    loss = float(np.mean(diff**2))
    grads, _ = critic.backward(cache, (2.0 * diff / diff.size)[:, None])
    return loss, grads


def bellman_target(rewards, dones, next_q, next_log_probs, gamma: float, alpha: float) -> np.ndarray:
    """Entropy-regularised target r + gamma (1 - d) (min Q' - alpha log pi')"""
    return rewards + gamma * (1.0 - dones) * (next_q - alpha * next_log_probs)


def sac_actor_loss(actor: Mlp, q1: Mlp, q2: Mlp, obs, noise, alpha: float):
    """
    Reparameterised SAC policy loss mean(alpha log pi - min(Q1, Q2))

    Parameters
    ----------
    actor : Mlp
        Outputs [mean, log_std] per action dimension
    q1, q2 : Mlp
        Critics over [obs, action]; they are not updated here
    obs : np.ndarray
        Batch of observations
    noise : np.ndarray
        Standard normal draws, shape (batch, act_dim)
    alpha : float
        Entropy coefficient

    Returns
    -------
    loss : float
    grads : dict
        Actor parameter gradients
    info : dict
        Mean entropy estimate
    """
    out, cache = actor.forward(obs)
    n, act_dim = noise.shape
    mean, raw_log_std = out[:, :act_dim], out[:, act_dim:]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    std = np.exp(log_std)
    u = mean + std * noise
    action = np.tanh(u)
    log_probs = squashed_log_prob(u, mean, log_std)

    q1_value, q1_cache = q1.forward(np.hstack([obs, action]))
    q2_value, q2_cache = q2.forward(np.hstack([obs, action]))
    pick_first = q1_value[:, 0] <= q2_value[:, 0]
    q_min = np.where(pick_first, q1_value[:, 0], q2_value[:, 0])
    loss = float(np.mean(alpha * log_probs - q_min))

    first = pick_first.astype(np.float64)
    _, dx1 = q1.backward(q1_cache, (-first / n)[:, None])
    _, dx2 = q2.backward(q2_cache, (-(1.0 - first) / n)[:, None])
    d_action = (dx1 + dx2)[:, obs.shape[1] :]
    # d log pi / du = 2 tanh(u) through the squash correction
    d_u = d_action * (1.0 - action**2) + (alpha / n) * 2.0 * np.tanh(u)
    d_log_std = d_u * std * noise - alpha / n
    inside = (raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX)
    grads, _ = actor.backward(cache, np.hstack([d_u, d_log_std * inside]))
    return loss, grads, {"entropy": float(-np.mean(log_probs))}


def _abort(name: str, **diagnostics):
    raise TrainingAborted(f"non-finite {name}", diagnostics)


# Agents ######################################################################


class PpoAgent:
    """
    Gaussian-policy PPO with a separate value network

    Parameters
    ----------
    obs_dim, act_dim : int
        Observation and action widths
    action_scale : float
        Actuator bound; env_action = action_scale * clip(action, -1, 1)
    hp : PpoHyperparams
        Learner settings
    rng : np.random.Generator
        Network initialisation generator
    """

    algorithm = "ppo"

    def __init__(self, obs_dim: int, act_dim: int, action_scale: float, hp: PpoHyperparams, rng: np.random.Generator):
        self.hp = hp
        self.obs_dim, self.act_dim = obs_dim, act_dim
        self.action_scale = action_scale
        sizes = (obs_dim,) + hp.hidden_sizes
        self.actor = Mlp(sizes + (act_dim,), "tanh", "linear", rng, output_gain=0.01)
        self.critic = Mlp(sizes + (1,), "tanh", "linear", rng, output_gain=1.0)
        self.log_std = np.full(act_dim, hp.log_std_init, dtype=np.float64)
        self.actor_params = dict(self.actor.params, log_std=self.log_std)
        self.actor_opt = Adam(self.actor_params, hp.actor_lr)
        self.critic_opt = Adam(self.critic.params, hp.critic_lr)
        self.buffer = PpoBuffer(hp.epoch_length, obs_dim, act_dim, hp.gamma, hp.gae_lambda)
        self.updates = 0

    def value(self, obs) -> float:
        return float(self.critic(obs)[0])

    def act(self, obs, rng: Optional[np.random.Generator] = None, deterministic: bool = False) -> PolicyOutput:
        mean = self.actor(obs)
        if deterministic:
            action = mean
        else:
            action = mean + np.exp(self.log_std) * rng.normal(size=self.act_dim)
        return PolicyOutput(
            action=action,
            env_action=self.action_scale * np.clip(action, -1.0, 1.0),
            log_prob=float(gaussian_log_prob(action, mean, self.log_std)),
            value=self.value(obs),
        )

    def log_prob(self, obs, action) -> float:
        return float(gaussian_log_prob(action, self.actor(obs), self.log_std))

    def relabel(self, obs, env_action) -> Tuple[np.ndarray, float]:
        """Learner-space action and current log-density of an actuated action"""
        action = np.asarray(env_action, dtype=np.float64) / self.action_scale
        return action, self.log_prob(obs, action)

    def store(self, record: Transition) -> None:
        self.buffer.store(record)

    def end_path(self, last_obs=None, terminated: bool = True) -> None:
        """Close the current path, bootstrapping from V(last_obs) unless terminated"""
        last_value = 0.0 if terminated or last_obs is None else self.value(last_obs)
        self.buffer.finish_path(last_value)

    def _snapshot(self) -> dict:
        return {
            "params": {key: value.copy() for key, value in self.actor_params.items()},
            "opt": self.actor_opt.state(),
        }

    def _restore(self, snapshot: dict) -> None:
        for key, value in snapshot["params"].items():
            self.actor_params[key][...] = value
        self.actor_opt.load_state(snapshot["opt"])

    def _measure_kl(self, batch) -> float:
        log_probs = gaussian_log_prob(batch["actions"], self.actor(batch["obs"]), self.log_std)
        return float(np.mean(batch["log_probs"] - log_probs))

    def update(self) -> dict:
        """
        One PPO round over the stored epoch

        Actor steps stop once the full-batch KL exceeds target_kl; a step that
        pushes it past 1.5 target_kl is reverted.

        Returns
        -------
        diagnostics : dict
            approx_kl, clip_fraction, policy_loss, value_loss, actor_steps
        """
        hp = self.hp
        batch = self.buffer.get(hp.normalize_advantages)
        policy_loss, info, approx_kl, actor_steps = 0.0, {"clip_fraction": 0.0}, 0.0, 0
        for _ in range(hp.updates_per_epoch):
            policy_loss, grads, info = ppo_policy_loss(
                self.actor,
                self.log_std,
                batch["obs"],
                batch["actions"],
                batch["advantages"],
                batch["log_probs"],
                hp.clip_ratio,
            )
            if not np.isfinite(policy_loss):
                _abort("policy loss", policy_loss=policy_loss, updates=self.updates)
            snapshot = self._snapshot()
            self.actor_opt.step(grads)
            kl = self._measure_kl(batch)
            if not np.isfinite(kl) or kl > 1.5 * hp.target_kl:
                self._restore(snapshot)
                logger.debug("PPO step reverted at KL %.5f", kl)
                break
            approx_kl = kl
            actor_steps += 1
            if kl > hp.target_kl:
                break

        critic_loss = 0.0
        for _ in range(hp.updates_per_epoch):
            critic_loss, grads = value_loss(self.critic, batch["obs"], batch["returns"])
            if not np.isfinite(critic_loss):
                _abort("value loss", value_loss=critic_loss, updates=self.updates)
            self.critic_opt.step(grads)

        self.updates += 1
        return {
            "approx_kl": approx_kl,
            "clip_fraction": info["clip_fraction"],
            "policy_loss": policy_loss,
            "value_loss": critic_loss,
            "actor_steps": actor_steps,
        }

    def tensors(self) -> Dict[str, np.ndarray]:
        out = {f"actor/{key}": value for key, value in self.actor.params.items()}
        out["actor/log_std"] = self.log_std
        out.update({f"critic/{key}": value for key, value in self.critic.params.items()})
        return out

    def load_tensors(self, tensors: Dict[str, np.ndarray]) -> None:
        self.actor.load_state({key: tensors[f"actor/{key}"] for key in self.actor.params})
        self.log_std[...] = tensors["actor/log_std"]
        self.critic.load_state({key: tensors[f"critic/{key}"] for key in self.critic.params})


class SacAgent:
    """
    Soft actor-critic with twin critics, target networks and a fixed alpha

    Parameters
    ----------
    obs_dim, act_dim : int
        Observation and action widths
    action_scale : float
        Actuator bound; env_action = action_scale * tanh(u)
    hp : SacHyperparams
        Learner settings
    rng : np.random.Generator
        Network initialisation generator
    """

    algorithm = "sac"

    def __init__(self, obs_dim: int, act_dim: int, action_scale: float, hp: SacHyperparams, rng: np.random.Generator):
        self.hp = hp
        self.obs_dim, self.act_dim = obs_dim, act_dim
        self.action_scale = action_scale
        hidden = hp.hidden_sizes
        self.actor = Mlp((obs_dim,) + hidden + (2 * act_dim,), "relu", "linear", rng, output_gain=0.01)
        critic_sizes = (obs_dim + act_dim,) + hidden + (1,)
        self.q1 = Mlp(critic_sizes, "relu", hp.critic_output, rng, output_gain=1.0)
        self.q2 = Mlp(critic_sizes, "relu", hp.critic_output, rng, output_gain=1.0)
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()
        self.actor_opt = Adam(self.actor.params, hp.actor_lr)
        self.q1_opt = Adam(self.q1.params, hp.critic_lr)
        self.q2_opt = Adam(self.q2.params, hp.critic_lr)
        self.replay = ReplayBuffer(hp.replay_size, obs_dim, act_dim)
        self.updates = 0

    def _distribution(self, obs):
        out = self.actor(obs)
        mean = out[..., : self.act_dim]
        log_std = np.clip(out[..., self.act_dim :], LOG_STD_MIN, LOG_STD_MAX)
        return mean, log_std

    def act(self, obs, rng: Optional[np.random.Generator] = None, deterministic: bool = False) -> PolicyOutput:
        mean, log_std = self._distribution(obs)
        u = mean if deterministic else mean + np.exp(log_std) * rng.normal(size=self.act_dim)
        action = np.tanh(u)
        return PolicyOutput(
            action=action,
            env_action=self.action_scale * action,
            log_prob=float(squashed_log_prob(u, mean, log_std)),
        )

    def relabel(self, obs, env_action) -> Tuple[np.ndarray, Optional[float]]:
        return np.clip(np.asarray(env_action, dtype=np.float64) / self.action_scale, -1.0, 1.0), None

    def store(self, record: Transition) -> None:
        self.replay.store(record)

    def end_path(self, last_obs=None, terminated: bool = True) -> None:
        """Replay records carry their own done flag"""

    def ready(self) -> bool:
        return len(self.replay) >= max(self.hp.update_after, self.hp.minibatch_size)

    def update(self, rng: np.random.Generator) -> dict:
        """
        One critic step, one actor step and the polyak target update

        Returns
        -------
        diagnostics : dict
            q_loss, policy_loss, entropy
        """
        hp = self.hp
        batch = self.replay.sample(rng, hp.minibatch_size)

        next_mean, next_log_std = self._distribution(batch["next_obs"])
        next_u = next_mean + np.exp(next_log_std) * rng.normal(size=next_mean.shape)
        next_action = np.tanh(next_u)
        next_log_probs = squashed_log_prob(next_u, next_mean, next_log_std)
        next_inputs = np.hstack([batch["next_obs"], next_action])
        next_q = np.minimum(self.q1_target(next_inputs)[:, 0], self.q2_target(next_inputs)[:, 0])
        targets = bellman_target(batch["rewards"], batch["dones"], next_q, next_log_probs, hp.gamma, hp.alpha)

        inputs = np.hstack([batch["obs"], batch["actions"]])
        q1_loss, q1_grads = value_loss(self.q1, inputs, targets)
        q2_loss, q2_grads = value_loss(self.q2, inputs, targets)
        if not (np.isfinite(q1_loss) and np.isfinite(q2_loss)):
            _abort("critic loss", q1_loss=q1_loss, q2_loss=q2_loss, updates=self.updates)
        self.q1_opt.step(q1_grads)
        self.q2_opt.step(q2_grads)

        noise = rng.normal(size=(hp.minibatch_size, self.act_dim))
        policy_loss, actor_grads, info = sac_actor_loss(self.actor, self.q1, self.q2, batch["obs"], noise, hp.alpha)
        if not (np.isfinite(policy_loss) and all_finite(*actor_grads.values())):
            _abort("policy loss", policy_loss=policy_loss, updates=self.updates)
        self.actor_opt.step(actor_grads)

        polyak_update(self.q1_target, self.q1, hp.polyak)
        polyak_update(self.q2_target, self.q2, hp.polyak)
        self.updates += 1
        return {"q_loss": q1_loss + q2_loss, "policy_loss": policy_loss, "entropy": info["entropy"]}

    def tensors(self) -> Dict[str, np.ndarray]:
        out = {}
        for name in ("actor", "q1", "q2", "q1_target", "q2_target"):
            out.update({f"{name}/{key}": value for key, value in getattr(self, name).params.items()})
        return out

    def load_tensors(self, tensors: Dict[str, np.ndarray]) -> None:
        for name in ("actor", "q1", "q2", "q1_target", "q2_target"):
            prefix = f"{name}/"
            getattr(self, name).load_state(
                {key[len(prefix) :]: value for key, value in tensors.items() if key.startswith(prefix)}
            )


def make_agent(algorithm: str, obs_dim: int, act_dim: int, action_scale: float, hp, rng: np.random.Generator):
    """Build the learner for an algorithm name"""
    if algorithm == "ppo":
        return PpoAgent(obs_dim, act_dim, action_scale, hp, rng)
    if algorithm == "sac":
        return SacAgent(obs_dim, act_dim, action_scale, hp, rng)
    raise ConfigurationError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def policy_act(agent, obs, mode: str = "deterministic", rng: Optional[np.random.Generator] = None) -> PolicyOutput:
    """Act in ``stochastic`` or ``deterministic`` mode"""
    if mode not in ("stochastic", "deterministic"):
        raise ValueError(f"mode must be stochastic or deterministic, got {mode!r}")
    return agent.act(obs, rng, deterministic=mode == "deterministic")
