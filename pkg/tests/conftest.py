# -*- coding: utf-8 -*-

import numpy as np
import pytest

from rta_ablation.agents import PpoHyperparams, SacHyperparams
from rta_ablation.envs import DockingParams, PendulumParams
from rta_ablation.harness import ExperimentSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1630)


@pytest.fixture
def pendulum_params():
    return PendulumParams()


@pytest.fixture
def docking_params():
    return DockingParams()


@pytest.fixture
def tiny_ppo_spec():
    """Pendulum PPO cell small enough to train in well under a second"""
    hp = PpoHyperparams.for_env("pendulum", epochs=2, epoch_length=40, max_episode_length=20, hidden_sizes=(8, 8))
    return ExperimentSpec(
        name="tiny-ppo",
        env_kind="pendulum",
        algorithm="ppo",
        filter_kind="implicit_simplex",
        config="rta_no_punishment",
        hyperparams=hp,
        seeds=(1, 2),
        eval_episodes_interim=2,
        eval_episodes_final=3,
    )


@pytest.fixture
def tiny_sac_spec():
    hp = SacHyperparams.for_env(
        "pendulum",
        epochs=1,
        epoch_length=30,
        max_episode_length=15,
        hidden_sizes=(8, 8),
        replay_size=100,
        minibatch_size=8,
        update_after=10,
    )
    return ExperimentSpec(
        name="tiny-sac",
        env_kind="pendulum",
        algorithm="sac",
        filter_kind="implicit_simplex",
        config="baseline",
        hyperparams=hp,
        seeds=(1,),
        eval_episodes_interim=1,
        eval_episodes_final=2,
    )
