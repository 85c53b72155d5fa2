# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
The five RTA training configurations as rewrite rules from a raw transition
and a FilterDecision to the record the learner stores.
"""

# Imports #####################################################################

import logging
from dataclasses import replace
from enum import Enum
from typing import Callable, Optional

from rta_ablation.agents import Transition
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.rta import FilterDecision

logger = logging.getLogger(__name__)

# Classes #####################################################################


class ConfigKind(str, Enum):
    BASELINE = "baseline"
    BASELINE_PUNISHMENT = "baseline_punishment"
    RTA_NO_PUNISHMENT = "rta_no_punishment"
    RTA_PUNISHMENT = "rta_punishment"
    RTA_CORRECTED_ACTION = "rta_corrected_action"

    @property
    def uses_rta(self) -> bool:
        """Whether the filter is active during training"""
        return self.value.startswith("rta_")

    @property
    def punishes(self) -> bool:
        return self in (ConfigKind.BASELINE_PUNISHMENT, ConfigKind.RTA_PUNISHMENT)


CONFIG_KINDS = tuple(kind.value for kind in ConfigKind)

# Functions ###################################################################


def config_kind(value) -> ConfigKind:
    try:
        return ConfigKind(value)
    except ValueError:
        raise ConfigurationError(f"unknown config {value!r}; expected one of {CONFIG_KINDS}") from None


def check_config_filter(config, filter_kind: str) -> None:
    """The rta_* configurations need a filter to train with"""
    config = config_kind(config)
    if config.uses_rta and filter_kind == "none":
        raise ConfigurationError(f"{config.value} requires an RTA filter, got filter 'none'")


def training_filter_kind(config, filter_kind: str) -> str:
    """
    Filter used while training

    Baseline configurations train unshielded; their experiment filter is only
    used for the RTA-on evaluations.
    """
    return filter_kind if config_kind(config).uses_rta else "none"


def rewrite(
    config,
    transition: Transition,
    decision: FilterDecision,
    violated: bool,
    punishment: float,
    relabel: Optional[Callable] = None,
) -> Transition:
    """
    Apply a training configuration to one transition

    Parameters
    ----------
    config : ConfigKind or str
        Training configuration
    transition : Transition
        Record built from the desired action and the training reward
    decision : FilterDecision
        What the filter did on this step
    violated : bool
        Whether the next state left the admissible set
    punishment : float
        The per-environment constant p (negative)
    relabel : callable, optional
        actuated_action -> (learner action, log_prob or None); required by
        rta_corrected_action

    Returns
    -------
    Transition
    """
    config = config_kind(config)
    if not config.uses_rta and decision.intervened:
        raise ConfigurationError(f"{config.value} trains without a filter but the filter intervened")

    if config is ConfigKind.BASELINE_PUNISHMENT:
        if violated:
            return replace(transition, reward=transition.reward + punishment)
        return transition
    if config is ConfigKind.RTA_PUNISHMENT:
        if decision.intervened:
            return replace(transition, reward=transition.reward + punishment)
        return transition
    if config is ConfigKind.RTA_CORRECTED_ACTION and decision.intervened:
        if relabel is None:
            raise ConfigurationError("rta_corrected_action needs a relabel function")
        action, log_prob = relabel(decision.actuated_action)
        return replace(
            transition,
            action=action,
            log_prob=transition.log_prob if log_prob is None else log_prob,
        )
    return transition


def training_reward(config, base_reward: float, safety_components: dict) -> float:
    """
    Reward the learner sees before ``rewrite``

    Only the punishment configurations keep the over-max-velocity term; the
    intervention term is never included since ``rewrite`` adds p itself.
    """
    if config_kind(config).punishes:
        return float(base_reward + safety_components.get("over_max_velocity", 0.0))
    return float(base_reward)
