# -*- coding: utf-8 -*-

# Imports #####################################################################

from dataclasses import asdict, dataclass
from typing import Iterable, List

import numpy as np
import pandas as pd

from rta_ablation.exceptions import ConfigurationError

EPISODE_COLUMNS = [
    "return",
    "length",
    "success",
    "interventions_or_violations",
    "correction",
    "interventions",
    "violations",
]
SUMMARY_METRICS = ["return", "length", "success", "interventions_or_violations", "correction"]

# Classes #####################################################################


@dataclass(frozen=True)
class EpisodeMetrics:
    """
    Per-episode evaluation record

    ``interventions_or_violations`` counts interventions with the filter on and
    violations with it off, the shared column of the result tables.
    """

    ret: float
    length: int
    success: bool
    interventions_or_violations: int
    correction: float
    interventions: int = 0
    violations: int = 0

    def to_row(self) -> dict:
        row = asdict(self)
        row["return"] = float(row.pop("ret"))
        row["success"] = float(self.success)
        return row


@dataclass(frozen=True)
class DependenceThresholds:
    """
    Attributes
    ----------
    success : float
        Minimum drop in success rate that marks a policy as dependent
    return_fraction : float
        Minimum drop in return as a fraction of |mean_on| + std_on
    """

    success: float = 0.2
    return_fraction: float = 0.2

    def __post_init__(self):
        if self.success < 0 or self.return_fraction < 0:
            raise ConfigurationError("dependence thresholds must be >= 0")


@dataclass(frozen=True)
class DependenceReport:
    dependent: bool
    delta_return: float
    delta_success: float

    def to_dict(self) -> dict:
        return asdict(self)


# Functions ###################################################################


def episodes_frame(episodes: Iterable[EpisodeMetrics]) -> pd.DataFrame:
    """Stack episode records into a dataframe with EPISODE_COLUMNS"""
    rows = [episode.to_row() for episode in episodes]
    return pd.DataFrame(rows, columns=EPISODE_COLUMNS)


def summarize_episodes(episodes_df: pd.DataFrame) -> dict:
    """
    Mean and population standard deviation of every summary metric

    Parameters
    ----------
    episodes_df : pandas dataframe
        One row per episode, EPISODE_COLUMNS

    Returns
    -------
    summary : dict
        "count", "<metric>_mean", "<metric>_std" and "violations"; all zero
        when there are no episodes
    """
    count = int(len(episodes_df))
    summary = {"count": count}
    for metric in SUMMARY_METRICS:
        if count == 0:
            summary[f"{metric}_mean"] = 0.0
            summary[f"{metric}_std"] = 0.0
            continue
        values = episodes_df[metric].to_numpy(dtype=np.float64)
        # episode spread uses ddof = 0
        summary[f"{metric}_mean"] = float(np.mean(values))
        summary[f"{metric}_std"] = float(np.std(values))
    summary["violations"] = int(episodes_df["violations"].sum()) if count else 0
    summary["interventions"] = int(episodes_df["interventions"].sum()) if count else 0
    return summary


def confidence_band(values) -> tuple:
    """
    Normal-approximation 95% confidence band about the mean

    Parameters
    ----------
    values : array-like
        One value per seed

    Returns
    -------
    mean : float
    half_width : float
        1.96 * sample std / sqrt(n); 0 for fewer than two values
    """
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        return 0.0, 0.0
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    # calculate the sample standard deviation across seeds
    std = float(np.std(values, ddof=1))
    return mean, 1.96 * std / np.sqrt(values.size)


def detect_dependence(on: dict, off: dict, thresholds: DependenceThresholds = DependenceThresholds()) -> DependenceReport:
    """
    Flag a policy whose performance drops once the RTA is removed

    Parameters
    ----------
    on, off : dict
        Summaries with return_mean, return_std and success_mean of the
        RTA-on and RTA-off evaluations
    thresholds : DependenceThresholds
        Success and return drop thresholds

    Returns
    -------
    DependenceReport
    """
    delta_return = float(on["return_mean"] - off["return_mean"])
    delta_success = float(on["success_mean"] - off["success_mean"])
    # the return span of the on-mode evaluation sets the return threshold
    span = abs(on["return_mean"]) + on.get("return_std", 0.0)
    dependent = delta_success > thresholds.success or delta_return > thresholds.return_fraction * span
    return DependenceReport(dependent=bool(dependent), delta_return=delta_return, delta_success=delta_success)


def pooled_summary(frames: List[pd.DataFrame]) -> dict:
    """Summary over the episodes of several runs pooled together"""
    frames = [frame for frame in frames if len(frame)]
    if not frames:
        return summarize_episodes(pd.DataFrame(columns=EPISODE_COLUMNS))
    return summarize_episodes(pd.concat(frames, ignore_index=True))
