# -*- coding: utf-8 -*-

import numpy as np
import pandas as pd
import pytest

from rta_ablation.exceptions import ConfigurationError
from rta_ablation.metrics import (
    EPISODE_COLUMNS,
    DependenceThresholds,
    EpisodeMetrics,
    confidence_band,
    detect_dependence,
    episodes_frame,
    pooled_summary,
    summarize_episodes,
)

# final on/off evaluations of implicit-simplex PPO agents: (return mean, return std, success mean)
DEPENDENCE_ROWS = [
    ("pendulum rta_no_punishment", (987.84, 10.86, 1.00), (987.59, 10.38, 1.00), False),
    ("pendulum rta_punishment", (987.57, 11.20, 1.00), (987.85, 11.18, 1.00), False),
    ("docking2d rta_no_punishment", (2.02, 0.39, 0.92), (-22.39, 15.39, 0.34), True),
    ("docking2d rta_punishment", (1.82, 0.60, 0.73), (-17.99, 5.16, 0.46), True),
    ("docking3d rta_no_punishment", (-33.29, 22.18, 0.50), (-23.51, 8.54, 0.44), False),
    ("docking3d rta_punishment", (2.04, 0.39, 0.89), (2.07, 0.34, 0.92), False),
]


def as_summary(values):
    mean, std, success = values
    return {"return_mean": mean, "return_std": std, "success_mean": success}


@pytest.mark.parametrize("label, on, off, dependent", DEPENDENCE_ROWS, ids=[row[0] for row in DEPENDENCE_ROWS])
def test_dependence_classification(label, on, off, dependent):
    report = detect_dependence(as_summary(on), as_summary(off))
    assert report.dependent == dependent


def test_dependence_deltas():
    report = detect_dependence(as_summary((2.02, 0.39, 0.92)), as_summary((-22.39, 15.39, 0.34)))
    assert report.delta_return == pytest.approx(24.41)
    assert report.delta_success == pytest.approx(0.58)
    assert report.to_dict()["dependent"] is True


def test_thresholds_validated():
    with pytest.raises(ConfigurationError):
        DependenceThresholds(success=-0.1)


def test_confidence_band():
    assert confidence_band([0.0, 2.0]) == pytest.approx((1.0, 1.96))
    assert confidence_band([3.0]) == (3.0, 0.0)
    assert confidence_band([]) == (0.0, 0.0)


def test_summarize_episodes_population_std():
    episodes = [
        EpisodeMetrics(ret=10.0, length=200, success=True, interventions_or_violations=0, correction=0.0),
        EpisodeMetrics(ret=20.0, length=100, success=False, interventions_or_violations=4, correction=1.5, violations=4),
    ]
    summary = summarize_episodes(episodes_frame(episodes))
    assert summary["count"] == 2
    assert summary["return_mean"] == pytest.approx(15.0)
    assert summary["return_std"] == pytest.approx(5.0)
    assert summary["success_mean"] == pytest.approx(0.5)
    assert summary["violations"] == 4


def test_empty_summary_is_zero():
    summary = summarize_episodes(pd.DataFrame(columns=EPISODE_COLUMNS))
    assert summary["count"] == 0
    assert summary["return_mean"] == 0.0
    assert summary["interventions"] == 0


def test_pooled_summary_skips_empty_frames():
    frame = episodes_frame(
        [EpisodeMetrics(ret=1.0, length=1, success=True, interventions_or_violations=0, correction=0.0)]
    )
    pooled = pooled_summary([frame, pd.DataFrame(columns=EPISODE_COLUMNS), frame])
    assert pooled["count"] == 2
    assert pooled_summary([])["count"] == 0


def test_episode_row_names_return():
    row = EpisodeMetrics(ret=1.5, length=3, success=True, interventions_or_violations=1, correction=0.2).to_row()
    assert set(row) == set(EPISODE_COLUMNS)
    assert row["success"] == 1.0
    assert np.isclose(row["return"], 1.5)
