# -*- coding: utf-8 -*-

import os

import pandas as pd
import pytest

from rta_ablation import study
from rta_ablation.config import StudyConfig
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.study import main_run_study
from rta_ablation.tables import render_tables
from rta_ablation.utilities import list_result_files, read_json


@pytest.fixture
def tiny_study(tiny_ppo_spec):
    return StudyConfig(experiments=[tiny_ppo_spec], seeds=tiny_ppo_spec.seeds)


def test_study_writes_results_and_index(tiny_study, tmp_path):
    out = str(tmp_path)
    assert main_run_study(tiny_study, out) == 0
    files = list_result_files(out)
    assert len(files) == 2
    assert all(os.path.exists(path[: -len(".json")] + ".h5") for path in files)
    assert os.path.basename(files[0]).startswith(f"tiny-ppo__{tiny_study.experiments[0].config_hash()}__seed")
    index_df = pd.read_csv(os.path.join(out, "index.csv"))
    assert list(index_df.columns) == ["name", "spec_hash", "seed", "status", "file"]
    assert index_df["status"].tolist() == ["complete", "complete"]
    assert "PPO pendulum / implicit_simplex" in render_tables(out)


def test_rerun_requires_resume(tiny_study, tmp_path, monkeypatch):
    out = str(tmp_path)
    main_run_study(tiny_study, out)
    before = {path: read_json(path) for path in list_result_files(out)}
    with pytest.raises(ConfigurationError):
        main_run_study(tiny_study, out)

    def no_training(*args, **kwargs):
        raise AssertionError("complete runs must not be retrained")

    monkeypatch.setattr(study, "train", no_training)
    assert main_run_study(tiny_study, out, resume=True) == 0
    assert {path: read_json(path) for path in list_result_files(out)} == before


def test_failed_run_is_recorded(tiny_study, tmp_path, monkeypatch):
    def broken(spec, seed, checkpoint_path=None):
        raise RuntimeError(f"seed {seed} broke")

    monkeypatch.setattr(study, "train", broken)
    out = str(tmp_path)
    assert main_run_study(tiny_study, out) == 1
    results = [read_json(path) for path in list_result_files(out)]
    assert [result["status"] for result in results] == ["failed", "failed"]
    assert results[0]["error"] == "RuntimeError: seed 1 broke"
    assert results[0]["curves"] == []
