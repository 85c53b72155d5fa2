# -*- coding: utf-8 -*-

import os

import pandas as pd
import pytest

from rta_ablation.harness import RunResult
from rta_ablation.tables import TABLE_COLUMNS, curve_tables, export_curves, format_stat, render_tables
from rta_ablation.utilities import result_paths, write_json_atomic


def episode(mode, ret, success=1.0):
    return {
        "mode": mode,
        "return": ret,
        "length": 200,
        "success": success,
        "interventions_or_violations": 0,
        "correction": 0.0,
        "interventions": 0,
        "violations": 0,
    }


def store(output_dir, name, config, seed, returns, epochs=(1, 2), status="complete", algorithm="ppo"):
    spec = {"env": "pendulum", "algorithm": algorithm, "filter": "implicit_asif", "config": config}
    curves = [
        {"epoch": epoch, "mode": mode, "return_mean": float(epoch * seed), "success_mean": 1.0}
        for epoch in epochs
        for mode in ("on", "off")
    ]
    final_episodes = [episode(mode, ret) for mode in ("on", "off") for ret in returns]
    result = RunResult(
        name=name,
        spec=spec,
        spec_hash=f"{seed:012d}",
        seed=seed,
        status=status,
        curves=curves,
        final_episodes=final_episodes if status == "complete" else [],
    )
    json_path, _ = result_paths(output_dir, name, result.spec_hash, seed)
    write_json_atomic(json_path, result.to_dict())


def test_format_stat():
    assert format_stat(987.844, 10.855) == "987.84 ± 10.86"
    assert format_stat(-0.5, 0.0) == "-0.50 ± 0.00"


def test_empty_study_renders_header(tmp_path):
    text = render_tables(str(tmp_path))
    assert text.strip().split() == " ".join(TABLE_COLUMNS).split()
    assert curve_tables(str(tmp_path)) == {}


def test_tables_pool_seeds_in_config_order(tmp_path):
    out = str(tmp_path)
    store(out, "punished", "rta_punishment", 1, [1.0, 3.0])
    store(out, "punished", "rta_punishment", 2, [5.0, 7.0])
    store(out, "plain", "baseline", 1, [10.0])
    store(out, "broken", "rta_no_punishment", 1, [], status="failed")
    text = render_tables(out)
    lines = text.splitlines()
    assert lines[0] == "PPO pendulum / implicit_asif"
    body = "\n".join(lines[2:])
    assert body.index("baseline") < body.index("rta_punishment")
    # four episodes pooled: mean 4, population std sqrt(5)
    assert "4.00 ± 2.24" in text
    assert "10.00 ± 0.00" in text
    assert "0.00 ± 0.00" in text


def test_duplicate_configs_use_experiment_names(tmp_path):
    out = str(tmp_path)
    store(out, "short-horizon", "rta_punishment", 1, [1.0])
    store(out, "long-horizon", "rta_punishment", 1, [2.0])
    text = render_tables(out)
    assert "short-horizon" in text
    assert "long-horizon" in text


def test_curve_tables(tmp_path):
    out = str(tmp_path)
    store(out, "plain", "baseline", 1, [1.0], epochs=(2, 1))
    store(out, "plain", "baseline", 3, [1.0], epochs=(1, 2))
    store(out, "punished", "rta_punishment", 1, [1.0], epochs=(1,))
    tables = curve_tables(out)
    assert len(tables) == 4
    curve_df = tables["pendulum__ppo__implicit_asif__return__on"]
    assert list(curve_df.columns) == [
        "epoch",
        "baseline_mean",
        "baseline_ci",
        "rta_punishment_mean",
        "rta_punishment_ci",
    ]
    assert curve_df["epoch"].tolist() == [1, 2]
    assert curve_df["baseline_mean"].tolist() == pytest.approx([2.0, 4.0])
    assert curve_df["baseline_ci"].tolist() == pytest.approx([1.96, 3.92])
    assert pd.isna(curve_df["rta_punishment_mean"].iloc[1])


def test_export_curves(tmp_path):
    out = str(tmp_path)
    store(out, "plain", "baseline", 1, [1.0], algorithm="sac")
    paths = export_curves(out)
    assert sorted(os.path.basename(path) for path in paths) == [
        "pendulum__sac__implicit_asif__return__off.csv",
        "pendulum__sac__implicit_asif__return__on.csv",
        "pendulum__sac__implicit_asif__success__off.csv",
        "pendulum__sac__implicit_asif__success__on.csv",
    ]
    with open(paths[0], "r", encoding="utf-8") as f:
        assert f.readline().strip() == "epoch,baseline_mean,baseline_ci"
        assert f.readline().strip() == "1,1.000000,0.000000"
