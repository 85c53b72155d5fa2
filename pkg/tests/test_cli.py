# -*- coding: utf-8 -*-

import argparse
import os

import pytest

from cli import EXIT_CONFIG, EXIT_OK, main, parse_seeds

STUDY = """\
format_version: 1
seeds: [1630, 2241]
experiments:
  - name: dock
    env: docking2d
    algorithm: ppo
    filter: explicit_asif
    config: rta_corrected_action
"""


@pytest.fixture
def study_file(tmp_path):
    path = tmp_path / "study.yaml"
    path.write_text(STUDY, encoding="utf-8")
    return str(path)


def test_validate(study_file, capsys):
    assert main(["validate", "--config", study_file]) == EXIT_OK
    out = capsys.readouterr().out
    assert "1 experiments, 2 runs" in out
    assert "dock [" in out


def test_bad_config_exits_with_config_status(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(STUDY.replace("docking2d", "pendulum"), encoding="utf-8")
    assert main(["validate", "--config", str(path)]) == EXIT_CONFIG


def test_tables_on_empty_study(tmp_path, capsys):
    out_dir = str(tmp_path / "results")
    assert main(["tables", "--out", out_dir]) == EXIT_OK
    assert capsys.readouterr().out.startswith("Configuration")
    assert os.path.exists(os.path.join(out_dir, "tables.txt"))


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RTA_ABLATION_OUTPUT_ROOT", str(tmp_path / "env-root"))
    assert main(["curves"]) == EXIT_OK
    assert os.path.isdir(tmp_path / "env-root" / "curves")


def test_parse_seeds():
    assert parse_seeds("1630, 2241,") == [1630, 2241]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_seeds("1630,x")
