# -*- coding: utf-8 -*-

import os
import textwrap

import pytest

from rta_ablation.config import parse_config, parse_config_text, write_config
from rta_ablation.exceptions import ConfigParseError, ConfigurationError

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "configs")

MINIMAL = textwrap.dedent(
    """\
    format_version: 1
    seeds: [1, 2]
    experiments:
      - name: swing
        env: pendulum
        algorithm: ppo
        filter: implicit_simplex
        config: rta_no_punishment
    """
)


def parse(text):
    return parse_config_text(textwrap.dedent(text), "study.yaml")


def test_minimal_config_fills_defaults():
    study = parse_config_text(MINIMAL)
    assert study.parallel == 1
    assert study.seeds == (1, 2)
    assert study.run_count == 2
    (spec,) = study.experiments
    assert spec.seeds == (1, 2)
    assert spec.hyperparams.gamma == 0.0
    assert spec.hyperparams.epoch_length == 4000
    assert spec.eval_episodes_final == 100


def test_scientific_notation_is_numeric():
    study = parse(
        """\
        format_version: 1
        experiments:
          - name: dock
            env: docking2d
            algorithm: sac
            filter: explicit_asif
            config: rta_punishment
            hyperparameters:
              actor_lr: 1e-3
            env_params:
              rta_punishment: -1e-3
        """
    )
    spec = study.experiments[0]
    assert spec.hyperparams.actor_lr == pytest.approx(1e-3)
    assert spec.env_params.rta_punishment == pytest.approx(-1e-3)


def test_unknown_key_reports_line():
    with pytest.raises(ConfigParseError) as info:
        parse(
            """\
            format_version: 1
            experiments:
              - name: swing
                env: pendulum
                algorithm: ppo
                filter: implicit_simplex
                config: baseline
                learning_rate: 3
            """
        )
    assert info.value.line == 8
    assert "learning_rate" in info.value.message
    assert str(info.value).startswith("study.yaml:8")


def test_invalid_pairing_in_grid_reports_line():
    with pytest.raises(ConfigParseError) as info:
        parse(
            """\
            format_version: 1
            grid:
              env: [docking2d, pendulum]
              algorithm: ppo
              filter: explicit_asif
              config: baseline
            """
        )
    assert info.value.line == 2
    assert "pendulum" in info.value.message


def test_missing_field():
    with pytest.raises(ConfigParseError) as info:
        parse(
            """\
            format_version: 1
            experiments:
              - name: swing
                env: pendulum
                algorithm: ppo
                config: baseline
            """
        )
    assert "'filter'" in info.value.message
    assert info.value.line == 3


@pytest.mark.parametrize("version", ["2", "'1'"])
def test_format_version_checked(version):
    with pytest.raises(ConfigParseError) as info:
        parse_config_text(MINIMAL.replace("format_version: 1", f"format_version: {version}"))
    assert info.value.line == 1


def test_parse_errors_are_configuration_errors():
    with pytest.raises(ConfigurationError):
        parse_config_text("format_version: 1\n")
    with pytest.raises(ConfigParseError):
        parse_config_text(MINIMAL + "parallel: 0\n")
    with pytest.raises(ConfigParseError):
        parse_config_text("format_version: [1\n")


def test_duplicate_names_rejected():
    text = MINIMAL + textwrap.indent(
        textwrap.dedent(
            """\
            - name: swing
              env: pendulum
              algorithm: sac
              filter: implicit_asif
              config: baseline
            """
        ),
        "  ",
    )
    with pytest.raises(ConfigParseError) as info:
        parse_config_text(text)
    assert "duplicate" in info.value.message


def test_grid_expansion():
    study = parse(
        """\
        format_version: 1
        seeds: [7]
        grid:
          name: ablation
          env: [docking2d, docking3d]
          algorithm: [ppo, sac]
          filter: implicit_simplex
          config: [baseline, rta_punishment, rta_corrected_action]
          eval_episodes_final: 5
        """
    )
    assert len(study.experiments) == 12
    names = [spec.name for spec in study.experiments]
    assert names[0] == "ablation-docking2d-ppo-implicit_simplex-baseline"
    assert names[-1] == "ablation-docking3d-sac-implicit_simplex-rta_corrected_action"
    assert all(spec.eval_episodes_final == 5 for spec in study.experiments)
    assert study.run_count == 12


def test_defaults_merge_into_experiments():
    study = parse(
        """\
        format_version: 1
        defaults:
          hyperparameters:
            epochs: 3
          eval_episodes_interim: 4
        experiments:
          - name: swing
            env: pendulum
            algorithm: ppo
            filter: implicit_asif
            config: rta_punishment
            hyperparameters:
              epoch_length: 50
        """
    )
    spec = study.experiments[0]
    assert spec.hyperparams.epochs == 3
    assert spec.hyperparams.epoch_length == 50
    assert spec.eval_episodes_interim == 4


def test_write_config_round_trip(tmp_path):
    study = parse(
        """\
        format_version: 1
        output_dir: results
        parallel: 2
        grid:
          env: [docking2d, docking3d]
          algorithm: [ppo, sac]
          filter: [explicit_simplex, implicit_asif]
          config: rta_corrected_action
        """
    )
    path = write_config(study, str(tmp_path / "study.yaml"))
    assert parse_config(path) == study


def test_with_seeds_overrides_every_experiment():
    study = parse_config_text(MINIMAL).with_seeds(["5", 6, 7])
    assert study.seeds == (5, 6, 7)
    assert study.experiments[0].seeds == (5, 6, 7)
    assert study.run_count == 3


@pytest.mark.parametrize(
    "filename, experiments",
    [
        ("pendulum_smoke.yaml", 5),
        ("docking_ablation.yaml", 81),
        ("pendulum_reference.yaml", 2),
        ("docking2d_short.yaml", 1),
    ],
)
def test_shipped_configs_parse(filename, experiments):
    study = parse_config(os.path.join(CONFIG_DIR, filename))
    assert len(study.experiments) == experiments
