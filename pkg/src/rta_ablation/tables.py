# -*- coding: utf-8 -*-

# Imports #####################################################################

import logging
import os
from collections import defaultdict
from typing import Dict, List, Tuple

import pandas as pd

from rta_ablation.harness import MODES, RunResult, aggregate_seeds
from rta_ablation.metrics import EPISODE_COLUMNS, pooled_summary
from rta_ablation.trainconfig import CONFIG_KINDS
from rta_ablation.utilities import list_result_files, read_json

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["Configuration", "RTA", "Return", "Length", "Interventions/Violations", "Correction", "Success"]
CURVE_METRICS = ("return", "success")
FLOAT_FORMAT = "%.6f"

# Functions ###################################################################


def load_results(output_dir: str) -> List[RunResult]:
    """Every run result file under <output_dir>/runs, in file-name order"""
    return [RunResult.from_dict(read_json(path)) for path in list_result_files(output_dir)]


def _group_key(result: RunResult) -> Tuple[str, str, str]:
    return result.spec["env"], result.spec["algorithm"], result.spec["filter"]


def group_results(results: List[RunResult]) -> Dict[tuple, Dict[str, List[RunResult]]]:
    """
    Group runs by (env, algorithm, filter) and then by configuration label

    The label is the training configuration unless two experiments in the
    same group share it, in which case the experiment names are used.
    """
    grouped = defaultdict(lambda: defaultdict(list))
    for result in results:
        grouped[_group_key(result)][(result.spec["config"], result.name)].append(result)

    labelled = {}
    for key in sorted(grouped):
        cells = grouped[key]
        configs = [config for config, _ in cells]
        unique = len(set(configs)) == len(configs)
        order = sorted(cells, key=lambda cell: (_config_rank(cell[0]), cell[1]))
        labelled[key] = {(config if unique else name): cells[(config, name)] for config, name in order}
    return labelled


def _config_rank(config: str) -> int:
    return CONFIG_KINDS.index(config) if config in CONFIG_KINDS else len(CONFIG_KINDS)


def format_stat(mean: float, std: float) -> str:
    """Two decimals, locale independent: 987.84 ± 10.86"""
    return f"{mean:.2f} ± {std:.2f}"


def summary_table(cells: Dict[str, List[RunResult]]) -> pd.DataFrame:
    """
    One row per configuration and RTA mode, episodes pooled across seeds

    Parameters
    ----------
    cells : dict
        Configuration label -> runs

    Returns
    -------
    table_df : pandas dataframe
        TABLE_COLUMNS
    """
    rows = []
    for label, runs in cells.items():
        for mode in MODES:
            frames = [
                pd.DataFrame([row for row in run.final_episodes if row["mode"] == mode], columns=["mode"] + EPISODE_COLUMNS)
                for run in runs
                if not run.failed
            ]
            summary = pooled_summary(frames)
            rows.append(
                {
                    "Configuration": label,
                    "RTA": mode,
                    "Return": format_stat(summary["return_mean"], summary["return_std"]),
                    "Length": format_stat(summary["length_mean"], summary["length_std"]),
                    "Interventions/Violations": format_stat(
                        summary["interventions_or_violations_mean"], summary["interventions_or_violations_std"]
                    ),
                    "Correction": format_stat(summary["correction_mean"], summary["correction_std"]),
                    "Success": f"{summary['success_mean']:.2f}",
                }
            )
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def _table_text(table_df: pd.DataFrame) -> str:
    if table_df.empty:
        return "  ".join(TABLE_COLUMNS)
    return table_df.to_string(index=False)


def render_tables(output_dir: str) -> str:
    """
    Text summary tables of a (possibly partial) study

    Parameters
    ----------
    output_dir : str
        Study output directory

    Returns
    -------
    text : str
        One titled table per (env, algorithm, filter); only the header when
        the study holds no results
    """
    grouped = group_results(load_results(output_dir))
    if not grouped:
        return _table_text(pd.DataFrame(columns=TABLE_COLUMNS)) + "\n"
    blocks = []
    for (env_kind, algorithm, filter_kind), cells in grouped.items():
        title = f"{algorithm.upper()} {env_kind} / {filter_kind}"
        blocks.append(f"{title}\n{_table_text(summary_table(cells))}")
    return "\n\n".join(blocks) + "\n"


def curve_tables(output_dir: str) -> Dict[str, pd.DataFrame]:
    """
    Plot-ready curve tables keyed by file stem

    Each table has an epoch column followed by <label>_mean and <label>_ci per
    configuration, one table per (env, algorithm, filter, metric, mode).
    """
    tables = {}
    for (env_kind, algorithm, filter_kind), cells in group_results(load_results(output_dir)).items():
        aggregated = {label: aggregate_seeds(runs, CURVE_METRICS) for label, runs in cells.items()}
        for metric in CURVE_METRICS:
            for mode in MODES:
                parts = {}
                for label, agg_df in aggregated.items():
                    part = agg_df[(agg_df["metric"] == metric) & (agg_df["mode"] == mode)]
                    parts[label] = part.set_index(part["epoch"].astype(int))
                epochs = sorted({int(epoch) for part in parts.values() for epoch in part.index})
                curve_df = pd.DataFrame({"epoch": epochs})
                for label, part in parts.items():
                    # configurations missing an epoch leave it blank
                    curve_df[f"{label}_mean"] = curve_df["epoch"].map(part["mean"])
                    curve_df[f"{label}_ci"] = curve_df["epoch"].map(part["ci"])
                tables[f"{env_kind}__{algorithm}__{filter_kind}__{metric}__{mode}"] = curve_df
    return tables


def export_curves(output_dir: str) -> List[str]:
    """
    Write the curve tables to <output_dir>/curves/*.csv

    Returns
    -------
    paths : list of str
        The written files
    """
    curves_dir = os.path.join(output_dir, "curves")
    os.makedirs(curves_dir, exist_ok=True)
    paths = []
    for stem, curve_df in curve_tables(output_dir).items():
        path = os.path.join(curves_dir, f"{stem}.csv")
        curve_df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        paths.append(path)
    logger.info("wrote %d curve files to %s", len(paths), curves_dir)
    return paths
