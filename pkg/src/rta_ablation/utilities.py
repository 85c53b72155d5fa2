# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Utility functions for study output directories and result files
"""
# Imports #####################################################################

import json
import os
import re
from typing import List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv

OUTPUT_ROOT_ENV = "RTA_ABLATION_OUTPUT_ROOT"
LOG_LEVEL_ENV = "RTA_ABLATION_LOG_LEVEL"
DEFAULT_OUTPUT_ROOT = "results"
INDEX_COLUMNS = ["name", "spec_hash", "seed", "status", "file"]

# Functions ###################################################################


def load_environment(env_file: str = ".env") -> None:
    """
    Load the .env file if there is one; variables already set win

    Parameters
    ----------
    env_file : str
        Path to the .env file
    """
    load_dotenv(env_file, override=False)


def resolve_output_dir(cli_out: Optional[str], config_out: Optional[str]) -> str:
    """
    Output directory: --out, then the config file, then RTA_ABLATION_OUTPUT_ROOT,
    then ./results
    """
    for candidate in (cli_out, config_out, os.getenv(OUTPUT_ROOT_ENV)):
        if candidate:
            return candidate
    return DEFAULT_OUTPUT_ROOT


def result_stem(name: str, spec_hash: str, seed: int) -> str:
    """File stem <name>__<hash12>__seed<seed> with a filesystem-safe name"""
    safe_name = re.sub(r"[^A-Za-z0-9_.-]+", "_", name)
    return f"{safe_name}__{spec_hash}__seed{int(seed)}"


def result_paths(output_dir: str, name: str, spec_hash: str, seed: int):
    """
    Returns
    -------
    json_path : str
        The run's result file
    h5_path : str
        The run's checkpoint file
    """
    stem = os.path.join(output_dir, "runs", result_stem(name, spec_hash, seed))
    return f"{stem}.json", f"{stem}.h5"


def _to_native(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def write_json_atomic(path: str, payload: dict) -> str:
    """Write sorted-key JSON through a temporary file and an atomic rename"""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=1, default=_to_native)
        f.write("\n")
    os.replace(tmp_path, path)
    return path


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def list_result_files(output_dir: str) -> List[str]:
    """Sorted result files under <output_dir>/runs"""
    runs_dir = os.path.join(output_dir, "runs")
    if not os.path.isdir(runs_dir):
        return []
    return sorted(
        os.path.join(runs_dir, filename) for filename in os.listdir(runs_dir) if filename.endswith(".json")
    )


def is_complete(json_path: str) -> bool:
    """A run counts as complete when its result file says so"""
    if not os.path.exists(json_path):
        return False
    try:
        return read_json(json_path).get("status") == "complete"
    except (OSError, ValueError):
        return False


def write_index(output_dir: str, rows: List[dict]) -> str:
    """
    Write the study index <output_dir>/index.csv

    Parameters
    ----------
    output_dir : str
        Study output directory
    rows : list of dict
        One row per run with INDEX_COLUMNS

    Returns
    -------
    path : str
        The index file
    """
    index_df = pd.DataFrame(rows, columns=INDEX_COLUMNS).sort_values(["name", "seed"], kind="mergesort")
    path = os.path.join(output_dir, "index.csv")
    os.makedirs(output_dir, exist_ok=True)
    index_df.to_csv(path, index=False)
    return path
