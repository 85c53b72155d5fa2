# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Study orchestration: every (experiment, seed) run of a StudyConfig executed
through a process pool, with result files, resume and the study index.
"""

# Imports #####################################################################

import asyncio
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import nest_asyncio

from rta_ablation.config import StudyConfig
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.harness import ExperimentSpec, RunResult, train
from rta_ablation.utilities import (
    is_complete,
    list_result_files,
    read_json,
    result_paths,
    write_index,
    write_json_atomic,
)

logger = logging.getLogger(__name__)

# Functions ###################################################################


def execute_run(spec: ExperimentSpec, seed: int, json_path: str, h5_path: str) -> dict:
    """
    Train one run and write its result file

    Any exception is recorded as a failed run so the study can continue.

    Returns
    -------
    row : dict
        The run's study index row
    """
    try:
        result = train(spec, seed, checkpoint_path=h5_path)
    except Exception as exc:
        logger.exception("%s seed %s failed", spec.name, seed)
        result = RunResult(
            name=spec.name,
            spec=spec.to_dict(),
            spec_hash=spec.config_hash(),
            seed=int(seed),
            status="failed",
            error=f"{type(exc).__name__}: {exc}",
        )
    write_json_atomic(json_path, result.to_dict())
    return {
        "name": spec.name,
        "spec_hash": result.spec_hash,
        "seed": int(seed),
        "status": result.status,
        "file": os.path.basename(json_path),
    }


async def run_study(config: StudyConfig, output_dir: str, resume: bool = False, parallel: Optional[int] = None) -> int:
    """
    Execute every run of a study

    Parameters
    ----------
    config : StudyConfig
        The parsed study
    output_dir : str
        Output root; results go to <output_dir>/runs
    resume : bool
        Skip runs whose result file is complete; without it the study refuses
        to start on a directory that already holds results
    parallel : int, optional
        Maximum concurrent runs; defaults to config.parallel

    Returns
    -------
    status : int
        0 when every run completed, 1 otherwise
    """
    if list_result_files(output_dir) and not resume:
        raise ConfigurationError(f"{output_dir} already holds results; pass --resume to continue the study")
    parallel = parallel or config.parallel
    runs = [(spec, seed) for spec in config.experiments for seed in spec.seeds]
    total = len(runs)
    os.makedirs(os.path.join(output_dir, "runs"), exist_ok=True)

    loop = asyncio.get_running_loop()
    semaphore = asyncio.Semaphore(parallel)
    pool = ProcessPoolExecutor(max_workers=parallel) if parallel > 1 else None

    async def run_one(number: int, spec: ExperimentSpec, seed: int) -> dict:
        json_path, h5_path = result_paths(output_dir, spec.name, spec.config_hash(), seed)
        if is_complete(json_path):
            logger.info("Run %d / %d: %s seed %s already complete", number, total, spec.name, seed)
            stored = read_json(json_path)
            return {
                "name": spec.name,
                "spec_hash": stored["spec_hash"],
                "seed": int(seed),
                "status": stored["status"],
                "file": os.path.basename(json_path),
            }
        async with semaphore:
            logger.info("Run %d / %d: %s seed %s", number, total, spec.name, seed)
            if pool is None:
                return execute_run(spec, seed, json_path, h5_path)
            try:
                return await loop.run_in_executor(pool, execute_run, spec, seed, json_path, h5_path)
            except Exception as exc:
                # a worker that died never wrote its file
                logger.error("Run %d / %d: %s seed %s crashed: %s", number, total, spec.name, seed, exc)
                return {
                    "name": spec.name,
                    "spec_hash": spec.config_hash(),
                    "seed": int(seed),
                    "status": "failed",
                    "file": os.path.basename(json_path),
                }

    try:
        rows = await asyncio.gather(*(run_one(i, spec, seed) for i, (spec, seed) in enumerate(runs, start=1)))
    finally:
        if pool is not None:
            pool.shutdown()

    write_index(output_dir, list(rows))
    failed = [row for row in rows if row["status"] != "complete"]
    if failed:
        logger.error("%d of %d runs failed", len(failed), total)
        return 1
    logger.info("all %d runs complete", total)
    return 0


def main_run_study(config: StudyConfig, output_dir: str, resume: bool = False, parallel: Optional[int] = None) -> int:
    """
    Blocking entry point for run_study

    The nest_asyncio patch lets this run inside an already running event loop
    such as a notebook kernel.
    """
    nest_asyncio.apply()
    return asyncio.run(run_study(config, output_dir, resume=resume, parallel=parallel))
