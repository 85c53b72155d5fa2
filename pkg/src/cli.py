# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Command-line front end for RTA ablation studies.

    python src/cli.py run --config study.yaml --out results --parallel 4
    python src/cli.py tables --out results
    python src/cli.py curves --out results
    python src/cli.py validate --config study.yaml
    python src/cli.py filters-audit --episodes 100 --max-steps 200
"""

# Imports #####################################################################

import argparse
import logging
import os
import sys
from typing import List, Optional

from rta_ablation.audit import filters_audit
from rta_ablation.config import parse_config
from rta_ablation.exceptions import ConfigurationError
from rta_ablation.study import main_run_study
from rta_ablation.tables import export_curves, render_tables
from rta_ablation.utilities import LOG_LEVEL_ENV, load_environment, resolve_output_dir

logger = logging.getLogger("rta_ablation")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

# Functions ###################################################################


def configure_logging(level: Optional[str] = None) -> None:
    """
    One stream handler on stderr; the level comes from the flag, then
    RTA_ABLATION_LOG_LEVEL, then INFO
    """
    level = (level or os.getenv(LOG_LEVEL_ENV) or "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def parse_seeds(text: str) -> List[int]:
    """Comma-separated seed list, e.g. 1630,2241"""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rta-ablation", description="Run and summarise RTA ablation studies.")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", help="Execute every (experiment, seed) run of a study")
    run.add_argument("--config", required=True, help="Study YAML file")
    run.add_argument("--out", default=None, help="Output directory")
    run.add_argument("--parallel", type=int, default=None, help="Maximum concurrent runs")
    run.add_argument("--seeds", type=parse_seeds, default=None, help="Override the seed list, e.g. 1630,2241")
    run.add_argument("--resume", action="store_true", help="Skip runs whose result file is complete")

    for name, text in (("tables", "Render the summary tables"), ("curves", "Export the curve CSV files")):
        verb = verbs.add_parser(name, help=text)
        verb.add_argument("--out", default=None, help="Study output directory")
        verb.add_argument("--config", default=None, help="Study YAML file naming the output directory")

    validate = verbs.add_parser("validate", help="Parse a study file without running it")
    validate.add_argument("--config", required=True, help="Study YAML file")

    audit = verbs.add_parser("filters-audit", help="Run the RTA filter property checks")
    audit.add_argument("--episodes", type=int, default=1000, help="Random-policy episodes per pairing")
    audit.add_argument("--max-steps", type=int, default=None, help="Per-episode step cap")
    audit.add_argument("--samples", type=int, default=100, help="Boundary states per docking variant")
    audit.add_argument("--seed", type=int, default=0, help="Root seed")
    audit.add_argument("--out", default=None, help="Write the audit table to <out>/filters_audit.csv")
    return parser


def _study_dir(args) -> str:
    config_out = parse_config(args.config).output_dir if args.config else None
    return resolve_output_dir(args.out, config_out)


def cmd_run(args) -> int:
    config = parse_config(args.config)
    if args.seeds:
        config = config.with_seeds(args.seeds)
    output_dir = resolve_output_dir(args.out, config.output_dir)
    logger.info("study %s: %d runs into %s", config.source, config.run_count, output_dir)
    return main_run_study(config, output_dir, resume=args.resume, parallel=args.parallel)


def cmd_tables(args) -> int:
    output_dir = _study_dir(args)
    text = render_tables(output_dir)
    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "tables.txt"), "w", encoding="utf-8") as f:
        f.write(text)
    print(text, end="")
    return EXIT_OK


def cmd_curves(args) -> int:
    for path in export_curves(_study_dir(args)):
        print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    config = parse_config(args.config)
    print(f"{config.source}: {len(config.experiments)} experiments, {config.run_count} runs")
    for spec in config.experiments:
        print(f"  {spec.name} [{spec.config_hash()}]")
    return EXIT_OK


def cmd_filters_audit(args) -> int:
    audit_df = filters_audit(episodes=args.episodes, max_steps=args.max_steps, samples=args.samples, seed=args.seed)
    summary_df = audit_df.groupby(["check", "env", "filter"], sort=False)["passed"].agg(["count", "sum"]).reset_index()
    print(summary_df.rename(columns={"sum": "passed"}).to_string(index=False))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        audit_df.to_csv(os.path.join(args.out, "filters_audit.csv"), index=False, float_format="%.6f")
    return EXIT_OK if bool(audit_df["passed"].all()) else EXIT_FAILED


COMMANDS = {
    "run": cmd_run,
    "tables": cmd_tables,
    "curves": cmd_curves,
    "validate": cmd_validate,
    "filters-audit": cmd_filters_audit,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse the arguments and dispatch to a verb

    Returns
    -------
    status : int
        0 on success, 1 when a run or audit failed, 2 on a bad study file
    """
    load_environment()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.verb](args)
    except ConfigurationError as exc:
        # ConfigParseError carries the file and line
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
