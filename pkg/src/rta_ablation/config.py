# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Study configuration files (YAML, ``format_version: 1``).

A study lists explicit ``experiments`` and/or ``grid`` blocks whose list-valued
axes (env, algorithm, filter, config) expand to their cartesian product.
Every omitted hyperparameter is filled from the reference settings of its
(algorithm, env) pair. The full schema is documented in README.md.
"""

# Imports #####################################################################

import dataclasses
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import yaml

from rta_ablation.agents import ALGORITHMS, PpoHyperparams, SacHyperparams, hyperparams_for
from rta_ablation.envs import DockingParams, PendulumParams
from rta_ablation.exceptions import ConfigParseError, ConfigurationError
from rta_ablation.harness import DEFAULT_SEEDS, ExperimentSpec
from rta_ablation.metrics import DependenceThresholds
from rta_ablation.rta import FilterParams

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
TOP_LEVEL_KEYS = ("format_version", "output_dir", "parallel", "seeds", "defaults", "experiments", "grid")
SHARED_KEYS = (
    "hyperparameters",
    "filter_params",
    "env_params",
    "seeds",
    "eval_episodes_interim",
    "eval_episodes_final",
    "eval_every",
    "dependence_thresholds",
)
EXPERIMENT_KEYS = ("name", "env", "algorithm", "filter", "config") + SHARED_KEYS
GRID_AXES = ("env", "algorithm", "filter", "config")

# Classes #####################################################################


@dataclass(frozen=True)
class StudyConfig:
    """
    Attributes
    ----------
    experiments : list of ExperimentSpec
        Grid blocks already expanded
    output_dir : str, optional
        Output root named by the file
    parallel : int
        Maximum number of concurrent runs
    seeds : tuple of int
        Study-level seed list
    format_version : int
        Schema version of the file
    source : str
        Path the config was read from
    """

    experiments: List[ExperimentSpec]
    output_dir: Optional[str] = None
    parallel: int = 1
    seeds: tuple = DEFAULT_SEEDS
    format_version: int = FORMAT_VERSION
    source: str = field(default="<config>", compare=False)

    @property
    def run_count(self) -> int:
        return sum(len(spec.seeds) for spec in self.experiments)

    def with_seeds(self, seeds) -> "StudyConfig":
        """Replace the seed list of the study and of every experiment"""
        seeds = tuple(int(seed) for seed in seeds)
        experiments = [dataclasses.replace(spec, seeds=seeds) for spec in self.experiments]
        return dataclasses.replace(self, experiments=experiments, seeds=seeds)


class _Locator:
    """Maps key paths of a YAML document to 1-based line numbers"""

    def __init__(self, node, path: str):
        self.path = path
        self.lines = {}
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, key_path):
        self.lines.setdefault(key_path, node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                child = key_path + (key_node.value,)
                self.lines[child] = key_node.start_mark.line + 1
                self._walk(value_node, child)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                self._walk(item, key_path + (index,))

    def line(self, key_path) -> Optional[int]:
        key_path = tuple(key_path)
        while key_path and key_path not in self.lines:
            key_path = key_path[:-1]
        return self.lines.get(key_path)

    def error(self, message: str, key_path=()) -> ConfigParseError:
        return ConfigParseError(message, self.path, self.line(key_path))


# Functions ###################################################################


def _check_keys(values, allowed, locator: _Locator, key_path, what: str) -> None:
    if not isinstance(values, dict):
        raise locator.error(f"{what} must be a mapping", key_path)
    for key in values:
        if key not in allowed:
            raise locator.error(f"unknown key {key!r} in {what}", tuple(key_path) + (key,))


def _build_dataclass(cls, values: dict, locator: _Locator, key_path, base: Optional[dict] = None):
    """Instantiate a frozen dataclass from YAML values with type coercion"""
    values = values or {}
    fields = {item.name: item for item in dataclasses.fields(cls)}
    _check_keys(values, fields, locator, key_path, key_path[-1] if key_path else cls.__name__)
    merged = dict(base or {})
    for key, value in values.items():
        numeric = isinstance(fields[key].default, float) or "float" in str(fields[key].type)
        # PyYAML reads 1e-3 as a string
        if numeric and isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                raise locator.error(f"{key} must be a number, got {value!r}", tuple(key_path) + (key,)) from None
        merged[key] = value
    try:
        return cls(**merged)
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise locator.error(str(exc), key_path) from None


def _hyperparams(algorithm: str, env_kind: str, values: dict, locator: _Locator, key_path):
    cls = {"ppo": PpoHyperparams, "sac": SacHyperparams}[algorithm]
    base = dataclasses.asdict(hyperparams_for(algorithm, env_kind))
    return _build_dataclass(cls, values, locator, key_path, base=base)


def _env_params(env_kind: str, values: dict, locator: _Locator, key_path):
    cls = PendulumParams if env_kind == "pendulum" else DockingParams
    return _build_dataclass(cls, values, locator, key_path)


def _merge_shared(defaults: dict, entry: dict) -> dict:
    """Entry values win; nested mappings are merged one level deep"""
    merged = dict(defaults)
    for key, value in entry.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def _build_spec(entry: dict, defaults: dict, study_seeds, locator: _Locator, key_path) -> ExperimentSpec:
    values = _merge_shared(defaults, entry)
    for required in ("name", "env", "algorithm", "filter", "config"):
        if required not in values:
            raise locator.error(f"missing required field {required!r}", key_path)
    algorithm = values["algorithm"]
    if algorithm not in ALGORITHMS:
        raise locator.error(f"unknown algorithm {algorithm!r}", tuple(key_path) + ("algorithm",))
    env_kind = values["env"]
    if env_kind not in ("pendulum", "docking2d", "docking3d"):
        raise locator.error(f"unknown env {env_kind!r}", tuple(key_path) + ("env",))
    try:
        return ExperimentSpec(
            name=str(values["name"]),
            env_kind=env_kind,
            algorithm=algorithm,
            filter_kind=values["filter"],
            config=values["config"],
            hyperparams=_hyperparams(
                algorithm, env_kind, values.get("hyperparameters"), locator, tuple(key_path) + ("hyperparameters",)
            ),
            filter_params=_build_dataclass(
                FilterParams, values.get("filter_params"), locator, tuple(key_path) + ("filter_params",)
            ),
            env_params=_env_params(env_kind, values.get("env_params"), locator, tuple(key_path) + ("env_params",)),
            seeds=tuple(values.get("seeds", study_seeds)),
            eval_episodes_interim=int(values.get("eval_episodes_interim", 10)),
            eval_episodes_final=int(values.get("eval_episodes_final", 100)),
            eval_every=int(values.get("eval_every", 1)),
            thresholds=_build_dataclass(
                DependenceThresholds,
                values.get("dependence_thresholds"),
                locator,
                tuple(key_path) + ("dependence_thresholds",),
            ),
        )
    except ConfigParseError:
        raise
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise locator.error(str(exc), key_path) from None


def expand_grid(grid: dict, locator: _Locator, key_path) -> List[dict]:
    """
    Cartesian expansion of a grid block into experiment entries

    Scalar axes count as single-valued; the generated names are
    "<name>-<env>-<algorithm>-<filter>-<config>".
    """
    _check_keys(grid, ("name",) + GRID_AXES + SHARED_KEYS, locator, key_path, "grid")
    axes = []
    for axis in GRID_AXES:
        if axis not in grid:
            raise locator.error(f"grid is missing axis {axis!r}", key_path)
        values = grid[axis] if isinstance(grid[axis], list) else [grid[axis]]
        if not values:
            raise locator.error(f"grid axis {axis!r} is empty", tuple(key_path) + (axis,))
        axes.append(values)
    shared = {key: grid[key] for key in SHARED_KEYS if key in grid}
    prefix = grid.get("name", "grid")
    entries = []
    for env_kind, algorithm, filter_kind, config in itertools.product(*axes):
        entry = dict(shared, env=env_kind, algorithm=algorithm, filter=filter_kind, config=config)
        entry["name"] = f"{prefix}-{env_kind}-{algorithm}-{filter_kind}-{config}"
        entries.append(entry)
    return entries


def parse_config_text(text: str, path: str = "<config>") -> StudyConfig:
    """
    Parse and validate a study config document

    Parameters
    ----------
    text : str
        YAML source
    path : str
        Name used in error messages

    Returns
    -------
    StudyConfig

    Raises
    ------
    ConfigParseError
        Unknown key, invalid pairing or missing field, with its line number
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigParseError(f"invalid YAML: {exc}", path, mark.line + 1 if mark else None) from None
    locator = _Locator(node, path)
    if document is None:
        raise locator.error("empty config")
    _check_keys(document, TOP_LEVEL_KEYS, locator, (), "config")

    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise locator.error(f"format_version must be {FORMAT_VERSION}, got {version!r}", ("format_version",))
    study_seeds = tuple(int(seed) for seed in document.get("seeds", DEFAULT_SEEDS))
    defaults = document.get("defaults") or {}
    _check_keys(defaults, SHARED_KEYS, locator, ("defaults",), "defaults")

    entries = []
    for index, entry in enumerate(document.get("experiments") or []):
        _check_keys(entry, EXPERIMENT_KEYS, locator, ("experiments", index), "experiment")
        entries.append((entry, ("experiments", index)))
    grids = document.get("grid") or []
    if isinstance(grids, dict):
        grids = [grids]
        grid_paths = [("grid",)]
    else:
        grid_paths = [("grid", index) for index in range(len(grids))]
    for grid, grid_path in zip(grids, grid_paths):
        entries.extend((entry, grid_path) for entry in expand_grid(grid, locator, grid_path))
    if not entries:
        raise locator.error("config defines no experiments")

    experiments, names = [], set()
    for entry, key_path in entries:
        spec = _build_spec(entry, defaults, study_seeds, locator, key_path)
        if spec.name in names:
            raise locator.error(f"duplicate experiment name {spec.name!r}", key_path)
        names.add(spec.name)
        experiments.append(spec)

    parallel = document.get("parallel", 1)
    if not isinstance(parallel, int) or parallel < 1:
        raise locator.error(f"parallel must be a positive integer, got {parallel!r}", ("parallel",))
    logger.debug("parsed %d experiments from %s", len(experiments), path)
    return StudyConfig(
        experiments=experiments,
        output_dir=document.get("output_dir"),
        parallel=parallel,
        seeds=study_seeds,
        format_version=version,
        source=path,
    )


def parse_config(path: str) -> StudyConfig:
    """Read and validate a study config file"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_config_text(text, path)


def spec_to_entry(spec: ExperimentSpec) -> dict:
    """Fully explicit experiment entry for a spec"""
    return {
        "name": spec.name,
        "env": spec.env_kind,
        "algorithm": spec.algorithm,
        "filter": spec.filter_kind,
        "config": spec.config,
        "hyperparameters": spec.hyperparams.to_dict(),
        "filter_params": spec.filter_params.to_dict(),
        "env_params": dict(spec.env_params.__dict__),
        "seeds": list(spec.seeds),
        "eval_episodes_interim": spec.eval_episodes_interim,
        "eval_episodes_final": spec.eval_episodes_final,
        "eval_every": spec.eval_every,
        "dependence_thresholds": dict(spec.thresholds.__dict__),
    }


def config_to_text(config: StudyConfig) -> str:
    document = {"format_version": config.format_version}
    if config.output_dir is not None:
        document["output_dir"] = config.output_dir
    document["parallel"] = config.parallel
    document["seeds"] = list(config.seeds)
    document["experiments"] = [spec_to_entry(spec) for spec in config.experiments]
    return yaml.safe_dump(document, sort_keys=False)


def write_config(config: StudyConfig, path: str) -> str:
    """Write a config that parses back to an equal StudyConfig"""
    with open(path, "w", encoding="utf-8") as f:
        f.write(config_to_text(config))
    return path
