"""
Configuration management for tom-sim.

Named task, planner and run profiles live in YAML files under a config
directory (``tasks/``, ``planners/``, ``runs/``). A run profile refers to a
task profile and a planner profile by name; loading it yields a validated
RunConfig.
"""

from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml

from ..core.simulator import RunConfig
from ..environment.grid_world import TaskConfig
from ..planning.config import ToMPlannerConfig
from ..utils.errors import ConfigError
from ..utils.logger import TomSimLogger

DEFAULT_TASKS: Dict[str, Dict[str, Any]] = {
    "collision": {
        "description": "Swap opposite corners of a 3x3 grid without colliding",
        **asdict(TaskConfig.collision()),
    },
    "foraging": {
        "description": "Share an orchard with one known apple at cell 9",
        **asdict(TaskConfig.foraging()),
    },
    "foraging_calibration": {
        "description": "The foraging start cut off after three steps",
        **asdict(TaskConfig.foraging()),
        "step_cap": 3,
    },
}

DEFAULT_PLANNERS: Dict[str, Dict[str, Any]] = {
    "collision": {
        "description": "Three-step search with default pruning",
        **asdict(ToMPlannerConfig(horizon=3)),
    },
    "foraging": {
        "description": "Three-step search with default pruning",
        **asdict(ToMPlannerConfig(horizon=3)),
    },
    "unpruned": {
        "description": "Exhaustive search to the model horizon",
        **asdict(ToMPlannerConfig.unpruned()),
    },
    "foraging_calibration": {
        "description": "Two-step search used to calibrate the exploratory first move",
        **asdict(ToMPlannerConfig(horizon=2)),
    },
}

DEFAULT_RUNS: Dict[str, Dict[str, Any]] = {
    "collision_si": {
        "description": "Both agents plan without theory of mind",
        "task": "collision", "planner": "collision", "red": "si", "purple": "si",
        "seeds": "0", "selection": "argmax", "export_trees": False, "workers": 1,
    },
    "collision_tom": {
        "description": "Red plans with theory of mind",
        "task": "collision", "planner": "collision", "red": "tom", "purple": "si",
        "seeds": "0", "selection": "argmax", "export_trees": False, "workers": 1,
    },
    "foraging_si": {
        "description": "Both agents race for the known apple",
        "task": "foraging", "planner": "foraging", "red": "si", "purple": "si",
        "seeds": "0-99", "selection": "argmax", "export_trees": False, "workers": 1,
    },
    "foraging_tom": {
        "description": "Red plans with theory of mind",
        "task": "foraging", "planner": "foraging", "red": "tom", "purple": "si",
        "seeds": "0-99", "selection": "argmax", "export_trees": False, "workers": 1,
    },
    "foraging_calibration": {
        "description": "Red's first move under the two-step calibration profile",
        "task": "foraging_calibration", "planner": "foraging_calibration", "red": "tom",
        "purple": "si", "seeds": "0", "selection": "argmax", "export_trees": True,
        "workers": 1,
    },
}

SECTIONS = ("tasks", "planners", "runs")


def parse_seeds(spec: Union[str, int, Sequence[int]]) -> List[int]:
    """Seeds from ``7``, ``"0-99"``, ``"1,4,9"`` or a list."""
    if isinstance(spec, bool):
        raise ValueError(f"invalid seed specification {spec!r}")
    if isinstance(spec, int):
        return [spec]
    if not isinstance(spec, str):
        return [int(s) for s in spec]
    seeds: List[int] = []
    for part in spec.split(','):
        part = part.strip()
        if not part:
            continue
        if '-' in part:
            lo, hi = (int(x) for x in part.split('-', 1))
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return seeds


def _known_fields(cls: type, data: Dict[str, Any]) -> Dict[str, Any]:
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names - {"description"})
    if unknown:
        raise ConfigError(cls.__name__, [f"unknown field '{k}'" for k in unknown])
    return {k: v for k, v in data.items() if k in names}


class ConfigManager:
    """
    Configuration manager for tom-sim.

    Handles loading, saving, listing and validation of task, planner and
    run profiles.
    """

    def __init__(self, config_dir: Optional[Union[str, Path]] = None):
        self.logger = TomSimLogger('tom_sim.ConfigManager')
        self.config_dir = Path(config_dir) if config_dir is not None else Path.cwd() / "configs"
        self._create_default_configs()
        self.logger.debug(f"ConfigManager using {self.config_dir}")

    def _create_default_configs(self) -> None:
        """Create default configuration files if they don't exist."""
        self._save_config_file("tasks/defaults.yaml", DEFAULT_TASKS)
        self._save_config_file("planners/defaults.yaml", DEFAULT_PLANNERS)
        self._save_config_file("runs/defaults.yaml", DEFAULT_RUNS)

    def _save_config_file(self, relative_path: str, data: Dict[str, Any],
                          overwrite: bool = False) -> Path:
        file_path = self.config_dir / relative_path
        file_path.parent.mkdir(parents=True, exist_ok=True)
        if overwrite or not file_path.exists():
            with open(file_path, 'w') as f:
                yaml.dump(data, f, default_flow_style=False, sort_keys=False)
        return file_path

    def _section(self, section: str) -> Dict[str, Any]:
        """Every profile of a section; files other than defaults.yaml override it."""
        directory = self.config_dir / section
        profiles: Dict[str, Any] = {}
        paths = sorted(directory.glob("*.yaml"), key=lambda p: p.name != "defaults.yaml")
        for path in paths:
            try:
                with open(path, 'r') as f:
                    data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(section, [f"unreadable YAML: {e}"], str(path)) from e
            if not isinstance(data, dict):
                raise ConfigError(section, ["top level must be a mapping"], str(path))
            profiles.update(data)
        return profiles

    def _profile(self, section: str, name: str) -> Dict[str, Any]:
        profiles = self._section(section)
        if name not in profiles:
            raise ConfigError(section, [f"profile '{name}' not found"],
                              str(self.config_dir / section))
        return dict(profiles[name])

    def load_task_config(self, name: str) -> TaskConfig:
        data = self._profile("tasks", name)
        return TaskConfig(**_known_fields(TaskConfig, data)).validate()

    def load_planner_config(self, name: str) -> ToMPlannerConfig:
        data = self._profile("planners", name)
        return ToMPlannerConfig(**_known_fields(ToMPlannerConfig, data)).validate()

    def load_run_config(self, name: str) -> RunConfig:
        data = self._profile("runs", name)
        try:
            seeds = parse_seeds(data.get("seeds", 0))
        except (TypeError, ValueError) as e:
            raise ConfigError("runs", [f"seeds: {e}"]) from e
        run = RunConfig(
            name=name,
            description=data.get("description", ""),
            task=self.load_task_config(data.get("task", "collision")),
            red=data.get("red", "si"),
            purple=data.get("purple", "si"),
            planner=self.load_planner_config(data.get("planner", "collision")),
            seeds=seeds,
            selection=data.get("selection", "argmax"),
            step_cap=data.get("step_cap"),
            workers=int(data.get("workers", 1)),
            export_trees=bool(data.get("export_trees", False)),
        )
        return run.validate()

    def save_task_config(self, name: str, config: TaskConfig) -> Path:
        return self._save_config_file(f"tasks/{name}.yaml", {name: asdict(config)},
                                      overwrite=True)

    def save_planner_config(self, name: str, config: ToMPlannerConfig) -> Path:
        return self._save_config_file(f"planners/{name}.yaml", {name: asdict(config)},
                                      overwrite=True)

    def save_run_config(self, run: RunConfig, task_profile: str,
                        planner_profile: str) -> Path:
        data = {
            "description": run.description,
            "task": task_profile,
            "planner": planner_profile,
            "red": run.red,
            "purple": run.purple,
            "seeds": ",".join(str(s) for s in run.seeds),
            "selection": run.selection,
            "step_cap": run.step_cap,
            "export_trees": run.export_trees,
            "workers": run.workers,
        }
        return self._save_config_file(f"runs/{run.name}.yaml", {run.name: data},
                                      overwrite=True)

    def list_available_configs(self) -> Dict[str, List[str]]:
        return {section: list(self._section(section)) for section in SECTIONS}
