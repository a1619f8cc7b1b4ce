"""Experiment configuration templates and loading."""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, List

from pydantic import ValidationError

from ..errors import ConfigError
from ..models.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


def _zone(zone_id: str, region: str, rate: float, mean_capacity: int,
          cloud: str = "aws", spot_unit_cost: float = 1.0) -> Dict[str, Any]:
    return {
        "id": zone_id,
        "region": region,
        "cloud": cloud,
        "spot_unit_cost": spot_unit_cost,
        "lambda": rate,
        "mean_capacity": mean_capacity,
    }


class ConfigGenerator:
    """Builds ExperimentConfig objects from named templates plus overrides."""

    def __init__(self):
        self.templates: Dict[str, Dict[str, Any]] = {
            "baseline": {
                "name": "baseline",
                "seed": 0,
                "trace": {"generator": {
                    "name": "baseline",
                    "horizon": 2000,
                    "zones": [
                        _zone("aws:us-east-1a", "us-east-1", 0.01, 3),
                        _zone("aws:us-east-1b", "us-east-1", 0.01, 3, spot_unit_cost=1.1),
                        _zone("aws:us-west-2a", "us-west-2", 0.005, 3, spot_unit_cost=0.9),
                    ],
                }},
                "workload": {"kind": "poisson", "rate": 0.15},
                "policy": {"name": "spothedge", "n_extra": 1, "q_tar": 0.05},
            },
            "availability_study": {
                "name": "availability_study",
                "seed": 0,
                "trace": {"generator": {
                    "name": "availability_study",
                    "horizon": 3000,
                    "zones": [
                        _zone("aws:us-east-1a", "us-east-1", 0.05, 1),
                        _zone("aws:us-east-1b", "us-east-1", 0.05, 1),
                        _zone("aws:us-west-2a", "us-west-2", 0.001, 2),
                        _zone("aws:us-west-2b", "us-west-2", 0.001, 2),
                        _zone("gcp:europe-west4-a", "europe-west4", 0.001, 2, cloud="gcp"),
                        _zone("gcp:europe-west4-b", "europe-west4", 0.001, 2, cloud="gcp"),
                    ],
                    "region_episodes": {"us-east-1": [[500, 900], [1800, 2300]]},
                }},
                "policy": {"name": "spothedge", "n_extra": 1, "n_tar_override": 4},
                "metrics": {"simulate_requests": False},
            },
            "always_available": {
                "name": "always_available",
                "seed": 0,
                "trace": {"generator": {
                    "name": "always_available",
                    "horizon": 1000,
                    "zones": [
                        _zone("aws:us-east-1a", "us-east-1", 0.0, 8),
                        _zone("aws:us-east-1b", "us-east-1", 0.0, 8),
                        _zone("aws:us-west-2a", "us-west-2", 0.0, 8),
                    ],
                }},
                "workload": {"kind": "poisson", "rate": 0.15},
                "policy": {"name": "spothedge", "n_extra": 1, "n_tar_override": 2},
            },
            "on_demand_only": {
                "name": "on_demand_only",
                "seed": 0,
                "trace": {"generator": {
                    "name": "on_demand_only",
                    "horizon": 1000,
                    "zones": [
                        _zone("aws:us-east-1a", "us-east-1", 0.01, 3),
                        _zone("aws:us-west-2a", "us-west-2", 0.01, 3),
                    ],
                }},
                "policy": {"name": "od_only", "n_tar_override": 2},
            },
            "sensitivity": {
                "name": "sensitivity",
                "seed": 0,
                "trace": {"generator": {
                    "name": "sensitivity",
                    "horizon": 600,
                    "zones": [
                        _zone("aws:us-east-1a", "us-east-1", 0.01, 3),
                        _zone("aws:us-east-1b", "us-east-1", 0.01, 3),
                        _zone("aws:us-west-2a", "us-west-2", 0.005, 3),
                        _zone("aws:us-west-2b", "us-west-2", 0.005, 3),
                    ],
                    "region_episodes": {"us-east-1": [[200, 260]]},
                }},
                "workload": {
                    "kind": "poisson",
                    "rate": 0.2,
                    "service": {"distribution": "deterministic", "value_s": 10.0},
                },
                "policy": {"name": "spothedge", "n_extra": 1, "n_tar_override": 2},
                "cluster": {"max_concurrency": 1},
                "output": {"charts": False, "event_log": False},
            },
        }

    def generate_custom_config(self, template_name: str = "baseline",
                               customizations: Dict[str, Any] = None) -> ExperimentConfig:
        """Template merged with `customizations`; nested sections merge key by key."""
        if template_name not in self.templates:
            raise ConfigError(f"Template '{template_name}' not found")

        data = copy.deepcopy(self.templates[template_name])
        _merge(data, customizations or {})
        return parse_config(data, source=f"template '{template_name}'")

    def save_config(self, config: ExperimentConfig, output_path: Path):
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w") as f:
            f.write(dump_config(config))
        logger.info("Config saved to %s", output_path)

    def create_config_template(self, template_name: str, output_dir: Path) -> Path:
        """Write the resolved template to <output_dir>/<template_name>.json."""
        config = self.generate_custom_config(template_name)
        output_path = output_dir / f"{template_name}.json"
        self.save_config(config, output_path)
        return output_path

    def list_templates(self) -> List[str]:
        return list(self.templates.keys())

    def add_template(self, name: str, template_data: Dict[str, Any]):
        self.templates[name] = template_data


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]):
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value


def describe_validation_error(error: ValidationError) -> str:
    """One line per failure: dotted key path and pydantic's message."""
    lines = []
    for item in error.errors():
        where = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{where}: {item['msg']}")
    return "; ".join(lines)


def parse_config(data: Dict[str, Any], source: str = "config") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{source}: {describe_validation_error(e)}") from e


def load_config(path: Path) -> ExperimentConfig:
    """Parse an experiment JSON file; relative trace/workload paths resolve against its directory."""
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"{path}: no such config file") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from e

    config = parse_config(data, source=str(path))
    base = path.parent
    if config.trace.path is not None and not config.trace.path.is_absolute():
        config.trace.path = (base / config.trace.path).resolve()
    if config.workload.trace_path is not None and not config.workload.trace_path.is_absolute():
        config.workload.trace_path = (base / config.workload.trace_path).resolve()
    return config


def dump_config(config: ExperimentConfig) -> str:
    """Fully resolved config as JSON; parse_config(json.loads(...)) gives it back."""
    return json.dumps(config.model_dump(mode="json", by_alias=True), indent=2) + "\n"
