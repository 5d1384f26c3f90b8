# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Helpers for resolving kfree-points configuration.

The option table shipped as `config.yaml` lists every tunable together with its description,
type and default. The command line reads its defaults from it, merges overrides from an optional
YAML file and records the resolved invocation as a `RunConfig`, whose YAML rendering is written
next to the artifacts of a run:

```python
from kfree_points.config import RunConfig, option_defaults

defaults = option_defaults()
run = RunConfig(command="density", lattice="Z2", n=2, k=1, parameters={"radius": 500.0})
print(str(run))
```
"""

import functools
import logging
import os
from pathlib import Path
from typing import Any

import jsonschema
import yaml
from pydantic import BaseModel, ConfigDict, model_validator

from kfree_points.errors import ParameterError

logger = logging.getLogger(__name__)

DEFAULT_OPTIONS_PATH = Path(__file__).with_name("config.yaml")
OUTPUT_DIR_ENV = "KFREE_POINTS_OUTPUT_DIR"

_TYPES = {"string": str, "int": int, "float": float, "boolean": bool}

OPTIONS_SCHEMA = {
    "type": "object",
    "properties": {
        "options": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "description": {"type": "string"},
                    "type": {"enum": list(_TYPES)},
                    "default": {},
                },
                "required": ["description", "type", "default"],
            },
        }
    },
    "required": ["options"],
}


@functools.lru_cache(maxsize=4)
def load_options(path: Path = DEFAULT_OPTIONS_PATH) -> dict[str, dict]:
    """Read and validate an option table."""
    raw = yaml.safe_load(Path(path).read_text())
    jsonschema.validate(raw, OPTIONS_SCHEMA)
    return raw["options"]


def option_defaults(path: Path = DEFAULT_OPTIONS_PATH) -> dict[str, Any]:
    """Return `{option: default}` with values coerced to their declared types."""
    return {
        name: _TYPES[spec["type"]](spec["default"]) for name, spec in load_options(path).items()
    }


def option_help(name: str, path: Path = DEFAULT_OPTIONS_PATH) -> str:
    """Return the one-paragraph help text of an option, including its default."""
    spec = load_options(path)[name]
    text = " ".join(spec["description"].split())
    return f"{text} (default: {spec['default']})"


def load_overrides(path, options_path: Path = DEFAULT_OPTIONS_PATH) -> dict[str, Any]:
    """Read a YAML file of option overrides, rejecting unknown names."""
    try:
        raw = yaml.safe_load(Path(path).read_text()) or {}
    except FileNotFoundError:
        raise ParameterError(f"config file {path} does not exist")
    except yaml.YAMLError as e:
        raise ParameterError(f"config file {path} is not valid YAML: {e}")
    if not isinstance(raw, dict):
        raise ParameterError(f"config file {path} must hold a mapping of option names")
    options = load_options(options_path)
    unknown = sorted(set(raw) - set(options))
    if unknown:
        raise ParameterError(f"unknown options in {path}: {', '.join(unknown)}")
    try:
        return {name: _TYPES[options[name]["type"]](value) for name, value in raw.items()}
    except (TypeError, ValueError) as e:
        raise ParameterError(f"config file {path} has an option of the wrong type: {e}")


def output_dir(default=".") -> Path:
    """Directory for artifacts; the environment variable overrides the default."""
    return Path(os.environ.get(OUTPUT_DIR_ENV) or default)


def resolve_workers(workers: int) -> int:
    """Translate the `workers` option into a thread count."""
    return workers if workers > 0 else (os.cpu_count() or 1)


class RunConfig(BaseModel):
    """The resolved configuration of one command-line invocation."""

    model_config = ConfigDict(frozen=True)

    command: str
    lattice: str
    n: int
    k: int
    parameters: dict[str, Any] = {}

    @model_validator(mode="after")
    def _check_params(self):
        if self.n == 1 and self.k == 1:
            raise ValueError(
                "the trivial case n = k = 1 is excluded: V would consist of the two lattice "
                "points closest to 0"
            )
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        return self

    def to_dict(self) -> dict:
        """Return the run configuration as a Python dictionary."""
        return self.model_dump(mode="json")

    def __str__(self) -> str:
        """Return the run configuration as a YAML string."""
        return yaml.safe_dump(self.to_dict(), sort_keys=True)
