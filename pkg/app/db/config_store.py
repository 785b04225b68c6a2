"""
Flat key=value experiment files.

    # comment
    seed=7
    signal.omega=150
    modulo.lambda=4.38

Blank lines and lines starting with '#' are skipped.
"""
from pathlib import Path
from typing import Dict, Union
import logging

from pydantic import ValidationError

from app.core.config import output_dir_override
from app.core.exceptions import ConfigurationError, IngestionError
from app.db.csv_store import write_text
from app.schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

# file key -> ExperimentConfig field
KEYS: Dict[str, str] = {
    "seed": "seed",
    "signal.omega": "omega",
    "signal.duration": "duration",
    "signal.amplitude": "amplitude",
    "signal.kind": "kind",
    "signal.phase": "phase",
    "modulo.lambda": "threshold",
    "modulo.h": "hysteresis",
    "asdm.delta": "delta",
    "asdm.b": "b",
    "recovery.order": "order",
    "recovery.iterations": "iterations",
    "recovery.oversampling": "oversampling",
    "output.dir": "output_dir",
}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigurationError(f"{source}:{number}: unknown key '{key}'")
        values[KEYS[key]] = value

    override = output_dir_override()
    if override:
        values["output_dir"] = override
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        details = "; ".join(err["msg"] for err in e.errors())
        raise ConfigurationError(f"{source}: {details}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    source = Path(path)
    try:
        text = source.read_text()
    except OSError as e:
        raise IngestionError(f"could not read {source}: {e}") from e
    config = parse_config(text, str(source))
    logger.info(f"Loaded experiment config from {source}")
    return config


def dump_config(config: ExperimentConfig) -> str:
    data = config.model_dump()
    lines = []
    for key, field in KEYS.items():
        value = data[field]
        if value is None:
            continue
        lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    return "\n".join(lines) + "\n"


def save_config(path: Union[str, Path], config: ExperimentConfig) -> Path:
    return write_text(path, dump_config(config))
