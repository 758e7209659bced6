"""Configuration module for c2rnet.

Settings are flat TOML `key = value` pairs.  They are resolved from the
built-in defaults, the user's ~/.c2rnetrc, an explicit config file, and the
C2RNET_* environment variables, in that order.
"""

import dataclasses
import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .common import DEFAULT_RELATIONS
from .errors import ConfigurationError

__all__ = [
    "DEFAULT_CONFIG",
    "TrainingConfig",
    "get_config_path",
    "load_config",
    "write_config",
    "get_logger_verbosity",
]

log = logging.getLogger(__name__)

# Default configuration values
DEFAULT_CONFIG: dict[str, Any] = {
    # optimization
    "learning_rate": 5e-4,
    "adam_epsilon": 1e-6,
    "epochs": 150,
    "ndp_epochs": 50,
    "ndp_freeze_epochs": 40,
    "dropout": 0.5,
    "seed": 0,
    "batch_size": 1,  # documents per optimizer step
    "early_stopping_patience": 0,  # 0 disables early stopping
    # model
    "fusion_mode": "ndp-embedding",
    "embedding_dim": 64,
    "embedding_seed": 0,
    "embeddings_path": "",  # empty: hash embeddings
    "h1": 128,
    "h2": 256,
    "split_hidden": 64,
    "paragraph_dim": 8,
    "relations": list(DEFAULT_RELATIONS),
    "full_label_inventory": False,
    # evaluation
    "include_root": True,
    # data, relative paths resolve under $C2RNET_DATA_DIR
    "train_path": "",
    "dev_path": "",
    "test_path": "",
    "ndp_train_path": "",
    "ndp_test_path": "",
    "log_level": "INFO",
}

_FUSION_MODES = ("none", "ndp-embedding", "ndp-one-hot")


def get_config_path() -> Path:
    """Return the path to the user's config file."""
    return Path.home() / ".c2rnetrc"


def _read_toml(path: Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomli.load(f)
    except tomli.TOMLDecodeError as e:
        raise ConfigurationError(f"Error parsing config file {path}: {e}") from e


def load_config(config_file: str | os.PathLike[str] | None = None) -> dict[str, Any]:
    """Load configuration from ~/.c2rnetrc and an optional explicit file.

    Args:
        config_file: A TOML file whose values override the user config.

    Returns:
        Dict containing the merged configuration (defaults + user config +
        explicit file + environment).

    """
    config = dict(DEFAULT_CONFIG)
    config_path = get_config_path()

    if config_path.exists():
        try:
            _merge_configs(config, _read_toml(config_path))
        except Exception as e:
            log.warning(f"Error loading config from {config_path}: {e}")

    if config_file is not None:
        explicit = Path(config_file)
        if not explicit.exists():
            raise ConfigurationError(f"Config file does not exist: {explicit}")
        _merge_configs(config, _read_toml(explicit))

    _apply_environment(config)
    return config


def _merge_configs(base: dict[str, Any], override: Mapping[str, Any]) -> None:
    """Recursively merge override dict into base dict.

    Args:
        base: The base configuration dictionary to merge into.
        override: The override configuration dictionary to merge from.

    """
    for key, value in override.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _merge_configs(base[key], value)  # type: ignore[reportUnknownArgumentType]
        else:
            base[key] = value


def _apply_environment(config: dict[str, Any]) -> None:
    level = os.environ.get("C2RNET_DEBUG_LEVEL")
    if level:
        config["log_level"] = level.upper()
    if os.environ.get("C2RNET_DEBUG"):
        config["log_level"] = "DEBUG"


def get_logger_verbosity(config: Mapping[str, Any] | None = None) -> str:
    """Get the configured logger verbosity level.

    Returns:
        String representing the logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).

    """
    if config is None:
        config = load_config()
    return str(config["log_level"]).upper()


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 5e-4
    adam_epsilon: float = 1e-6
    epochs: int = 150
    ndp_epochs: int = 50
    ndp_freeze_epochs: int = 40
    dropout: float = 0.5
    seed: int = 0
    batch_size: int = 1
    early_stopping_patience: int = 0
    fusion_mode: str = "ndp-embedding"
    embedding_dim: int = 64
    embedding_seed: int = 0
    embeddings_path: str = ""
    h1: int = 128
    h2: int = 256
    split_hidden: int = 64
    paragraph_dim: int = 8
    relations: tuple[str, ...] = DEFAULT_RELATIONS
    full_label_inventory: bool = False
    include_root: bool = True
    train_path: str = ""
    dev_path: str = ""
    test_path: str = ""
    ndp_train_path: str = ""
    ndp_test_path: str = ""
    log_level: str = "INFO"

    def __post_init__(self) -> None:
        for name in ("h1", "h2", "split_hidden", "paragraph_dim", "embedding_dim", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("epochs", "ndp_epochs", "ndp_freeze_epochs", "early_stopping_patience"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.ndp_freeze_epochs > self.epochs:
            raise ConfigurationError(
                f"ndp_freeze_epochs ({self.ndp_freeze_epochs}) exceeds epochs ({self.epochs})"
            )
        if self.learning_rate <= 0 or self.adam_epsilon <= 0:
            raise ConfigurationError("learning_rate and adam_epsilon must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.fusion_mode not in _FUSION_MODES:
            raise ConfigurationError(
                f"unknown fusion_mode {self.fusion_mode!r}; expected one of {_FUSION_MODES}"
            )
        if not self.relations or len(set(self.relations)) != len(self.relations):
            raise ConfigurationError("relations must be a non-empty list without repeats")
        if "span" in self.relations:
            raise ConfigurationError('"span" is reserved and cannot be a relation')
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigurationError(f"unknown log_level {self.log_level!r}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "TrainingConfig":
        """Build a validated config; unknown keys are rejected."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - set(fields))
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        for name, value in values.items():
            default = fields[name].default
            try:
                kwargs[name] = _coerce(name, value, default)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"bad value for {name}: {value!r}") from e
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, Any]:
        """Plain snapshot suitable for TOML and checkpoints."""
        mapping = dataclasses.asdict(self)
        mapping["relations"] = list(self.relations)
        return mapping

    def replace(self, **changes: Any) -> "TrainingConfig":
        return dataclasses.replace(self, **changes)


def _coerce(name: str, value: Any, default: Any) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise TypeError(name)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(name)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise TypeError(name)
        return float(value)
    if isinstance(default, tuple):
        if isinstance(value, str) or not all(isinstance(v, str) for v in value):
            raise TypeError(name)
        return tuple(value)
    if not isinstance(value, str):
        raise TypeError(name)
    return value


def write_config(path: str | os.PathLike[str], config: TrainingConfig) -> None:
    """Write the config snapshot as TOML next to run outputs."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "wb") as f:
        tomli_w.dump(config.to_mapping(), f)
