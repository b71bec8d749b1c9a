"""
Shared configuration management for the onionlabel pipeline.

This module provides centralized configuration handling for the library and
the CLI tools, with support for environment variables, ``key = value`` files,
JSON/TOML files and command-line overrides (applied last).
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union, get_args, get_origin

from .errors import ConfigError

# Try to import dotenv, but don't fail if it's not available
try:
    from dotenv import dotenv_values, load_dotenv

    DOTENV_AVAILABLE = True
except ImportError:
    DOTENV_AVAILABLE = False

logger = logging.getLogger(__name__)

_TRUE_STRINGS = {"1", "true", "yes", "on"}
_FALSE_STRINGS = {"0", "false", "no", "off"}


def _coerce(annotation: Any, value: Any) -> Any:
    """Convert a raw (usually string) value to the annotated field type."""
    if get_origin(annotation) is Union:
        inner = [arg for arg in get_args(annotation) if arg is not type(None)]
        if value is None or (isinstance(value, str) and value.strip().lower() in {"", "none", "null"}):
            return None
        return _coerce(inner[0], value)
    if annotation is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE_STRINGS:
            return True
        if text in _FALSE_STRINGS:
            return False
        raise ConfigError(f"Expected a boolean, got {value!r}")
    try:
        if annotation is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if annotation is float:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Expected {annotation.__name__}, got {value!r}")
    return value if annotation is not str else str(value)


class _Section:
    """Mixin giving config dataclasses env loading and dict updates."""

    ENV_PREFIX = ""

    @classmethod
    def from_env(cls, prefix: Optional[str] = None):
        """Create the section from environment variables (``<PREFIX><FIELD>``)."""
        prefix = cls.ENV_PREFIX if prefix is None else prefix
        section = cls()
        for item in fields(cls):
            raw = os.getenv(f"{prefix}{item.name.upper()}")
            if raw is not None:
                setattr(section, item.name, _coerce(item.type, raw))
        return section

    def update(self, values: Mapping[str, Any]) -> None:
        """Set fields from a mapping, converting values to the field types."""
        known = {item.name: item for item in fields(self)}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"Unknown setting '{key}' for {type(self).__name__}")
            setattr(self, key, _coerce(known[key].type, value))
        self.validate()

    def validate(self) -> None:
        """Check value ranges; sections override."""


@dataclass
class SplitConfig(_Section):
    """Train/test split settings."""

    ENV_PREFIX = "SPLIT_"

    train_fraction: float = 0.7
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass
class ForestConfig(_Section):
    """Random forest base learner settings (BR/CC/LP)."""

    ENV_PREFIX = "FOREST_"

    n_trees: int = 100
    features_per_split: Optional[int] = None  # None means ceil(sqrt(F))
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    seed: int = 0
    threshold: float = 0.5

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ConfigError("features_per_split must be >= 1")


@dataclass
class LampConfig(_Section):
    """Label message passing network hyperparameters."""

    ENV_PREFIX = "LAMP_"

    d_model: int = 512
    d_hidden: int = 1024
    dropout: float = 0.1
    learning_rate: float = 0.0002
    batch_size: int = 64
    epochs: int = 100
    optimizer: str = "adam"
    loss: str = "bce"
    label_mask: str = "prior"  # "prior", "full" or "none"
    encoder: str = "graph"
    decoder: str = "graph"
    message_rounds: int = 2
    attention_heads: int = 4
    threshold: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        for name in ("d_model", "d_hidden", "batch_size", "message_rounds", "attention_heads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.d_model % self.attention_heads:
            raise ConfigError("d_model must be divisible by attention_heads")
        if self.label_mask not in {"prior", "full", "none"}:
            raise ConfigError(f"Unknown label_mask '{self.label_mask}'")
        if self.optimizer != "adam":
            raise ConfigError("Only the adam optimizer is supported")
        if self.loss != "bce":
            raise ConfigError("Only the bce loss is supported")


@dataclass
class ExplainConfig(_Section):
    """Shapley attribution settings."""

    ENV_PREFIX = "EXPLAIN_"

    estimator: str = "sampled"  # "exact" or "sampled"
    n_perms: int = 100
    background: int = 100
    top_k: int = 20
    max_samples: Optional[int] = None
    seed: int = 0

    def validate(self) -> None:
        if self.estimator not in {"exact", "sampled"}:
            raise ConfigError(f"Unknown estimator '{self.estimator}'")
        if self.n_perms < 1 or self.background < 1 or self.top_k < 1:
            raise ConfigError("n_perms, background and top_k must be >= 1")


@dataclass
class EvasionConfig(_Section):
    """Percentile evasion attack settings."""

    ENV_PREFIX = "EVASION_"

    exclusive: bool = True
    main_labels_only: bool = False
    e2_percentile: float = 25.0
    e3_percentile: float = 10.0

    def validate(self) -> None:
        for name in ("e2_percentile", "e3_percentile"):
            if not 0.0 <= getattr(self, name) <= 100.0:
                raise ConfigError(f"{name} must be in [0, 100]")


@dataclass
class LoggingConfig(_Section):
    """Logging configuration settings."""

    ENV_PREFIX = "LOG_"

    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_path: Optional[str] = None


_SECTIONS = {
    "split": SplitConfig,
    "forest": ForestConfig,
    "lamp": LampConfig,
    "explain": ExplainConfig,
    "evasion": EvasionConfig,
    "logging": LoggingConfig,
}


@dataclass
class PipelineConfig:
    """Complete pipeline configuration."""

    split: SplitConfig = field(default_factory=SplitConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    lamp: LampConfig = field(default_factory=LampConfig)
    explain: ExplainConfig = field(default_factory=ExplainConfig)
    evasion: EvasionConfig = field(default_factory=EvasionConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    # Global settings
    output_directory: str = "./runs"
    threads: int = 1

    @classmethod
    def from_env(cls) -> "PipelineConfig":
        """Create complete config from environment variables.

        If python-dotenv is available, loads .env file first to make its
        variables available as environment variables.
        """
        if DOTENV_AVAILABLE:
            env_path = Path.cwd() / ".env"
            if env_path.exists():
                load_dotenv(env_path, override=False)
                logger.debug(f"Loaded environment variables from {env_path}")

        return cls(
            split=SplitConfig.from_env(),
            forest=ForestConfig.from_env(),
            lamp=LampConfig.from_env(),
            explain=ExplainConfig.from_env(),
            evasion=EvasionConfig.from_env(),
            logging=LoggingConfig.from_env(),
            output_directory=os.getenv("ONIONLABEL_OUTPUT_DIR", cls.output_directory),
            threads=int(os.getenv("ONIONLABEL_THREADS", cls.threads)),
        )

    @classmethod
    def from_file(cls, config_path: str, base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """Load configuration from a file (key = value, JSON or TOML).

        Values in the file are layered on top of ``base`` (defaults when omitted).
        """
        config_file = Path(config_path)

        if not config_file.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")

        if config_file.suffix == ".json":
            with open(config_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        elif config_file.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib

            with open(config_file, "rb") as f:
                data = tomllib.load(f)
        else:
            data = read_key_value_file(config_file)

        config = base if base is not None else cls()
        config.apply_overrides(data)
        return config

    def apply_overrides(self, data: Mapping[str, Any]) -> "PipelineConfig":
        """Apply nested or dotted (``section.field``) settings; None values are skipped."""
        nested: Dict[str, Dict[str, Any]] = {}
        for key, value in data.items():
            if value is None:
                continue
            if isinstance(value, Mapping):
                nested.setdefault(key, {}).update(value)
            elif "." in key:
                section, name = key.split(".", 1)
                nested.setdefault(section, {})[name] = value
            elif key == "output_directory":
                self.output_directory = str(value)
            elif key == "threads":
                self.threads = _coerce(int, value)
            else:
                raise ConfigError(f"Unknown setting '{key}'")

        for section, values in nested.items():
            if section not in _SECTIONS:
                raise ConfigError(f"Unknown configuration section '{section}'")
            getattr(self, section).update(values)

        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        data: Dict[str, Any] = {name: asdict(getattr(self, name)) for name in _SECTIONS}
        data["output_directory"] = self.output_directory
        data["threads"] = self.threads
        return data

    def to_key_values(self) -> Dict[str, Any]:
        """Flatten into dotted keys."""
        flat: Dict[str, Any] = {}
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                for name, inner in value.items():
                    flat[f"{key}.{name}"] = inner
            else:
                flat[key] = value
        return flat

    def save_to_file(self, config_path: str) -> None:
        """Save configuration to a file (JSON when the suffix is .json, else key = value)."""
        config_file = Path(config_path)
        config_file.parent.mkdir(parents=True, exist_ok=True)

        if config_file.suffix == ".json":
            with open(config_file, "w", encoding="utf-8") as f:
                json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        else:
            write_key_value_file(config_file, self.to_key_values())


def read_key_value_file(path: Union[str, Path]) -> Dict[str, Optional[str]]:
    """Parse a ``key = value`` file (comments with ``#``)."""
    if not DOTENV_AVAILABLE:
        raise ConfigError("python-dotenv is required to read key = value configuration files")
    return dict(dotenv_values(path))


def write_key_value_file(path: Union[str, Path], values: Mapping[str, Any]) -> None:
    """Write a mapping as sorted ``key = value`` lines (None written as empty)."""
    lines = []
    for key in sorted(values):
        value = values[key]
        if value is None:
            text = ""
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = str(value)
        if any(ch in text for ch in " #'\""):
            text = '"' + text.replace('"', '\\"') + '"'
        lines.append(f"{key} = {text}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# Global configuration instance
_global_config: Optional[PipelineConfig] = None


def get_config(config_path: Optional[str] = None) -> PipelineConfig:
    """
    Get the global configuration instance.

    Args:
        config_path: Optional path to configuration file, layered over the environment

    Returns:
        PipelineConfig instance
    """
    global _global_config

    if _global_config is None:
        _global_config = PipelineConfig.from_env()
        if config_path:
            _global_config = PipelineConfig.from_file(config_path, base=_global_config)

    return _global_config


def set_config(config: Optional[PipelineConfig]) -> None:
    """Set (or reset with None) the global configuration instance."""
    global _global_config
    _global_config = config


def setup_logging(config: Optional[LoggingConfig] = None) -> None:
    """Setup logging based on configuration."""
    if config is None:
        config = get_config().logging

    logging_kwargs: Dict[str, Any] = {
        "level": getattr(logging, config.level.upper(), logging.INFO),
        "format": config.format,
    }

    if config.file_path:
        log_file = Path(config.file_path)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        logging_kwargs["filename"] = config.file_path

    logging.basicConfig(**logging_kwargs)
