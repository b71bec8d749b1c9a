"""
Shared plumbing for the onionlabel CLI tools: common flags, configuration
resolution, resolved-config records and exception-to-exit-code handling.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional

from lib.utils.config import PipelineConfig, set_config, setup_logging, write_key_value_file
from lib.utils.errors import ExitCode, OnionLabelError, exit_code_for

RESOLVED_CONFIG_NAME = "resolved.conf"


def add_common_arguments(parser: argparse.ArgumentParser, config: PipelineConfig, config_help: Optional[str] = None) -> None:
    parser.add_argument(
        "--config",
        help=config_help or "Configuration file (key = value, .json or .toml); flags override it",
    )
    parser.add_argument(
        "--threads",
        type=int,
        help=f"Worker threads (default: {config.threads})",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help=f"Logging level (default: {config.logging.level})",
    )


def resolve_config(
    args: argparse.Namespace,
    overrides: Optional[Mapping[str, Any]] = None,
    config_file: Optional[str] = None,
) -> PipelineConfig:
    """Environment, then the config file, then flags; installs logging and the global config."""
    config = PipelineConfig.from_env()
    if config_file:
        config = PipelineConfig.from_file(config_file, base=config)
    merged: Dict[str, Any] = dict(overrides or {})
    merged["threads"] = getattr(args, "threads", None)
    merged["logging.level"] = getattr(args, "log_level", None)
    config.apply_overrides(merged)
    set_config(config)
    setup_logging(config.logging)
    return config


def resolved_config_path(output: Path) -> Path:
    """``resolved.conf`` inside an output directory, ``<stem>.resolved.conf`` beside an output file."""
    if output.suffix == "" or output.is_dir():
        return output / RESOLVED_CONFIG_NAME
    return output.with_name(f"{output.stem}.{RESOLVED_CONFIG_NAME}")


def write_resolved_config(config: PipelineConfig, output: Path, run: Mapping[str, Any]) -> Path:
    """Record the fully resolved configuration plus the run's own settings (``run.*`` keys)."""
    values = config.to_key_values()
    for key, value in run.items():
        values[f"run.{key}"] = value
    path = resolved_config_path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_key_value_file(path, values)
    return path


def run_tool(body: Callable[[], int]) -> int:
    """Run a tool body, mapping pipeline exceptions onto exit codes."""
    try:
        return body()
    except KeyboardInterrupt:
        print("\n👋 Operation cancelled by user")
        return int(ExitCode.FAILURE)
    except (OnionLabelError, FileNotFoundError, PermissionError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        return int(ExitCode.FAILURE)


def parse_label_list(text: Optional[str]) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()] if text else []
