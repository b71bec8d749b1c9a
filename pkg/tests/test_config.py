"""Tests for configuration layering and error/exit-code mapping."""

import json

import pytest

from lib.utils.config import (
    LampConfig,
    PipelineConfig,
    get_config,
    read_key_value_file,
    set_config,
)
from lib.utils.errors import (
    ConfigError,
    DataError,
    ExitCode,
    ExplainError,
    SchemaMismatchError,
    TrainingError,
    exit_code_for,
)


def test_defaults_follow_the_published_hyperparameters():
    config = PipelineConfig()
    assert config.lamp.epochs == 100
    assert config.lamp.batch_size == 64
    assert config.lamp.learning_rate == pytest.approx(0.0002)
    assert config.lamp.optimizer == "adam"
    assert config.lamp.message_rounds == 2
    assert config.lamp.attention_heads == 4
    assert config.split.train_fraction == pytest.approx(0.7)
    assert config.explain.top_k == 20
    assert config.evasion.e2_percentile == 25.0
    assert config.evasion.e3_percentile == 10.0
    assert config.threads == 1


def test_from_env_reads_section_prefixes(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LAMP_EPOCHS", "7")
    monkeypatch.setenv("FOREST_MAX_DEPTH", "4")
    monkeypatch.setenv("EVASION_EXCLUSIVE", "false")
    monkeypatch.setenv("ONIONLABEL_THREADS", "3")
    monkeypatch.setenv("ONIONLABEL_OUTPUT_DIR", "elsewhere")

    config = PipelineConfig.from_env()
    assert config.lamp.epochs == 7
    assert config.forest.max_depth == 4
    assert config.evasion.exclusive is False
    assert config.threads == 3
    assert config.output_directory == "elsewhere"


def test_key_value_file_then_overrides(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("lamp.epochs = 50\nforest.n_trees = 200\nthreads = 2\n# comment\n", encoding="utf-8")

    config = PipelineConfig.from_file(str(path))
    assert config.lamp.epochs == 50
    assert config.forest.n_trees == 200
    assert config.threads == 2

    config.apply_overrides({"lamp.epochs": 3, "forest.n_trees": None})
    assert config.lamp.epochs == 3
    assert config.forest.n_trees == 200


def test_json_and_toml_files(tmp_path):
    json_path = tmp_path / "run.json"
    json_path.write_text(json.dumps({"lamp": {"d_model": 64, "attention_heads": 2}}), encoding="utf-8")
    assert PipelineConfig.from_file(str(json_path)).lamp.d_model == 64

    toml_path = tmp_path / "run.toml"
    toml_path.write_text("[split]\nseed = 9\n", encoding="utf-8")
    assert PipelineConfig.from_file(str(toml_path)).split.seed == 9


@pytest.mark.parametrize(
    "overrides",
    [
        {"lamp.nonexistent": 1},
        {"nosuchsection.value": 1},
        {"bogus": 1},
        {"lamp.dropout": 1.5},
        {"lamp.label_mask": "sideways"},
        {"lamp.d_model": 10, "lamp.attention_heads": 4},
        {"split.train_fraction": 1.0},
        {"evasion.exclusive": "maybe"},
        {"threads": 0},
    ],
)
def test_invalid_settings_raise_config_error(overrides):
    with pytest.raises(ConfigError):
        PipelineConfig().apply_overrides(overrides)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        PipelineConfig.from_file(str(tmp_path / "absent.conf"))


def test_save_and_reload_key_values(tmp_path):
    config = PipelineConfig()
    config.apply_overrides({"lamp.epochs": 12, "explain.max_samples": 5, "logging.format": "%(message)s"})
    path = tmp_path / "saved.conf"
    config.save_to_file(str(path))

    values = read_key_value_file(path)
    assert values["lamp.epochs"] == "12"
    assert values["explain.max_samples"] == "5"
    assert values["forest.max_depth"] in ("", None)

    reloaded = PipelineConfig.from_file(str(path))
    assert reloaded.to_dict() == config.to_dict()


def test_global_config_is_replaceable():
    custom = PipelineConfig(lamp=LampConfig(epochs=1))
    set_config(custom)
    assert get_config() is custom


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigError("x"), ExitCode.USAGE),
        (ExplainError("x"), ExitCode.USAGE),
        (DataError("x"), ExitCode.DATA),
        (TrainingError("x"), ExitCode.TRAINING),
        (SchemaMismatchError("x"), ExitCode.SCHEMA_MISMATCH),
        (FileNotFoundError("x"), ExitCode.DATA),
        (RuntimeError("x"), ExitCode.FAILURE),
    ],
)
def test_exit_codes(error, code):
    assert exit_code_for(error) == int(code)


def test_data_error_carries_row():
    error = DataError("bad cell", row=4)
    assert error.row == 4
    assert str(error) == "row 4: bad cell"
