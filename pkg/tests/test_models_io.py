"""Tests for model containers and schema alignment."""

import json

import numpy as np
import pytest

from lib.baselines.multilabel import fit_br, fit_cc, fit_lp
from lib.dataset.core import drop_zero_variance, project
from lib.lamp.training import fit_lamp
from lib.models.base import align_dataset
from lib.models.io import (
    FOREST_FORMAT,
    default_model_path,
    load_model,
    load_model_directory,
    save_model,
)
from lib.utils.errors import DataError, SchemaMismatchError

FITTERS = {"br": fit_br, "cc": fit_cc, "lp": fit_lp}


@pytest.mark.parametrize("kind", ["br", "cc", "lp"])
def test_forest_models_round_trip(tmp_path, toy_dataset, small_forest_config, kind):
    model = FITTERS[kind](toy_dataset, small_forest_config)
    path = save_model(model, default_model_path(tmp_path, kind))

    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["format"] == FOREST_FORMAT
    assert document["header"]["kind"] == kind
    assert document["header"]["schema_hash"] == model.schema_hash

    loaded = load_model(path)
    assert type(loaded) is type(model)
    assert loaded.feature_names == model.feature_names
    np.testing.assert_array_equal(loaded.predict_proba(toy_dataset.features), model.predict_proba(toy_dataset.features))
    np.testing.assert_array_equal(loaded.predict(toy_dataset.features), model.predict(toy_dataset.features))


def test_directory_is_ordered_by_kind(tmp_path, toy_dataset, small_forest_config, tiny_lamp_config):
    save_model(fit_lp(toy_dataset, small_forest_config), tmp_path / "lp.model")
    save_model(fit_lamp(toy_dataset, tiny_lamp_config)[0], tmp_path / "a-lamp.model")
    save_model(fit_br(toy_dataset, small_forest_config), tmp_path / "zz-br.model")
    (tmp_path / "notes.txt").write_text("ignored", encoding="utf-8")

    models = load_model_directory(tmp_path)
    assert list(models) == ["br", "lp", "lamp"]


def test_duplicate_kind_in_directory(tmp_path, toy_dataset, small_forest_config):
    model = fit_br(toy_dataset, small_forest_config)
    save_model(model, tmp_path / "br.model")
    save_model(model, tmp_path / "br-copy.model")
    with pytest.raises(DataError):
        load_model_directory(tmp_path)


def test_empty_or_missing_directory(tmp_path):
    with pytest.raises(DataError):
        load_model_directory(tmp_path)
    with pytest.raises(FileNotFoundError):
        load_model_directory(tmp_path / "absent")


@pytest.mark.parametrize(
    "content",
    [
        b"\x00\x01 not json",
        b'{"format": "something-else"}',
        b'{"format": "onionlabel-forest", "format_version": 99}',
        b'{"format": "onionlabel-forest", "format_version": 1}',
        b"ONIONLABEL-LAMP\x00\x01\x00",
    ],
)
def test_corrupted_files(tmp_path, content):
    path = tmp_path / "broken.model"
    path.write_bytes(content)
    with pytest.raises(DataError):
        load_model(path)


def test_tampered_feature_names(tmp_path, toy_dataset, small_forest_config):
    path = save_model(fit_br(toy_dataset, small_forest_config), tmp_path / "br.model")
    document = json.loads(path.read_text(encoding="utf-8"))
    document["header"]["feature_names"] = document["header"]["feature_names"][:-1]
    path.write_text(json.dumps(document), encoding="utf-8")
    with pytest.raises(SchemaMismatchError):
        load_model(path)


def test_align_projects_superset_data(toy_dataset, small_forest_config):
    features = toy_dataset.features.copy()
    features[:, 3] = 0.0
    reduced, removed = drop_zero_variance(toy_dataset.with_features(features))
    assert removed == [3]

    model = fit_br(reduced, small_forest_config)
    aligned = align_dataset(toy_dataset, model)
    assert aligned.schema.names == model.feature_names
    np.testing.assert_array_equal(aligned.features, toy_dataset.features[:, :3])


def test_align_rejects_missing_columns(toy_dataset, small_forest_config):
    model = fit_br(toy_dataset, small_forest_config)
    narrow = project(toy_dataset, ["feature_000", "feature_002", "feature_003"])
    with pytest.raises(SchemaMismatchError):
        align_dataset(narrow, model)
