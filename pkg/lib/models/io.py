"""
Model file storage.

Forest-based models (BR, CC, LP) are stored as a JSON document tagged
``onionlabel-forest``; LaMP models use the binary container in
``lib.lamp.storage``. ``load_model`` tells them apart by the leading bytes.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ..baselines.forest import RandomForest
from ..baselines.multilabel import BinaryRelevance, ClassifierChain, LabelPowerset
from ..dataset.schema import LABELS
from ..lamp.storage import MAGIC as LAMP_MAGIC
from ..lamp.storage import read_lamp, write_lamp
from ..lamp.training import LampClassifier
from ..utils.errors import DataError, SchemaMismatchError
from .base import MODEL_KINDS, MultiLabelModel

logger = logging.getLogger(__name__)

FOREST_FORMAT = "onionlabel-forest"
FOREST_FORMAT_VERSION = 1
MODEL_SUFFIX = ".model"

PathLike = Union[str, Path]


def default_model_path(directory: PathLike, kind: str) -> Path:
    return Path(directory) / f"{kind}{MODEL_SUFFIX}"


def _forest_document(model: MultiLabelModel) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "format": FOREST_FORMAT,
        "format_version": FOREST_FORMAT_VERSION,
        "header": model.header(),
    }
    if isinstance(model, LabelPowerset):
        document["forests"] = [model.forest.to_dict()]
        document["combinations"] = model.combinations.astype(int).tolist()
    elif isinstance(model, ClassifierChain):
        document["forests"] = [forest.to_dict() for forest in model.forests]
        document["order"] = list(model.order)
    elif isinstance(model, BinaryRelevance):
        document["forests"] = [forest.to_dict() for forest in model.forests]
    else:
        raise TypeError(f"Cannot store model of type {type(model).__name__} as a forest container")
    return document


def save_model(model: MultiLabelModel, path: PathLike) -> Path:
    """Write ``model`` to ``path`` (parent directories are created)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(model, LampClassifier):
        with open(path, "wb") as f:
            write_lamp(model, f)
    else:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_forest_document(model), f, sort_keys=True)
    logger.info(f"Saved {model.display_name} model to {path}")
    return path


def _model_from_document(document: Dict[str, Any]) -> MultiLabelModel:
    if document.get("format") != FOREST_FORMAT:
        raise DataError("not an onionlabel model file")
    if document.get("format_version") != FOREST_FORMAT_VERSION:
        raise DataError(f"unsupported forest model format version {document.get('format_version')}")

    header = document["header"]
    if header.get("labels") != list(LABELS):
        raise SchemaMismatchError("model label order differs from the canonical label order")
    kind = header["kind"]
    names = header["feature_names"]
    threshold = float(header.get("threshold", 0.5))
    forests = [RandomForest.from_dict(forest) for forest in document["forests"]]

    if kind == "br":
        model: MultiLabelModel = BinaryRelevance(names, forests, threshold)
    elif kind == "cc":
        model = ClassifierChain(names, forests, document.get("order"), threshold)
    elif kind == "lp":
        model = LabelPowerset(names, forests[0], np.asarray(document["combinations"], dtype=bool), threshold)
    else:
        raise DataError(f"unknown model kind '{kind}'")

    if model.schema_hash != header.get("schema_hash"):
        raise SchemaMismatchError("schema hash in the model file does not match its feature names")
    return model


def load_model(path: PathLike) -> MultiLabelModel:
    """Load a model written by ``save_model``.

    Raises:
        FileNotFoundError: path does not exist
        DataError: unreadable or unknown container
        SchemaMismatchError: recorded schema or label order is inconsistent
    """
    path = Path(path)
    with open(path, "rb") as f:
        if f.read(len(LAMP_MAGIC)) == LAMP_MAGIC:
            f.seek(0)
            model: MultiLabelModel = read_lamp(f)
        else:
            f.seek(0)
            try:
                document = json.loads(f.read().decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as e:
                raise DataError(f"{path}: not a model file ({e})")
            try:
                model = _model_from_document(document)
            except (KeyError, TypeError, ValueError) as e:
                raise DataError(f"{path}: malformed model file ({e})")
    logger.info(f"Loaded {model.display_name} model from {path}")
    return model


def load_model_directory(directory: PathLike) -> Dict[str, MultiLabelModel]:
    """Every ``*.model`` file in ``directory`` keyed by kind, in br/cc/lp/lamp order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"Model directory not found: {directory}")
    found: Dict[str, MultiLabelModel] = {}
    for path in sorted(directory.glob(f"*{MODEL_SUFFIX}")):
        model = load_model(path)
        if model.kind in found:
            raise DataError(f"more than one {model.display_name} model in {directory}")
        found[model.kind] = model
    if not found:
        raise DataError(f"no {MODEL_SUFFIX} files in {directory}")
    return {kind: found[kind] for kind in MODEL_KINDS if kind in found}
