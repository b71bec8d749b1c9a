"""
Common classifier interface shared by BR, CC, LP and LaMP.

Every model maps an (N, F) feature matrix whose columns follow the model's
``feature_names`` to (N, 10) per-label probabilities in canonical label order.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .. import __version__
from ..dataset.core import Dataset, TraceSample, project
from ..dataset.schema import LABELS, LabelSet, schema_from_names, schema_hash
from ..utils.errors import SchemaMismatchError

logger = logging.getLogger(__name__)

MODEL_KINDS = ("br", "cc", "lp", "lamp")
DISPLAY_NAMES = {"br": "BR", "cc": "CC", "lp": "LP", "lamp": "LaMP"}


class MultiLabelModel(ABC):
    """Trained multi-label classifier over a fixed feature schema."""

    kind: str = ""

    def __init__(self, feature_names: Sequence[str], threshold: float = 0.5):
        self.feature_names: List[str] = list(feature_names)
        self.threshold = threshold
        self.labels: List[str] = list(LABELS)

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES.get(self.kind, self.kind)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def schema_hash(self) -> str:
        return schema_hash(schema_from_names(self.feature_names))

    def check_features(self, X: np.ndarray) -> np.ndarray:
        """Coerce to a 2-D float matrix with the model's column count."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise SchemaMismatchError(
                f"{self.display_name} model expects {self.n_features} features, got {X.shape[-1]}"
            )
        return X

    @abstractmethod
    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Per-label probabilities, shape (N, 10), values in [0, 1]."""

    def predict(self, X: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
        """Boolean label matrix, shape (N, 10)."""
        threshold = self.threshold if threshold is None else threshold
        return self.predict_proba(X) >= threshold

    def predict_sample(self, sample: TraceSample, threshold: Optional[float] = None) -> LabelSet:
        return LabelSet.from_bits(self.predict(sample.features, threshold)[0])

    def predict_proba_sample(self, sample: TraceSample) -> np.ndarray:
        return self.predict_proba(sample.features)[0]

    def header(self) -> Dict[str, Any]:
        """Self-describing metadata written into model containers."""
        return {
            "kind": self.kind,
            "schema_hash": self.schema_hash,
            "labels": self.labels,
            "feature_names": self.feature_names,
            "threshold": self.threshold,
            "library_version": __version__,
        }


def align_dataset(data: Dataset, model: MultiLabelModel) -> Dataset:
    """Return ``data`` with exactly the model's columns, in the model's order.

    Raises:
        SchemaMismatchError: data lacks model columns or hashes still differ
    """
    if data.schema.names != model.feature_names:
        logger.info(f"Projecting {data.n_features} data columns onto {model.n_features} model columns")
        data = project(data, model.feature_names)
    if schema_hash(data.schema) != model.schema_hash:
        raise SchemaMismatchError("schema hash of the data does not match the model file")
    return data

