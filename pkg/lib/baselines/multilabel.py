"""
Multi-label strategies over the random forest base learner.

- Binary Relevance: one independent forest per label.
- Classifier Chains: forests in canonical label order; forest k sees the
  features plus labels 0..k-1 (true bits while training, its own thresholded
  predictions at inference).
- Label Powerset: every distinct training label set is one class of a single
  multiclass forest; predictions are always a training combination.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..dataset.core import Dataset
from ..dataset.schema import N_LABELS, LabelSet
from ..models.base import MultiLabelModel
from ..utils.config import ForestConfig
from ..utils.errors import TrainingError
from .forest import RandomForest, fit_forest

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]


def _positive_column(forest: RandomForest, X: np.ndarray) -> np.ndarray:
    return forest.predict_proba(X)[:, 1]


class BinaryRelevance(MultiLabelModel):
    kind = "br"

    def __init__(self, feature_names: Sequence[str], forests: List[RandomForest], threshold: float = 0.5):
        super().__init__(feature_names, threshold)
        self.forests = forests

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self.check_features(X)
        return np.column_stack([_positive_column(forest, X) for forest in self.forests])


class ClassifierChain(MultiLabelModel):
    kind = "cc"

    def __init__(
        self,
        feature_names: Sequence[str],
        forests: List[RandomForest],
        order: Optional[Sequence[int]] = None,
        threshold: float = 0.5,
    ):
        super().__init__(feature_names, threshold)
        self.forests = forests
        self.order = list(order) if order is not None else list(range(N_LABELS))

    def _run_chain(self, X: np.ndarray, threshold: float) -> Tuple[np.ndarray, np.ndarray]:
        X = self.check_features(X)
        proba = np.zeros((X.shape[0], N_LABELS))
        predicted = np.zeros((X.shape[0], N_LABELS), dtype=bool)
        augmented = X
        for position, label in enumerate(self.order):
            proba[:, label] = _positive_column(self.forests[position], augmented)
            predicted[:, label] = proba[:, label] >= threshold
            augmented = np.hstack([augmented, predicted[:, label : label + 1].astype(np.float64)])
        return proba, predicted

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Per-label probabilities along the chain, conditioned on earlier predictions."""
        return self._run_chain(X, self.threshold)[0]

    def predict(self, X: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
        return self._run_chain(X, self.threshold if threshold is None else threshold)[1]


class LabelPowerset(MultiLabelModel):
    kind = "lp"

    def __init__(
        self,
        feature_names: Sequence[str],
        forest: RandomForest,
        combinations: np.ndarray,
        threshold: float = 0.5,
    ):
        super().__init__(feature_names, threshold)
        self.forest = forest
        self.combinations = np.asarray(combinations, dtype=bool).reshape(-1, N_LABELS)

    @property
    def n_combinations(self) -> int:
        return self.combinations.shape[0]

    def combination_proba(self, X: np.ndarray) -> np.ndarray:
        return self.forest.predict_proba(self.check_features(X))

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Per-label marginals: summed probability of the combinations containing the label."""
        return self.combination_proba(X) @ self.combinations.astype(np.float64)

    def predict(self, X: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
        """Label set of the most probable combination (lowest class id on ties)."""
        return self.combinations[np.argmax(self.combination_proba(X), axis=1)]


def _check_train(train: Dataset) -> None:
    if len(train) == 0:
        raise TrainingError("training set is empty")


def fit_br(
    train: Dataset,
    config: Optional[ForestConfig] = None,
    n_jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> BinaryRelevance:
    """One forest per label on (features, label bit)."""
    config = config or ForestConfig()
    _check_train(train)
    forests = []
    for label in range(N_LABELS):
        forests.append(
            fit_forest(train.features, train.labels[:, label].astype(np.int64), config, n_classes=2, forest_index=label, n_jobs=n_jobs)
        )
        if progress_callback:
            progress_callback(label + 1, N_LABELS)
    return BinaryRelevance(train.schema.names, forests, config.threshold)


def fit_cc(
    train: Dataset,
    config: Optional[ForestConfig] = None,
    n_jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> ClassifierChain:
    """Chain in canonical order, augmenting with the true bits of earlier labels."""
    config = config or ForestConfig()
    _check_train(train)
    forests = []
    truth = train.labels.astype(np.float64)
    for label in range(N_LABELS):
        augmented = np.hstack([train.features, truth[:, :label]])
        forests.append(
            fit_forest(augmented, train.labels[:, label].astype(np.int64), config, n_classes=2, forest_index=label, n_jobs=n_jobs)
        )
        if progress_callback:
            progress_callback(label + 1, N_LABELS)
    return ClassifierChain(train.schema.names, forests, list(range(N_LABELS)), config.threshold)


def fit_lp(
    train: Dataset,
    config: Optional[ForestConfig] = None,
    n_jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> LabelPowerset:
    """Multiclass forest over the distinct training label sets (ids in sorted bit order)."""
    config = config or ForestConfig()
    _check_train(train)
    combinations, class_ids = np.unique(train.labels, axis=0, return_inverse=True)
    class_ids = np.asarray(class_ids).reshape(-1)
    logger.info(f"Label powerset: {combinations.shape[0]} distinct label combinations")
    forest = fit_forest(train.features, class_ids, config, n_classes=combinations.shape[0], forest_index=0, n_jobs=n_jobs)
    if progress_callback:
        progress_callback(1, 1)
    return LabelPowerset(train.schema.names, forest, combinations, config.threshold)


def combination_set(model: LabelPowerset) -> List[LabelSet]:
    return [LabelSet.from_bits(row) for row in model.combinations]
