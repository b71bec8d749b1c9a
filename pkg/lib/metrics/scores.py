"""
Multi-label evaluation metrics over aligned truth/prediction matrices.

Ratios with a zero denominator are defined as 0 and carry ``degenerate=True``.
"""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from ..dataset.schema import LABELS

logger = logging.getLogger(__name__)


class Ratio(NamedTuple):
    value: float
    degenerate: bool = False


def ratio(numerator: int, denominator: int) -> Ratio:
    if denominator == 0:
        return Ratio(0.0, True)
    return Ratio(numerator / denominator, False)


@dataclass(frozen=True)
class PredictionBatch:
    """Aligned boolean truth and prediction matrices, shape (N, L)."""

    y_true: np.ndarray
    y_pred: np.ndarray

    def __post_init__(self):
        y_true = np.asarray(self.y_true, dtype=bool)
        y_pred = np.asarray(self.y_pred, dtype=bool)
        if y_true.ndim != 2 or y_true.shape != y_pred.shape:
            raise ValueError(f"y_true {y_true.shape} and y_pred {y_pred.shape} must be equal 2-D shapes")
        if y_true.shape[0] == 0:
            raise ValueError("a prediction batch needs at least one row")
        object.__setattr__(self, "y_true", y_true)
        object.__setattr__(self, "y_pred", y_pred)

    @property
    def n_samples(self) -> int:
        return self.y_true.shape[0]

    @property
    def n_labels(self) -> int:
        return self.y_true.shape[1]

    def true_positives(self) -> np.ndarray:
        return np.sum(self.y_true & self.y_pred, axis=0)

    def false_positives(self) -> np.ndarray:
        return np.sum(~self.y_true & self.y_pred, axis=0)

    def false_negatives(self) -> np.ndarray:
        return np.sum(self.y_true & ~self.y_pred, axis=0)


def micro_precision(batch: PredictionBatch) -> Ratio:
    tp = int(batch.true_positives().sum())
    result = ratio(tp, tp + int(batch.false_positives().sum()))
    if result.degenerate:
        logger.warning("micro precision: no positive predictions, reporting 0")
    return result


def micro_recall(batch: PredictionBatch) -> Ratio:
    tp = int(batch.true_positives().sum())
    result = ratio(tp, tp + int(batch.false_negatives().sum()))
    if result.degenerate:
        logger.warning("micro recall: no positive labels, reporting 0")
    return result


def hamming_loss(batch: PredictionBatch) -> float:
    """Fraction of label bits predicted incorrectly."""
    wrong = int(np.count_nonzero(batch.y_true ^ batch.y_pred))
    return wrong / (batch.n_samples * batch.n_labels)


def elementwise_accuracy(batch: PredictionBatch) -> float:
    return 1.0 - hamming_loss(batch)


def subset_accuracy(batch: PredictionBatch) -> float:
    """Fraction of rows whose whole label set is predicted exactly."""
    exact = np.all(batch.y_true == batch.y_pred, axis=1)
    return int(exact.sum()) / batch.n_samples


@dataclass(frozen=True)
class ClassScore:
    label: str
    precision: Ratio
    recall: Ratio
    support: int


def classwise_pr(batch: PredictionBatch, labels: Optional[Sequence[str]] = None) -> List[ClassScore]:
    """Per-label precision and recall, in column order."""
    if labels is None:
        labels = LABELS if batch.n_labels == len(LABELS) else [str(i) for i in range(batch.n_labels)]
    tp = batch.true_positives()
    fp = batch.false_positives()
    fn = batch.false_negatives()
    scores = []
    for i, label in enumerate(labels):
        scores.append(
            ClassScore(
                label=label,
                precision=ratio(int(tp[i]), int(tp[i] + fp[i])),
                recall=ratio(int(tp[i]), int(tp[i] + fn[i])),
                support=int(tp[i] + fn[i]),
            )
        )
    flagged = [score.label for score in scores if score.precision.degenerate or score.recall.degenerate]
    if flagged:
        logger.warning(f"Zero denominators (reported as 0) for: {', '.join(flagged)}")
    return scores
