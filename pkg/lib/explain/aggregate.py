"""
Global feature importance: mean absolute attribution per label and feature.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..dataset.schema import LABELS
from .shapley import ExplanationSet


@dataclass
class GlobalImportance:
    values: np.ndarray  # (L, F), all >= 0
    labels: List[int]
    feature_names: List[str]

    def for_label(self, label: int) -> np.ndarray:
        return self.values[self.labels.index(label)]

    def ranking(self, label: int) -> np.ndarray:
        """Feature positions by decreasing importance (column order on ties)."""
        return np.argsort(-self.for_label(label), kind="stable")

    def top_k(self, label: int, k: int) -> List[Tuple[str, float]]:
        row = self.for_label(label)
        return [(self.feature_names[pos], float(row[pos])) for pos in self.ranking(label)[:k]]

    def rank_of(self, label: int, feature_name: str) -> int:
        """1-based rank of a feature for a label."""
        position = self.feature_names.index(feature_name)
        return int(np.nonzero(self.ranking(label) == position)[0][0]) + 1

    def label_name(self, label: int) -> str:
        return LABELS[label]


def global_importance(explanations: ExplanationSet) -> GlobalImportance:
    return GlobalImportance(
        values=np.abs(explanations.phi).mean(axis=0),
        labels=list(explanations.labels),
        feature_names=list(explanations.feature_names),
    )
