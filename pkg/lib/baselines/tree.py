"""
CART decision tree with Gini impurity, stored as flat node arrays.

Node ``i`` is a leaf when ``feature[i] == -1``; otherwise samples with
``x[feature[i]] <= threshold[i]`` go to ``left[i]``, the rest to ``right[i]``.
``value[i]`` holds the class distribution of the training samples that
reached the node.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

LEAF = -1


@dataclass
class DecisionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_classes(self) -> int:
        return int(self.value.shape[1])

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of X."""
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[nodes] != LEAF
        while active.any():
            idx = rows[active]
            current = nodes[idx]
            go_left = X[idx, self.feature[current]] <= self.threshold[current]
            nodes[idx] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[nodes] != LEAF
        return nodes

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], max_depth: Optional[int] = None, min_samples_leaf: int = 1) -> "DecisionTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=np.float64).reshape(len(data["feature"]), -1),
            max_depth=max_depth,
            min_samples_leaf=min_samples_leaf,
        )

    @classmethod
    def constant(cls, distribution: np.ndarray) -> "DecisionTree":
        """Single-leaf tree predicting ``distribution`` everywhere."""
        return cls(
            feature=np.array([LEAF], dtype=np.int64),
            threshold=np.zeros(1),
            left=np.array([LEAF], dtype=np.int64),
            right=np.array([LEAF], dtype=np.int64),
            value=np.asarray(distribution, dtype=np.float64).reshape(1, -1),
        )


def _gini_from_counts(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    proportions = counts / totals[..., None]
    return 1.0 - np.sum(proportions * proportions, axis=-1)


def best_split(
    X: np.ndarray,
    y_onehot: np.ndarray,
    candidates: np.ndarray,
    min_samples_leaf: int,
) -> Optional[Tuple[int, float, float]]:
    """Lowest weighted child Gini over all thresholds of the candidate features.

    Returns:
        (feature, threshold, weighted child impurity) or None when no candidate
        admits a split leaving ``min_samples_leaf`` samples on both sides.
    """
    n = X.shape[0]
    if n < 2 * min_samples_leaf:
        return None

    values = X[:, candidates]
    order = np.argsort(values, axis=0, kind="stable")
    sorted_values = np.take_along_axis(values, order, axis=0)
    left_counts = np.cumsum(y_onehot[order], axis=0)[:-1]  # (n-1, k, C)
    right_counts = y_onehot.sum(axis=0) - left_counts

    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    weighted = (
        n_left * _gini_from_counts(left_counts, np.broadcast_to(n_left, left_counts.shape[:2]))
        + n_right * _gini_from_counts(right_counts, np.broadcast_to(n_right, right_counts.shape[:2]))
    ) / n

    valid = sorted_values[1:] > sorted_values[:-1]
    valid &= (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    if not valid.any():
        return None

    weighted = np.where(valid, weighted, np.inf)
    position, column = np.unravel_index(int(np.argmin(weighted)), weighted.shape)
    low = sorted_values[position, column]
    high = sorted_values[position + 1, column]
    threshold = low + (high - low) / 2.0
    if threshold >= high:
        threshold = low
    return int(candidates[column]), float(threshold), float(weighted[position, column])


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    features_per_split: int,
    rng: np.random.Generator,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
) -> DecisionTree:
    """Grow an unpruned CART tree depth-first.

    At each node ``features_per_split`` candidate features are drawn without
    replacement; further features are drawn only when none of them admits a
    split.
    """
    n_features = X.shape[1]
    onehot = np.eye(n_classes)[y]

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[np.ndarray] = []

    def new_node(rows: np.ndarray) -> int:
        counts = onehot[rows].sum(axis=0)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(counts / counts.sum())
        return len(feature) - 1

    root_rows = np.arange(X.shape[0])
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if (max_depth is not None and depth >= max_depth) or np.count_nonzero(value[node]) <= 1:
            continue

        order = rng.permutation(n_features)
        split = None
        for start in range(0, n_features, features_per_split):
            split = best_split(X[rows], onehot[rows], order[start : start + features_per_split], min_samples_leaf)
            if split is not None:
                break
        if split is None:
            continue

        split_feature, split_threshold, _ = split
        goes_left = X[rows, split_feature] <= split_threshold
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        feature[node] = split_feature
        threshold[node] = split_threshold
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.vstack(value),
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )
