"""
Bagged random forest over the CART trees in ``tree.py``.

Every tree draws its bootstrap sample and split candidates from its own
generator seeded by (forest seed, forest index, tree index), so results do
not depend on how trees are scheduled across workers.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

from ..utils.config import ForestConfig
from ..utils.errors import TrainingError
from .tree import DecisionTree, fit_tree

logger = logging.getLogger(__name__)


@dataclass
class RandomForest:
    trees: List[DecisionTree]
    n_classes: int
    n_trees: int
    features_per_split: int
    seed: int
    forest_index: int = 0
    degenerate: bool = False
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    n_features: int = 0

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Mean of the trees' leaf class distributions, shape (N, n_classes)."""
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            total += tree.predict_proba(X)
        return total / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Most probable class id (lowest id on ties)."""
        return np.argmax(self.predict_proba(X), axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_classes": self.n_classes,
            "n_trees": self.n_trees,
            "n_features": self.n_features,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "forest_index": self.forest_index,
            "degenerate": self.degenerate,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RandomForest":
        return cls(
            trees=[
                DecisionTree.from_dict(tree, data.get("max_depth"), data.get("min_samples_leaf", 1))
                for tree in data["trees"]
            ],
            n_classes=int(data["n_classes"]),
            n_trees=int(data["n_trees"]),
            features_per_split=int(data["features_per_split"]),
            seed=int(data["seed"]),
            forest_index=int(data.get("forest_index", 0)),
            degenerate=bool(data.get("degenerate", False)),
            max_depth=data.get("max_depth"),
            min_samples_leaf=int(data.get("min_samples_leaf", 1)),
            n_features=int(data.get("n_features", 0)),
        )


def default_features_per_split(n_features: int) -> int:
    return max(1, math.ceil(math.sqrt(n_features)))


def _fit_one_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    features_per_split: int,
    config: ForestConfig,
    forest_index: int,
    tree_index: int,
) -> DecisionTree:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, forest_index, tree_index]))
    rows = rng.integers(0, X.shape[0], size=X.shape[0])
    return fit_tree(
        X[rows],
        y[rows],
        n_classes,
        features_per_split,
        rng,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_samples_leaf,
    )


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    config: Optional[ForestConfig] = None,
    n_classes: Optional[int] = None,
    forest_index: int = 0,
    n_jobs: int = 1,
) -> RandomForest:
    """Fit a bagged random forest on integer class ids.

    Args:
        X: (N, F) feature matrix
        y: (N,) class ids in [0, n_classes)
        config: forest hyperparameters (defaults: 100 trees, ceil(sqrt(F)) features per split)
        n_classes: number of classes (defaults to max(y) + 1)
        forest_index: position of this forest within a multi-label model (seeding)
        n_jobs: joblib workers for tree fitting

    Returns:
        RandomForest; a single-class target yields a constant forest with
        ``degenerate=True``.

    Raises:
        TrainingError: fewer than 2 samples or bad label ids
    """
    config = config or ForestConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise TrainingError(f"Feature matrix {X.shape} and targets {y.shape} disagree")
    if X.shape[0] < 2:
        raise TrainingError("fit_forest needs at least 2 samples")
    n_classes = int(n_classes if n_classes is not None else y.max() + 1)
    if y.min() < 0 or y.max() >= n_classes:
        raise TrainingError("class ids out of range")

    features_per_split = config.features_per_split or default_features_per_split(X.shape[1])
    features_per_split = min(features_per_split, X.shape[1])

    present = np.unique(y)
    if present.size < 2:
        logger.warning(f"Forest {forest_index}: single class {int(present[0])} in training data, constant predictor")
        distribution = np.zeros(n_classes)
        distribution[present[0]] = 1.0
        trees = [DecisionTree.constant(distribution) for _ in range(config.n_trees)]
        degenerate = True
    else:
        trees = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_fit_one_tree)(X, y, n_classes, features_per_split, config, forest_index, t)
            for t in range(config.n_trees)
        )
        degenerate = False

    return RandomForest(
        trees=list(trees),
        n_classes=n_classes,
        n_trees=config.n_trees,
        features_per_split=features_per_split,
        seed=config.seed,
        forest_index=forest_index,
        degenerate=degenerate,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_samples_leaf,
        n_features=X.shape[1],
    )
