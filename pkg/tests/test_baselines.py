"""Tests for the random forest and the BR / CC / LP multi-label strategies."""

import numpy as np
import pytest

from lib.baselines.forest import fit_forest
from lib.baselines.multilabel import combination_set, fit_br, fit_cc, fit_lp
from lib.baselines.tree import LEAF, best_split, fit_tree
from lib.dataset.core import Dataset, label_combinations
from lib.dataset.schema import LABEL_INDEX, N_LABELS
from lib.utils.config import ForestConfig
from lib.utils.errors import SchemaMismatchError, TrainingError


def _separable(n: int = 10):
    X = np.concatenate([np.arange(n), 100 + np.arange(n)]).astype(np.float64).reshape(-1, 1)
    y = np.array([0] * n + [1] * n)
    return X, y


class TestTree:
    def test_best_split_picks_the_clean_threshold(self):
        X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 6.0], [4.0, 6.0]])
        onehot = np.eye(2)[[0, 0, 1, 1]]
        feature, threshold, impurity = best_split(X, onehot, np.array([0]), min_samples_leaf=1)
        assert feature == 0
        assert threshold == pytest.approx(2.5)
        assert impurity == pytest.approx(0.0)

    def test_no_split_on_constant_feature(self):
        X = np.ones((4, 1))
        onehot = np.eye(2)[[0, 1, 0, 1]]
        assert best_split(X, onehot, np.array([0]), min_samples_leaf=1) is None

    def test_leaves_are_normalized_and_depth_respected(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(80, 3))
        y = (X[:, 0] + 0.3 * rng.normal(size=80) > 0).astype(np.int64)
        tree = fit_tree(X, y, 2, features_per_split=2, rng=np.random.default_rng(1), max_depth=3)
        assert tree.depth() <= 3
        np.testing.assert_allclose(tree.value.sum(axis=1), 1.0)
        leaves = tree.apply(X)
        assert (tree.feature[leaves] == LEAF).all()


class TestForest:
    def test_separable_feature_is_learned(self):
        X, y = _separable()
        forest = fit_forest(X, y, ForestConfig(n_trees=15, seed=2))
        np.testing.assert_array_equal(forest.predict(X), y)
        assert not forest.degenerate

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(40, 5))
        y = rng.integers(0, 3, size=40)
        forest = fit_forest(X, y, ForestConfig(n_trees=7, seed=1), n_classes=3)
        proba = forest.predict_proba(rng.normal(size=(25, 5)))
        assert proba.shape == (25, 3)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0)

    def test_prediction_is_the_mean_of_tree_leaves(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(50, 4))
        y = (X[:, 1] > 0).astype(np.int64)
        forest = fit_forest(X, y, ForestConfig(n_trees=9, seed=4))
        queries = rng.normal(size=(100, 4))
        expected = np.zeros((100, 2))
        for tree in forest.trees:
            for i, row in enumerate(queries):
                node = 0
                while tree.feature[node] != LEAF:
                    node = tree.left[node] if row[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
                expected[i] += tree.value[node]
        np.testing.assert_allclose(forest.predict_proba(queries), expected / len(forest.trees))

    def test_single_class_gives_constant_forest(self):
        X = np.random.default_rng(0).normal(size=(12, 3))
        forest = fit_forest(X, np.zeros(12, dtype=np.int64), ForestConfig(n_trees=4), n_classes=2)
        assert forest.degenerate
        np.testing.assert_array_equal(forest.predict_proba(X), np.tile([1.0, 0.0], (12, 1)))

    def test_same_seed_same_forest(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 4))
        y = rng.integers(0, 2, size=30)
        config = ForestConfig(n_trees=6, seed=9)
        first = fit_forest(X, y, config)
        assert fit_forest(X, y, config).to_dict() == first.to_dict()
        assert fit_forest(X, y, config, n_jobs=2).to_dict() == first.to_dict()
        assert fit_forest(X, y, ForestConfig(n_trees=6, seed=10)).to_dict() != first.to_dict()

    def test_rejects_tiny_or_inconsistent_input(self):
        with pytest.raises(TrainingError):
            fit_forest(np.zeros((1, 2)), np.zeros(1, dtype=np.int64))
        with pytest.raises(TrainingError):
            fit_forest(np.zeros((4, 2)), np.zeros(3, dtype=np.int64))
        with pytest.raises(TrainingError):
            fit_forest(np.zeros((4, 2)), np.array([0, 1, 2, 1]), n_classes=2)


class TestBinaryRelevance:
    def test_fits_one_forest_per_label(self, toy_dataset, small_forest_config):
        calls = []
        model = fit_br(toy_dataset, small_forest_config, progress_callback=lambda done, total: calls.append(done))
        assert len(model.forests) == N_LABELS
        assert calls == list(range(1, N_LABELS + 1))
        assert model.forests[LABEL_INDEX["Worm"]].degenerate

        predicted = model.predict(toy_dataset.features)
        np.testing.assert_array_equal(predicted, toy_dataset.labels)
        assert model.predict_proba(toy_dataset.features)[:, LABEL_INDEX["Worm"]].max() == 0.0

    def test_label_columns_are_independent(self, toy_dataset, small_forest_config):
        changed = toy_dataset.labels.copy()
        changed[:, LABEL_INDEX["Ransomware"]] = ~changed[:, LABEL_INDEX["Ransomware"]]
        flipped = Dataset(
            toy_dataset.features, changed, toy_dataset.source_ids, toy_dataset.schema, toy_dataset.name
        )
        original = fit_br(toy_dataset, small_forest_config)
        other = fit_br(flipped, small_forest_config)
        d = LABEL_INDEX["Downloader"]
        assert original.forests[d].to_dict() == other.forests[d].to_dict()

    def test_wrong_column_count(self, toy_dataset, small_forest_config):
        model = fit_br(toy_dataset, small_forest_config)
        with pytest.raises(SchemaMismatchError):
            model.predict_proba(np.zeros((2, 3)))


class TestClassifierChain:
    def test_chain_sees_earlier_labels(self, toy_dataset, small_forest_config):
        model = fit_cc(toy_dataset, small_forest_config)
        assert model.order == list(range(N_LABELS))
        for position, forest in enumerate(model.forests):
            assert forest.n_features == toy_dataset.n_features + position

    def test_learns_toy_labels(self, toy_dataset, small_forest_config):
        model = fit_cc(toy_dataset, small_forest_config)
        np.testing.assert_array_equal(model.predict(toy_dataset.features), toy_dataset.labels)
        proba = model.predict_proba(toy_dataset.features)
        assert proba.shape == (len(toy_dataset), N_LABELS)
        assert ((proba >= 0) & (proba <= 1)).all()


class TestLabelPowerset:
    def test_predictions_are_training_combinations(self, toy_dataset, small_forest_config):
        model = fit_lp(toy_dataset, small_forest_config)
        combos = set(label_combinations(toy_dataset))
        assert model.n_combinations == len(combos)
        assert set(combination_set(model)) == combos
        assert model.forest.n_classes == len(combos)

        queries = np.random.default_rng(3).uniform(0, 10, size=(50, toy_dataset.n_features))
        training_rows = {tuple(row) for row in toy_dataset.labels.tolist()}
        for row in model.predict(queries).tolist():
            assert tuple(row) in training_rows

    def test_marginals_are_combination_sums(self, toy_dataset, small_forest_config):
        model = fit_lp(toy_dataset, small_forest_config)
        X = toy_dataset.features[:5]
        expected = model.combination_proba(X) @ model.combinations.astype(np.float64)
        np.testing.assert_allclose(model.predict_proba(X), expected)
        np.testing.assert_array_equal(model.predict(toy_dataset.features), toy_dataset.labels)


@pytest.mark.parametrize("fit", [fit_br, fit_cc, fit_lp])
def test_empty_training_set_rejected(fit):
    empty = Dataset.from_samples([])
    with pytest.raises(TrainingError):
        fit(empty, ForestConfig(n_trees=2))
