"""Tests for the value vocabulary, the message passing network and LaMP training."""

import numpy as np
import pytest
import torch

from conftest import make_dataset
from lib.dataset.core import Dataset
from lib.dataset.schema import LABEL_INDEX, N_LABELS
from lib.lamp.model import build_network, label_mask_matrix
from lib.lamp.training import fit_lamp
from lib.lamp.vocab import PAD_TOKEN, ValueVocab, build_vocab, encode, encode_matrix
from lib.models.io import load_model, save_model
from lib.utils.config import LampConfig
from lib.utils.errors import DataError, SchemaMismatchError, TrainingError

THREE_LABEL_MASK = np.array(
    [
        [True, True, False],
        [True, True, False],
        [False, False, True],
    ]
)


@pytest.fixture
def micro_config() -> LampConfig:
    return LampConfig(d_model=8, d_hidden=16, dropout=0.0, message_rounds=1, attention_heads=2, seed=1)


@pytest.fixture
def micro_network(micro_config):
    network = build_network(n_features=3, n_tokens=6, label_mask=THREE_LABEL_MASK, config=micro_config)
    return network.double().eval()


class TestVocab:
    def test_binary_values(self):
        data = make_dataset(np.array([[0.0, 1.0], [1.0, 1.0], [0.0, 0.0]]), [["Miner"]] * 3)
        vocab = build_vocab(data)
        assert len(vocab) == 2
        assert vocab.n_tokens == 4
        assert vocab.unknown_token == 3
        np.testing.assert_array_equal(vocab.lookup(np.array([0.0, 1.0, 0.5])), [1, 2, 3])

    def test_tokens_follow_ascending_values(self):
        vocab = ValueVocab(np.array([-2.0, 0.0, 3.5, 10.0]))
        tokens = vocab.lookup(np.array([[10.0, -2.0], [3.5, 99.0]]))
        np.testing.assert_array_equal(tokens, [[4, 1], [3, 5]])
        assert PAD_TOKEN not in tokens

    def test_encode_changes_only_the_edited_position(self, toy_dataset):
        vocab = build_vocab(toy_dataset)
        sample = toy_dataset.sample(0)
        tokens = encode(sample, vocab, toy_dataset.n_features)
        edited = sample.features.copy()
        edited[2] = 1234.5
        changed = encode_matrix(edited.reshape(1, -1), vocab)[0]
        assert np.nonzero(tokens != changed)[0].tolist() == [2]
        assert changed[2] == vocab.unknown_token

    def test_encode_rejects_wrong_width(self, toy_dataset):
        vocab = build_vocab(toy_dataset)
        with pytest.raises(SchemaMismatchError):
            encode(toy_dataset.sample(0), vocab, toy_dataset.n_features + 1)

    def test_unsorted_values_rejected(self):
        with pytest.raises(DataError):
            ValueVocab(np.array([2.0, 1.0]))


class TestNetwork:
    def test_label_mask_modes(self):
        adjacency = np.zeros((3, 3), dtype=bool)
        adjacency[0, 1] = adjacency[1, 0] = True
        np.testing.assert_array_equal(label_mask_matrix(adjacency, "prior"), THREE_LABEL_MASK)
        assert label_mask_matrix(adjacency, "full").all()
        np.testing.assert_array_equal(label_mask_matrix(adjacency, "none"), np.eye(3, dtype=bool))

    def test_rejects_asymmetric_mask(self, micro_config):
        mask = np.eye(3, dtype=bool)
        mask[0, 2] = True
        with pytest.raises(ValueError):
            build_network(3, 6, mask, micro_config)

    def test_gradients_match_finite_differences(self, micro_network):
        generator = torch.Generator().manual_seed(0)
        labels = torch.randn(2, 3, 8, dtype=torch.float64, generator=generator, requires_grad=True)
        inputs = torch.randn(2, 3, 8, dtype=torch.float64, generator=generator, requires_grad=True)

        def one_round(labels, inputs):
            updated, _ = micro_network.feature_round(0, labels, inputs)
            return micro_network.label_round(0, updated)[0]

        assert torch.autograd.gradcheck(one_round, (labels, inputs), eps=1e-6, atol=1e-5)

    def test_parameter_gradients_match_central_differences(self, micro_network):
        tokens = torch.tensor([[1, 2, 3], [5, 4, 1], [2, 2, 5]])
        targets = torch.tensor([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]], dtype=torch.float64)
        criterion = torch.nn.BCEWithLogitsLoss(reduction="sum")

        def loss() -> torch.Tensor:
            return criterion(micro_network.logits(tokens), targets)

        micro_network.zero_grad()
        loss().backward()
        rng = np.random.default_rng(0)
        eps = 1e-6
        for name, parameter in micro_network.named_parameters():
            flat = parameter.data.view(-1)
            analytic = parameter.grad.view(-1)
            for k in rng.choice(flat.numel(), size=min(3, flat.numel()), replace=False):
                original = flat[k].item()
                with torch.no_grad():
                    flat[k] = original + eps
                    upper = loss().item()
                    flat[k] = original - eps
                    lower = loss().item()
                    flat[k] = original
                numeric = (upper - lower) / (2 * eps)
                expected = analytic[k].item()
                assert abs(numeric - expected) <= 1e-4 * max(1.0, abs(numeric), abs(expected)), name

    def test_isolated_label_ignores_other_labels(self, micro_network):
        generator = torch.Generator().manual_seed(2)
        states = torch.randn(4, 3, 8, dtype=torch.float64, generator=generator)
        perturbed = states.clone()
        perturbed[:, :2] += torch.randn(4, 2, 8, dtype=torch.float64, generator=generator)
        with torch.no_grad():
            before, _ = micro_network.label_round(0, states)
            after, _ = micro_network.label_round(0, perturbed)
        torch.testing.assert_close(before[:, 2], after[:, 2], rtol=0.0, atol=1e-12)
        assert not torch.allclose(before[:, 0], after[:, 0])

    def test_attention_weights(self, micro_network):
        tokens = torch.tensor([[1, 2, 3], [5, 4, 1]])
        with torch.no_grad():
            proba, attention = micro_network(tokens, return_attention=True)
        assert len(attention) == 1
        feature_weights, label_weights = attention[0]
        assert feature_weights.shape == (2, 2, 3, 3)
        torch.testing.assert_close(feature_weights.sum(-1), torch.ones(2, 2, 3, dtype=torch.float64))
        torch.testing.assert_close(label_weights.sum(-1), torch.ones(2, 2, 3, dtype=torch.float64))
        blocked = torch.as_tensor(~THREE_LABEL_MASK)
        assert (label_weights[..., blocked] == 0).all()
        assert ((proba > 0) & (proba < 1)).all()

    def test_eval_mode_is_deterministic(self, micro_network):
        tokens = torch.tensor([[1, 1, 5], [2, 3, 4]])
        with torch.no_grad():
            assert torch.equal(micro_network(tokens), micro_network(tokens))

    def test_same_seed_same_parameters(self, micro_config):
        first = build_network(3, 6, THREE_LABEL_MASK, micro_config).state_dict()
        second = build_network(3, 6, THREE_LABEL_MASK, micro_config).state_dict()
        assert all(torch.equal(first[key], second[key]) for key in first)

    def test_wrong_token_shape(self, micro_network):
        with pytest.raises(ValueError):
            micro_network(torch.tensor([[1, 2]]))


class TestTraining:
    def test_learns_two_label_toy(self, two_label_dataset):
        config = LampConfig(
            d_model=16,
            d_hidden=32,
            dropout=0.0,
            learning_rate=5e-3,
            batch_size=50,
            epochs=300,
            message_rounds=1,
            attention_heads=2,
            seed=0,
        )
        epochs_seen = []
        model, history = fit_lamp(two_label_dataset, config, progress_callback=lambda e, n, loss: epochs_seen.append(e))
        assert len(history) == 300
        assert epochs_seen[-1] == 300
        assert history[-1] < history[0]
        tail = history[-11:]
        for earlier, later in zip(tail, tail[1:]):
            assert later <= earlier + 1e-3

        predicted = model.predict(two_label_dataset.features)
        np.testing.assert_array_equal(predicted, two_label_dataset.labels)
        d, r = LABEL_INDEX["Downloader"], LABEL_INDEX["Ransomware"]
        assert model.label_mask[d, r] and model.label_mask[r, d]
        assert not model.label_mask[d, LABEL_INDEX["Worm"]]

    def test_zero_epochs_keeps_initial_parameters(self, two_label_dataset, tiny_lamp_config):
        config = tiny_lamp_config
        config.epochs = 0
        model, history = fit_lamp(two_label_dataset, config)
        assert history == []
        vocab = build_vocab(two_label_dataset)
        fresh = build_network(two_label_dataset.n_features, vocab.n_tokens, model.label_mask, config).state_dict()
        trained = model.network.state_dict()
        assert all(torch.equal(fresh[key], trained[key]) for key in fresh)

    def test_training_is_reproducible(self, two_label_dataset, tiny_lamp_config):
        first, first_history = fit_lamp(two_label_dataset, tiny_lamp_config)
        second, second_history = fit_lamp(two_label_dataset, tiny_lamp_config)
        assert first_history == second_history
        np.testing.assert_array_equal(
            first.predict_proba(two_label_dataset.features), second.predict_proba(two_label_dataset.features)
        )

    def test_threshold_zero_predicts_every_label(self, two_label_dataset, tiny_lamp_config):
        model, _ = fit_lamp(two_label_dataset, tiny_lamp_config)
        assert model.predict(two_label_dataset.features, threshold=0.0).all()
        proba = model.predict_proba(two_label_dataset.features)
        assert proba.shape == (len(two_label_dataset), N_LABELS)

    def test_unseen_values_use_unknown_token(self, two_label_dataset, tiny_lamp_config):
        model, _ = fit_lamp(two_label_dataset, tiny_lamp_config)
        proba = model.predict_proba(np.array([[7.0, -3.0, 0.25]]))
        assert ((proba > 0) & (proba < 1)).all()

    def test_save_and_load_give_identical_predictions(self, tmp_path, two_label_dataset, tiny_lamp_config):
        model, _ = fit_lamp(two_label_dataset, tiny_lamp_config)
        path = save_model(model, tmp_path / "lamp.model")
        loaded = load_model(path)
        assert loaded.kind == "lamp"
        assert loaded.schema_hash == model.schema_hash
        np.testing.assert_array_equal(
            loaded.predict_proba(two_label_dataset.features), model.predict_proba(two_label_dataset.features)
        )

    def test_empty_training_set(self, tiny_lamp_config):
        with pytest.raises(TrainingError):
            fit_lamp(Dataset.from_samples([]), tiny_lamp_config)
