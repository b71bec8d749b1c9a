"""
Training loop and classifier wrapper for the label message passing network.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..dataset.core import Dataset, cooccurrence_graph
from ..models.base import MultiLabelModel
from ..utils.config import LampConfig
from ..utils.errors import TrainingError
from .model import LabelMessagePassing, build_network, label_mask_matrix
from .vocab import ValueVocab, build_vocab, encode_matrix

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, float], None]

INFERENCE_BATCH_SIZE = 256


class LampClassifier(MultiLabelModel):
    """Value vocabulary plus network behind the common classifier interface."""

    kind = "lamp"

    def __init__(
        self,
        feature_names: Sequence[str],
        vocab: ValueVocab,
        network: LabelMessagePassing,
        config: LampConfig,
        label_mask: np.ndarray,
    ):
        super().__init__(feature_names, config.threshold)
        self.vocab = vocab
        self.network = network
        self.config = config
        self.label_mask = np.asarray(label_mask, dtype=bool)
        self.network.eval()

    def tokens(self, X: np.ndarray) -> torch.Tensor:
        return torch.as_tensor(encode_matrix(self.check_features(X), self.vocab))

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        tokens = self.tokens(X)
        self.network.eval()
        chunks: List[np.ndarray] = []
        with torch.no_grad():
            for start in range(0, tokens.shape[0], INFERENCE_BATCH_SIZE):
                chunks.append(self.network(tokens[start : start + INFERENCE_BATCH_SIZE]).double().numpy())
        if not chunks:
            return np.zeros((0, self.network.n_labels))
        return np.vstack(chunks)


def train(
    network: LabelMessagePassing,
    train_data: Dataset,
    vocab: ValueVocab,
    config: LampConfig,
    threads: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> Tuple[LabelMessagePassing, List[float]]:
    """Mini-batch Adam on per-label binary cross-entropy.

    The batch loss sums BCE over the labels and averages over the samples.
    Shuffling uses a dedicated generator and dropout the global stream, both
    seeded from ``config.seed``.

    Args:
        network: freshly built (or partially trained) network
        train_data: training set the vocabulary was built from
        vocab: value vocabulary
        config: hyperparameters
        threads: torch intra-op threads
        progress_callback: called as (epoch, epochs, mean epoch loss)

    Returns:
        (network in eval mode, per-epoch mean loss history)

    Raises:
        TrainingError: empty training set
    """
    if len(train_data) == 0:
        raise TrainingError("training set is empty")

    torch.set_num_threads(max(1, threads))
    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)

    tokens = torch.as_tensor(encode_matrix(train_data.features, vocab))
    targets = torch.as_tensor(train_data.labels, dtype=torch.float32)
    optimizer = torch.optim.Adam(network.parameters(), lr=config.learning_rate)
    criterion = nn.BCEWithLogitsLoss(reduction="none")

    history: List[float] = []
    n_samples = tokens.shape[0]
    for epoch in range(config.epochs):
        network.train()
        order = torch.randperm(n_samples, generator=generator)
        total = 0.0
        for start in range(0, n_samples, config.batch_size):
            batch = order[start : start + config.batch_size]
            optimizer.zero_grad()
            loss = criterion(network.logits(tokens[batch]), targets[batch]).sum(dim=1).mean()
            loss.backward()
            optimizer.step()
            total += loss.item() * batch.shape[0]
        epoch_loss = total / n_samples
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"loss diverged at epoch {epoch + 1}")
        history.append(epoch_loss)
        logger.debug(f"Epoch {epoch + 1}/{config.epochs}: loss {epoch_loss:.6f}")
        if progress_callback:
            progress_callback(epoch + 1, config.epochs, epoch_loss)

    network.eval()
    return network, history


def fit_lamp(
    train_data: Dataset,
    config: Optional[LampConfig] = None,
    threads: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> Tuple[LampClassifier, List[float]]:
    """Build vocabulary and label mask from ``train_data``, then train."""
    config = config or LampConfig()
    if len(train_data) == 0:
        raise TrainingError("training set is empty")

    vocab = build_vocab(train_data)
    graph = cooccurrence_graph(train_data)
    mask = label_mask_matrix(graph.adjacency, config.label_mask)
    isolated = graph.isolated()
    if config.label_mask == "prior" and isolated:
        logger.info(f"Labels without co-occurrence edges: {', '.join(isolated)}")

    network = build_network(train_data.n_features, vocab.n_tokens, mask, config)
    logger.info(
        f"Training LaMP: {len(train_data)} samples, {train_data.n_features} features, "
        f"{vocab.n_tokens} tokens, mask={config.label_mask}, epochs={config.epochs}"
    )
    network, history = train(network, train_data, vocab, config, threads, progress_callback)
    return LampClassifier(train_data.schema.names, vocab, network, config, mask), history
