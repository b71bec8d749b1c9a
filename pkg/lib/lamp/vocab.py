"""
Global value vocabulary: every distinct raw feature value in the fitting data
becomes one token, shared across feature positions.

Token ids: 0 is padding, 1..V follow ascending value order, V+1 is the
unknown-value token.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..dataset.core import Dataset, TraceSample
from ..utils.errors import DataError, SchemaMismatchError

logger = logging.getLogger(__name__)

PAD_TOKEN = 0


@dataclass(frozen=True)
class ValueVocab:
    values: np.ndarray  # sorted distinct values; token id = position + 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size and np.any(values[1:] <= values[:-1]):
            raise DataError("vocabulary values must be strictly ascending")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def unknown_token(self) -> int:
        return len(self) + 1

    @property
    def n_tokens(self) -> int:
        """Embedding table size including padding and unknown."""
        return len(self) + 2

    def lookup(self, values: np.ndarray) -> np.ndarray:
        """Token ids for an array of raw values (any shape)."""
        values = np.asarray(values, dtype=np.float64)
        if len(self) == 0:
            return np.full(values.shape, self.unknown_token, dtype=np.int64)
        positions = np.searchsorted(self.values, values)
        clipped = np.minimum(positions, len(self) - 1)
        known = self.values[clipped] == values
        return np.where(known, clipped + 1, self.unknown_token).astype(np.int64)


def build_vocab(train: Dataset) -> ValueVocab:
    """One token per globally distinct value across all features, ascending."""
    if len(train) == 0:
        raise DataError("cannot build a vocabulary from an empty dataset")
    vocab = ValueVocab(np.unique(train.features))
    logger.info(f"Vocabulary: {len(vocab)} distinct feature values")
    return vocab


def encode(sample: TraceSample, vocab: ValueVocab, n_features: int) -> np.ndarray:
    """Token sequence of length F for one sample."""
    features = np.asarray(sample.features, dtype=np.float64).ravel()
    if features.size != n_features:
        raise SchemaMismatchError(f"sample has {features.size} features, vocabulary fitted on {n_features}")
    return vocab.lookup(features)


def encode_matrix(X: np.ndarray, vocab: ValueVocab) -> np.ndarray:
    """Token matrix (N, F) for a feature matrix; logs the unknown-token rate."""
    tokens = vocab.lookup(X)
    if tokens.size:
        unknown = float(np.mean(tokens == vocab.unknown_token))
        if unknown > 0:
            logger.debug(f"{unknown:.1%} of feature values map to the unknown token")
    return tokens
