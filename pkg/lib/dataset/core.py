"""
Canonical data model for classifier instances and the dataset operations the
rest of the pipeline consumes: splitting, zero-variance removal, label graph
construction, class distribution and label filtering.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import DataError, SchemaMismatchError
from .schema import LABELS, N_LABELS, FeatureSchema, LabelSet, canonical_schema

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceSample:
    """One classifier instance: feature vector, label set and capture identifier."""

    features: np.ndarray
    labels: LabelSet
    source_id: str = ""


@dataclass(frozen=True)
class LabelGraph:
    """Symmetric label co-occurrence adjacency with a false diagonal."""

    adjacency: np.ndarray

    def __post_init__(self):
        adjacency = np.asarray(self.adjacency, dtype=bool)
        if adjacency.shape != (N_LABELS, N_LABELS):
            raise ValueError(f"adjacency must be {N_LABELS}x{N_LABELS}")
        if not np.array_equal(adjacency, adjacency.T) or adjacency.diagonal().any():
            raise ValueError("adjacency must be symmetric with a false diagonal")
        adjacency.setflags(write=False)
        object.__setattr__(self, "adjacency", adjacency)

    @property
    def edges(self) -> List[Tuple[str, str]]:
        rows, cols = np.nonzero(np.triu(self.adjacency))
        return [(LABELS[i], LABELS[j]) for i, j in zip(rows, cols)]

    def isolated(self) -> List[str]:
        return [LABELS[i] for i in range(N_LABELS) if not self.adjacency[i].any()]

    def message_mask(self) -> np.ndarray:
        """Adjacency with self edges switched on (label-to-label attention mask)."""
        return self.adjacency | np.eye(N_LABELS, dtype=bool)


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus multi-label targets.

    Attributes:
        features: (N, F) float64 matrix, columns ordered as ``schema``
        labels: (N, 10) boolean matrix in canonical label order
        source_ids: N capture identifiers (may be empty strings)
        schema: feature schema describing the columns
        name: dataset name used in reports
    """

    features: np.ndarray
    labels: np.ndarray
    source_ids: Tuple[str, ...] = ()
    schema: FeatureSchema = field(default_factory=canonical_schema)
    name: str = "dataset"

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=bool, copy=True)
        if features.ndim != 2:
            features = features.reshape(-1, len(self.schema))
        if labels.ndim != 2:
            labels = labels.reshape(-1, N_LABELS)
        n = features.shape[0]
        if features.shape[1] != len(self.schema):
            raise DataError(
                f"Feature matrix has {features.shape[1]} columns, schema has {len(self.schema)}"
            )
        if labels.shape != (n, N_LABELS):
            raise DataError(f"Label matrix shape {labels.shape} does not match {n} samples")
        if not np.isfinite(features).all():
            row = int(np.nonzero(~np.isfinite(features).all(axis=1))[0][0])
            raise DataError("non-finite feature value", row=row)
        source_ids = tuple(self.source_ids) if self.source_ids else ("",) * n
        if len(source_ids) != n:
            raise DataError(f"Expected {n} source ids, got {len(source_ids)}")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "source_ids", source_ids)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def samples(self) -> List[TraceSample]:
        return list(iter(self))

    def __iter__(self) -> Iterator[TraceSample]:
        for i in range(len(self)):
            yield self.sample(i)

    def sample(self, i: int) -> TraceSample:
        return TraceSample(self.features[i], LabelSet.from_bits(self.labels[i]), self.source_ids[i])

    def take(self, rows: Sequence[int], name: Optional[str] = None) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            features=self.features[rows],
            labels=self.labels[rows],
            source_ids=tuple(self.source_ids[i] for i in rows),
            schema=self.schema,
            name=name or self.name,
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        """Same samples and labels with a replaced feature matrix."""
        return Dataset(features, self.labels, self.source_ids, self.schema, self.name)

    def column(self, index: int) -> np.ndarray:
        """Values of an original feature index."""
        return self.features[:, self.schema.position(index)]

    @classmethod
    def from_samples(
        cls,
        samples: Sequence[TraceSample],
        schema: Optional[FeatureSchema] = None,
        name: str = "dataset",
    ) -> "Dataset":
        schema = schema or canonical_schema()
        if not samples:
            return cls(np.zeros((0, len(schema))), np.zeros((0, N_LABELS), dtype=bool), (), schema, name)
        return cls(
            features=np.vstack([np.asarray(s.features, dtype=np.float64) for s in samples]),
            labels=np.vstack([s.labels.to_array() for s in samples]),
            source_ids=tuple(s.source_id for s in samples),
            schema=schema,
            name=name,
        )


def split(data: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Deterministic shuffle by seed, then prefix (train) / suffix (test) split."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(data) < 2:
        raise DataError("split needs at least 2 samples")

    order = np.random.default_rng(seed).permutation(len(data))
    n_train = math.floor(train_fraction * len(data))
    train = data.take(order[:n_train], name=f"{data.name}-train")
    test = data.take(order[n_train:], name=f"{data.name}-test")
    logger.debug(f"Split {len(data)} samples into {len(train)} train / {len(test)} test")
    return train, test


def drop_zero_variance(data: Dataset, constant: bool = False) -> Tuple[Dataset, List[int]]:
    """Remove features that are zero for every sample.

    Args:
        data: non-empty dataset
        constant: also remove columns holding any other single repeated value

    Returns:
        (reduced dataset, removed original feature indices ascending)
    """
    if len(data) == 0:
        raise DataError("drop_zero_variance needs a non-empty dataset")

    if constant:
        removable = np.all(data.features == data.features[0], axis=0)
    else:
        removable = np.all(data.features == 0.0, axis=0)
    keep = np.nonzero(~removable)[0]
    removed = sorted(data.schema.entries[pos].index for pos in np.nonzero(removable)[0])
    reduced = Dataset(
        features=data.features[:, keep],
        labels=data.labels,
        source_ids=data.source_ids,
        schema=data.schema.subset(keep),
        name=data.name,
    )
    logger.info(f"Removed {len(removed)} zero-variance features, {reduced.n_features} remain")
    return reduced, removed


def project(data: Dataset, feature_names: Sequence[str]) -> Dataset:
    """Select columns by name (names must be in schema order)."""
    positions = {name: pos for pos, name in enumerate(data.schema.names)}
    missing = [name for name in feature_names if name not in positions]
    if missing:
        raise SchemaMismatchError(
            f"Data lacks {len(missing)} feature column(s) required by the model, e.g. {missing[0]}"
        )
    keep = [positions[name] for name in feature_names]
    return Dataset(
        features=data.features[:, keep],
        labels=data.labels,
        source_ids=data.source_ids,
        schema=data.schema.subset(keep),
        name=data.name,
    )


def cooccurrence_graph(data: Dataset) -> LabelGraph:
    """Edge (i, j) iff some sample carries both labels i and j."""
    if len(data) == 0:
        raise DataError("cooccurrence_graph needs a non-empty dataset")
    counts = data.labels.astype(np.int64).T @ data.labels.astype(np.int64)
    adjacency = counts > 0
    np.fill_diagonal(adjacency, False)
    return LabelGraph(adjacency)


def class_distribution(data: Dataset) -> Dict[str, int]:
    """Number of samples carrying each label, in canonical order."""
    counts = data.labels.sum(axis=0)
    return {name: int(counts[i]) for i, name in enumerate(LABELS)}


def label_combinations(data: Dataset) -> Dict[LabelSet, int]:
    """Distinct label sets and how often each occurs."""
    counter = Counter(tuple(row) for row in data.labels.tolist())
    return {LabelSet.from_bits(bits): count for bits, count in sorted(counter.items(), reverse=True)}


def filter_to_labels(data: Dataset, keep: LabelSet) -> Dataset:
    """Project every label set onto ``keep``; drop samples whose projection is empty."""
    keep_bits = keep.to_array()
    if not keep_bits.any():
        raise ValueError("keep must contain at least one label")

    projected = data.labels & keep_bits
    rows = np.nonzero(projected.any(axis=1))[0]
    dropped = len(data) - len(rows)
    if dropped:
        logger.info(f"Dropped {dropped} samples with no label in {keep}")
    return Dataset(
        features=data.features[rows],
        labels=projected[rows],
        source_ids=tuple(data.source_ids[i] for i in rows),
        schema=data.schema,
        name=data.name,
    )
