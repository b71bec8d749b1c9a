"""
Shapley value attribution for any multi-label classifier.

A coalition S is valued interventionally: features in S come from the sample,
the rest from each background row in turn, and the model's probability for
one label is averaged over the background. Exact attributions enumerate all
2^F coalitions; sampled attributions average marginal contributions along
random feature permutations.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.special import comb

from ..dataset.core import Dataset
from ..models.base import MultiLabelModel
from ..utils.errors import DataError, ExplainError

logger = logging.getLogger(__name__)

MAX_EXACT_FEATURES = 20
RESIDUAL_TOLERANCE = 1e-9

# Upper bound on hybrid rows handed to one predict_proba call.
CHUNK_ROWS = 65536


@dataclass(frozen=True)
class BackgroundSet:
    """Reference rows used to fill features outside a coalition."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64, copy=True)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ExplainError("background set needs at least one row")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]


@dataclass
class Attribution:
    """Per-feature attributions for one (sample, label) pair."""

    phi: np.ndarray
    base_value: float
    model_output: float
    label: int
    sample_index: int = 0
    estimator: str = "exact"
    residual: float = 0.0  # output - base - sum(phi) before any correction

    @property
    def local_accuracy_gap(self) -> float:
        return abs(self.base_value + float(np.sum(self.phi)) - self.model_output)


def draw_background(data: Dataset, size: int, seed: int) -> BackgroundSet:
    """Sample ``size`` training rows without replacement."""
    if len(data) == 0:
        raise DataError("cannot draw a background set from an empty dataset")
    if size < 1:
        raise ExplainError("background size must be >= 1")
    if size >= len(data):
        if size > len(data):
            logger.warning(f"Background size {size} exceeds {len(data)} rows, using all rows")
        return BackgroundSet(data.features)
    rows = np.random.default_rng(seed).choice(len(data), size=size, replace=False)
    return BackgroundSet(data.features[rows])


class CoalitionGame:
    """Coalition values v(S) for one model, sample and label."""

    def __init__(
        self,
        model: MultiLabelModel,
        sample: np.ndarray,
        label: int,
        background: BackgroundSet,
        chunk_rows: int = CHUNK_ROWS,
    ):
        self.model = model
        self.sample = np.asarray(sample, dtype=np.float64).ravel()
        self.label = label
        self.background = background
        self.chunk_rows = chunk_rows
        if self.sample.size != background.n_features:
            raise ExplainError(
                f"sample has {self.sample.size} features, background has {background.n_features}"
            )

    @property
    def n_features(self) -> int:
        return self.sample.size

    def values(self, masks: np.ndarray) -> np.ndarray:
        """v(S) for each boolean row of ``masks`` (K, F)."""
        masks = np.asarray(masks, dtype=bool).reshape(-1, self.n_features)
        n_background = len(self.background)
        per_chunk = max(1, self.chunk_rows // n_background)
        out = np.empty(masks.shape[0])
        for start in range(0, masks.shape[0], per_chunk):
            block = masks[start : start + per_chunk]
            hybrid = np.where(block[:, None, :], self.sample[None, None, :], self.background.rows[None, :, :])
            proba = self.model.predict_proba(hybrid.reshape(-1, self.n_features))[:, self.label]
            out[start : start + block.shape[0]] = proba.reshape(block.shape[0], n_background).mean(axis=1)
        return out

    def value(self, coalition: Sequence[int]) -> float:
        mask = np.zeros(self.n_features, dtype=bool)
        mask[list(coalition)] = True
        return float(self.values(mask[None, :])[0])


def coalition_value(
    model: MultiLabelModel,
    sample: np.ndarray,
    coalition: Sequence[int],
    background: BackgroundSet,
    label: int,
) -> float:
    """Mean model probability for ``label`` over hybrids of sample (in S) and background (outside S)."""
    return CoalitionGame(model, sample, label, background).value(coalition)


def _subset_masks(n_features: int) -> np.ndarray:
    codes = np.arange(2**n_features, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n_features)) & 1).astype(bool)


def exact_shapley(
    model: MultiLabelModel,
    sample: np.ndarray,
    label: int,
    background: BackgroundSet,
    sample_index: int = 0,
) -> Attribution:
    """Full weighted subset sum over every coalition.

    Raises:
        ExplainError: more than MAX_EXACT_FEATURES features
    """
    game = CoalitionGame(model, sample, label, background)
    n = game.n_features
    if n > MAX_EXACT_FEATURES:
        raise ExplainError(
            f"exact Shapley enumerates 2^{n} coalitions; limit is {MAX_EXACT_FEATURES} features, use the sampled estimator"
        )

    masks = _subset_masks(n)
    values = game.values(masks)
    codes = np.arange(masks.shape[0], dtype=np.int64)
    sizes = masks.sum(axis=1)
    weights = 1.0 / (n * comb(n - 1, np.arange(n)))

    phi = np.zeros(n)
    for i in range(n):
        without = codes[~masks[:, i]]
        phi[i] = np.sum(weights[sizes[without]] * (values[without | (1 << i)] - values[without]))

    base_value = float(values[0])
    model_output = float(values[-1])
    return Attribution(
        phi=phi,
        base_value=base_value,
        model_output=model_output,
        label=label,
        sample_index=sample_index,
        estimator="exact",
        residual=model_output - base_value - float(phi.sum()),
    )


def sampled_shapley(
    model: MultiLabelModel,
    sample: np.ndarray,
    label: int,
    background: BackgroundSet,
    n_perms: int,
    seed: int,
    sample_index: int = 0,
) -> Attribution:
    """Average marginal contribution over ``n_perms`` random permutations.

    The permutation stream is seeded from (seed, sample_index, label). Any
    residual against local accuracy is spread uniformly over the features.
    """
    if n_perms < 1:
        raise ExplainError("n_perms must be >= 1")
    game = CoalitionGame(model, sample, label, background)
    n = game.n_features
    rng = np.random.default_rng(np.random.SeedSequence([seed, sample_index, label]))
    permutations = np.stack([rng.permutation(n) for _ in range(n_perms)])

    base_value, model_output = game.values(np.stack([np.zeros(n, dtype=bool), np.ones(n, dtype=bool)]))

    # interior prefixes 1..n-1 of every permutation
    ranks = np.empty_like(permutations)
    rows = np.arange(n_perms)[:, None]
    ranks[rows, permutations] = np.arange(n)[None, :]
    prefix_sizes = np.arange(1, n)
    masks = ranks[:, None, :] < prefix_sizes[None, :, None]
    interior = game.values(masks.reshape(-1, n)).reshape(n_perms, n - 1)

    path = np.hstack([np.full((n_perms, 1), base_value), interior, np.full((n_perms, 1), model_output)])
    contributions = np.zeros((n_perms, n))
    contributions[rows, permutations] = np.diff(path, axis=1)
    phi = contributions.mean(axis=0)

    residual = float(model_output - base_value - phi.sum())
    if abs(residual) > RESIDUAL_TOLERANCE:
        logger.warning(f"Sampled Shapley residual {residual:.3e} (sample {sample_index}, label {label}) spread over features")
    phi = phi + residual / n
    return Attribution(
        phi=phi,
        base_value=float(base_value),
        model_output=float(model_output),
        label=label,
        sample_index=sample_index,
        estimator="sampled",
        residual=residual,
    )


@dataclass
class ExplanationSet:
    """Attributions for a set of samples and labels.

    Attributes:
        phi: (N, L, F) attributions
        base_values: (N, L)
        outputs: (N, L)
        features: (N, F) raw feature values of the explained samples
        labels: label indices explained, in order
    """

    phi: np.ndarray
    base_values: np.ndarray
    outputs: np.ndarray
    features: np.ndarray
    labels: List[int]
    feature_names: List[str]
    source_ids: List[str]
    estimator: str
    residuals: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.phi.shape[0]

    def label_position(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ExplainError(f"label {label} was not explained")

    def attribution(self, sample: int, label: int) -> Attribution:
        j = self.label_position(label)
        return Attribution(
            phi=self.phi[sample, j],
            base_value=float(self.base_values[sample, j]),
            model_output=float(self.outputs[sample, j]),
            label=label,
            sample_index=sample,
            estimator=self.estimator,
            residual=float(self.residuals[sample, j]),
        )


def explain_dataset(
    model: MultiLabelModel,
    data: Dataset,
    background: BackgroundSet,
    labels: Sequence[int],
    estimator: str = "sampled",
    n_perms: int = 100,
    seed: int = 0,
    max_samples: Optional[int] = None,
    n_jobs: int = 1,
) -> ExplanationSet:
    """Explain every (sample, label) pair, in parallel across pairs.

    Args:
        model: classifier whose columns match ``data``
        data: samples to explain (already aligned to the model)
        background: background set
        labels: label indices to explain
        estimator: "exact" or "sampled"
        n_perms: permutations per pair for the sampled estimator
        seed: base seed; per-pair streams derive from (seed, sample, label)
        max_samples: explain only the first ``max_samples`` rows
        n_jobs: joblib workers

    Raises:
        ExplainError: unknown estimator, empty data or label list
    """
    if estimator not in {"exact", "sampled"}:
        raise ExplainError(f"unknown estimator '{estimator}'")
    if len(data) == 0:
        raise ExplainError("no samples to explain")
    labels = list(labels)
    if not labels:
        raise ExplainError("no labels to explain")
    model.check_features(data.features[:1])

    n_samples = len(data) if max_samples is None else min(max_samples, len(data))
    pairs = [(i, label) for i in range(n_samples) for label in labels]
    logger.info(f"Explaining {n_samples} samples x {len(labels)} labels with the {estimator} estimator")

    def run(i: int, label: int) -> Attribution:
        if estimator == "exact":
            return exact_shapley(model, data.features[i], label, background, sample_index=i)
        return sampled_shapley(model, data.features[i], label, background, n_perms, seed, sample_index=i)

    results = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(run)(i, label) for i, label in pairs)

    n_features = data.n_features
    phi = np.zeros((n_samples, len(labels), n_features))
    base_values = np.zeros((n_samples, len(labels)))
    outputs = np.zeros((n_samples, len(labels)))
    residuals = np.zeros((n_samples, len(labels)))
    positions = {label: j for j, label in enumerate(labels)}
    for result in results:
        j = positions[result.label]
        phi[result.sample_index, j] = result.phi
        base_values[result.sample_index, j] = result.base_value
        outputs[result.sample_index, j] = result.model_output
        residuals[result.sample_index, j] = result.residual

    return ExplanationSet(
        phi=phi,
        base_values=base_values,
        outputs=outputs,
        features=np.array(data.features[:n_samples]),
        labels=labels,
        feature_names=list(data.schema.names),
        source_ids=list(data.source_ids[:n_samples]),
        estimator=estimator,
        residuals=residuals,
    )
