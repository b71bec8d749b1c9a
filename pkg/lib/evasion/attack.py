"""
Cohort selection and percentile feature-replacement perturbations.

E1 leaves the cohort untouched. E2 moves the two connection-duration features
to a low percentile of the Downloader-only test samples; E3 moves five
duration/size features to a low percentile of the target cohort itself.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from ..dataset.core import Dataset
from ..dataset.schema import LABEL_INDEX, N_FEATURES
from ..dataset.stats import percentile
from ..utils.errors import DataError, SchemaMismatchError

logger = logging.getLogger(__name__)

E2_FEATURES: Tuple[int, ...] = (183, 185)
E3_FEATURES: Tuple[int, ...] = (183, 185, 199, 17, 16)
E2_SOURCE_LABEL = "Downloader"
TARGET_LABEL = "Ransomware"


@dataclass(frozen=True)
class PerturbationSpec:
    """Ordered (feature index, replacement value) edits."""

    edits: Tuple[Tuple[int, float], ...] = ()
    provenance: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        edits = tuple((int(index), float(value)) for index, value in self.edits)
        indices = [index for index, _ in edits]
        if len(set(indices)) != len(indices):
            raise ValueError("perturbation spec repeats a feature index")
        for index in indices:
            if not 0 <= index < N_FEATURES:
                raise ValueError(f"feature index {index} outside 0..{N_FEATURES - 1}")
        object.__setattr__(self, "edits", edits)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(index for index, _ in self.edits)

    def __len__(self) -> int:
        return len(self.edits)


IDENTITY = PerturbationSpec()


def select_cohort(test: Dataset, label: str, exclusive: bool = True) -> Dataset:
    """Samples labeled exactly {label} (exclusive) or containing it."""
    if label not in LABEL_INDEX:
        raise DataError(f"unknown label '{label}'")
    column = test.labels[:, LABEL_INDEX[label]]
    if exclusive:
        rows = np.nonzero(column & (test.labels.sum(axis=1) == 1))[0]
    else:
        rows = np.nonzero(column)[0]
    suffix = "only" if exclusive else "any"
    cohort = test.take(rows, name=f"{test.name}-{label}-{suffix}")
    if len(cohort) == 0:
        logger.warning(f"Empty {label} cohort ({suffix}) in {test.name}")
    else:
        logger.info(f"{label} cohort ({suffix}): {len(cohort)} samples")
    return cohort


def percentile_spec(cohort: Dataset, features: Sequence[int], p: float, description: str) -> PerturbationSpec:
    if len(cohort) == 0:
        raise DataError(f"cannot derive replacement values: {description} cohort is empty")
    missing = [index for index in features if index not in cohort.schema.indices]
    if missing:
        raise SchemaMismatchError(f"features {missing} are not in the data schema")
    edits = tuple((index, percentile(cohort.column(index), p)) for index in features)
    provenance = {
        str(index): f"p{p:g} of feature {index} over {len(cohort)} {description} samples" for index in features
    }
    return PerturbationSpec(edits, provenance)


def build_e2_spec(test: Dataset, p: float = 25.0, exclusive: bool = True) -> PerturbationSpec:
    """Features 183 and 185 set to the p-th percentile of the Downloader cohort."""
    cohort = select_cohort(test, E2_SOURCE_LABEL, exclusive)
    return percentile_spec(cohort, E2_FEATURES, p, f"{E2_SOURCE_LABEL}-{'only' if exclusive else 'any'}")


def build_e3_spec(
    test: Dataset, p: float = 10.0, exclusive: bool = True, label: str = TARGET_LABEL
) -> PerturbationSpec:
    """Features 183, 185, 199, 17 and 16 set to the p-th percentile of the target cohort."""
    cohort = select_cohort(test, label, exclusive)
    return percentile_spec(cohort, E3_FEATURES, p, f"{label}-{'only' if exclusive else 'any'}")


def apply(spec: PerturbationSpec, samples: Dataset) -> Dataset:
    """Copy of ``samples`` with every edited feature overwritten; labels kept."""
    if not spec.edits:
        return samples
    features = np.array(samples.features, copy=True)
    for index, value in spec.edits:
        try:
            position = samples.schema.position(index)
        except DataError:
            raise SchemaMismatchError(f"feature {index} is not in the data schema")
        features[:, position] = value
    return samples.with_features(features)
