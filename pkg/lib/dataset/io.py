"""
Feature CSV reading and writing.

Format: header ``feature_000,...,feature_214,labels`` (or any ascending subset
of feature columns for reduced schemas), ``labels`` holding ``|``-separated
canonical label names. UTF-8, ``.`` decimal separator, LF line endings.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from ..utils.errors import DataError
from .core import Dataset
from .schema import LABEL_INDEX, LABELS, N_LABELS, FeatureSchema, schema_from_names

logger = logging.getLogger(__name__)

LABELS_COLUMN = "labels"
SOURCE_COLUMN = "source_id"
MAX_LABELS_PER_SAMPLE = 4


def parse_label_cell(cell: str, row: int, allow_empty: bool = False) -> np.ndarray:
    """Parse a ``|``-separated label cell into a boolean vector.

    An empty cell is an unlabeled row: all-false when ``allow_empty``, else an error.
    """
    text = cell.strip()
    bits = np.zeros(N_LABELS, dtype=bool)
    if not text:
        if allow_empty:
            return bits
        raise DataError("empty label cell (unlabeled rows are only accepted for explanation)", row=row)
    for name in text.split("|"):
        name = name.strip()
        if name not in LABEL_INDEX:
            raise DataError(f"unknown label name '{name}'", row=row)
        bits[LABEL_INDEX[name]] = True
    if bits.sum() > MAX_LABELS_PER_SAMPLE:
        raise DataError(f"{int(bits.sum())} labels, at most {MAX_LABELS_PER_SAMPLE} allowed", row=row)
    return bits


def format_label_cell(bits: np.ndarray) -> str:
    return "|".join(LABELS[i] for i in np.nonzero(bits)[0])


def _check_header(columns: List[str], schema: Optional[FeatureSchema]) -> FeatureSchema:
    if not columns or columns[-1] != LABELS_COLUMN:
        raise DataError(f"header must end with a '{LABELS_COLUMN}' column")
    feature_columns = columns[:-1]
    if feature_columns and feature_columns[0] == SOURCE_COLUMN:
        feature_columns = feature_columns[1:]

    if schema is None:
        return schema_from_names(feature_columns)

    expected = schema.names
    if feature_columns != expected:
        missing = [name for name in expected if name not in feature_columns]
        extra = [name for name in feature_columns if name not in expected]
        details = []
        if missing:
            details.append(f"missing columns {missing[:5]}")
        if extra:
            details.append(f"extra columns {extra[:5]}")
        if not details:
            details.append("columns out of order")
        raise DataError("header does not match schema: " + "; ".join(details))
    return schema


def load_csv(
    path: Union[str, Path],
    schema: Optional[FeatureSchema] = None,
    name: Optional[str] = None,
    allow_unlabeled: bool = False,
) -> Dataset:
    """Load a feature CSV.

    Args:
        path: CSV file path
        schema: expected schema; inferred from the ``feature_NNN`` header when None
        name: dataset name (defaults to the file stem)
        allow_unlabeled: accept empty label cells (rows get no labels), e.g. fresh
            captures from the featurizer that are only explained, never scored

    Returns:
        Dataset with one sample per data row

    Raises:
        DataError: bad header, non-numeric or non-finite cell, bad label cell
            (row numbers count data rows from 1)
    """
    csv_path = Path(path)
    if not csv_path.exists():
        raise DataError(f"Feature file not found: {path}")

    try:
        frame = pd.read_csv(csv_path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Unreadable feature file {path}: {e}")

    columns = list(frame.columns)
    schema = _check_header(columns, schema)
    feature_columns = schema.names

    numeric = frame[feature_columns].apply(pd.to_numeric, errors="coerce")
    values = numeric.to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = (int(x) for x in np.argwhere(bad)[0])
        raw = frame.iat[row, columns.index(feature_columns[col])]
        kind = "non-finite value" if np.isinf(values[row, col]) or raw.strip().lower() == "nan" else "non-numeric feature cell"
        raise DataError(f"{kind} {raw!r} in column {feature_columns[col]}", row=row + 1)

    labels = np.zeros((len(frame), N_LABELS), dtype=bool)
    for i, cell in enumerate(frame[LABELS_COLUMN].tolist()):
        labels[i] = parse_label_cell(cell, row=i + 1, allow_empty=allow_unlabeled)
    unlabeled = int((~labels.any(axis=1)).sum())
    if unlabeled:
        logger.info(f"{unlabeled} unlabeled row(s) in {csv_path}")

    source_ids = tuple(frame[SOURCE_COLUMN].tolist()) if SOURCE_COLUMN in frame.columns else ()
    dataset = Dataset(
        features=values,
        labels=labels,
        source_ids=source_ids,
        schema=schema,
        name=name or csv_path.stem,
    )
    logger.info(f"Loaded {len(dataset)} samples x {dataset.n_features} features from {csv_path}")
    return dataset


def write_csv(data: Dataset, path: Union[str, Path], include_source_ids: bool = False) -> None:
    """Write a dataset in the canonical feature CSV format."""
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    frame = pd.DataFrame(data.features, columns=data.schema.names)
    if include_source_ids:
        frame.insert(0, SOURCE_COLUMN, list(data.source_ids))
    frame[LABELS_COLUMN] = [format_label_cell(bits) for bits in data.labels]
    frame.to_csv(csv_path, index=False, lineterminator="\n", encoding="utf-8")
    logger.info(f"Wrote {len(data)} samples to {csv_path}")
