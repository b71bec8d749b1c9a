"""
Model evaluation and the overall / class-wise report tables.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ..dataset.core import Dataset
from ..dataset.io import format_label_cell
from ..models.base import MultiLabelModel, align_dataset
from .scores import (
    ClassScore,
    PredictionBatch,
    classwise_pr,
    elementwise_accuracy,
    hamming_loss,
    micro_precision,
    micro_recall,
    subset_accuracy,
)

logger = logging.getLogger(__name__)

TABLE4_COLUMNS = ["model", "dataset", "MAP", "MAR", "HL", "AC", "EA"]
TABLE6_COLUMNS = [
    "model",
    "label",
    "precision",
    "recall",
    "precision_degenerate",
    "recall_degenerate",
    "support",
]


@dataclass
class EvaluationResult:
    """Overall scores (one table-4 row) plus class-wise scores for one model."""

    model: str
    dataset: str
    micro_precision: float
    micro_recall: float
    hamming_loss: float
    subset_accuracy: float
    elementwise_accuracy: float
    classwise: List[ClassScore] = field(default_factory=list)
    degenerate: Dict[str, bool] = field(default_factory=dict)

    def table4_row(self) -> Dict[str, object]:
        return {
            "model": self.model,
            "dataset": self.dataset,
            "MAP": self.micro_precision,
            "MAR": self.micro_recall,
            "HL": self.hamming_loss,
            "AC": self.subset_accuracy,
            "EA": self.elementwise_accuracy,
        }

    def table6_rows(self) -> List[Dict[str, object]]:
        return [
            {
                "model": self.model,
                "label": score.label,
                "precision": score.precision.value,
                "recall": score.recall.value,
                "precision_degenerate": score.precision.degenerate,
                "recall_degenerate": score.recall.degenerate,
                "support": score.support,
            }
            for score in self.classwise
        ]


def score_batch(batch: PredictionBatch, model_name: str, dataset_name: str) -> EvaluationResult:
    precision = micro_precision(batch)
    recall = micro_recall(batch)
    return EvaluationResult(
        model=model_name,
        dataset=dataset_name,
        micro_precision=precision.value,
        micro_recall=recall.value,
        hamming_loss=hamming_loss(batch),
        subset_accuracy=subset_accuracy(batch),
        elementwise_accuracy=elementwise_accuracy(batch),
        classwise=classwise_pr(batch),
        degenerate={"MAP": precision.degenerate, "MAR": recall.degenerate},
    )


def evaluate_model(model: MultiLabelModel, data: Dataset) -> EvaluationResult:
    """Predict ``data`` (projected onto the model's columns) and score it."""
    aligned = align_dataset(data, model)
    batch = PredictionBatch(aligned.labels, model.predict(aligned.features))
    result = score_batch(batch, model.display_name, data.name)
    logger.info(
        f"{model.display_name} on {data.name}: MAP={result.micro_precision:.4f} "
        f"MAR={result.micro_recall:.4f} HL={result.hamming_loss:.4f} AC={result.subset_accuracy:.4f}"
    )
    return result


def table4_frame(results: Sequence[EvaluationResult]) -> pd.DataFrame:
    return pd.DataFrame([r.table4_row() for r in results], columns=TABLE4_COLUMNS)


def table6_frame(results: Sequence[EvaluationResult]) -> pd.DataFrame:
    rows = [row for r in results for row in r.table6_rows()]
    return pd.DataFrame(rows, columns=TABLE6_COLUMNS)


def write_table4(results: Sequence[EvaluationResult], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table4_frame(results).to_csv(path, index=False, lineterminator="\n")
    return path


def write_table6(results: Sequence[EvaluationResult], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table6_frame(results).to_csv(path, index=False, lineterminator="\n")
    return path


def write_predictions(
    predictions: Dict[str, np.ndarray], data: Dataset, path: Union[str, Path]
) -> Path:
    """One row per sample: source id, true label set, then one column per model."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            "source_id": list(data.source_ids),
            "labels": [format_label_cell(row) for row in data.labels],
        }
    )
    for name, predicted in predictions.items():
        frame[name] = [format_label_cell(row) for row in predicted]
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
