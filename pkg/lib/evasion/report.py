"""
Running E1/E2/E3 against a set of trained models and reporting the
per-class positive prediction counts on the target cohort.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

import pandas as pd

from ..dataset.core import Dataset, filter_to_labels
from ..dataset.schema import LABEL_INDEX, MAIN_LABELS, LabelSet
from ..models.base import MultiLabelModel, align_dataset
from ..utils.config import EvasionConfig
from ..utils.errors import DataError
from .attack import IDENTITY, TARGET_LABEL, PerturbationSpec, apply, build_e2_spec, build_e3_spec, select_cohort

logger = logging.getLogger(__name__)

EXPERIMENTS = ("E1", "E2", "E3")
REPORTED_CLASSES = MAIN_LABELS


@dataclass
class ExperimentReport:
    """counts[model][experiment][class] = positive predictions on the cohort."""

    counts: Dict[str, Dict[str, Dict[str, int]]]
    cohort_size: int
    specs: Dict[str, PerturbationSpec]
    target_label: str = TARGET_LABEL
    exclusive: bool = True
    models: List[str] = field(default_factory=list)

    def count(self, model: str, experiment: str, label: str) -> int:
        return self.counts[model][experiment][label]

    def to_frame(self) -> pd.DataFrame:
        """Rows = reported classes, columns = ``<MODEL>_<E>``."""
        columns = {
            f"{model}_{experiment}": [self.counts[model][experiment][label] for label in REPORTED_CLASSES]
            for model in self.models
            for experiment in EXPERIMENTS
        }
        frame = pd.DataFrame(columns, index=list(REPORTED_CLASSES))
        frame.index.name = "class"
        return frame

    def provenance(self) -> Dict[str, object]:
        return {
            "target_label": self.target_label,
            "exclusive": self.exclusive,
            "cohort_size": self.cohort_size,
            "models": self.models,
            "experiments": {
                name: {
                    "edits": [[index, value] for index, value in spec.edits],
                    "provenance": spec.provenance,
                }
                for name, spec in self.specs.items()
            },
        }


def count_positives(model: MultiLabelModel, cohort: Dataset) -> Dict[str, int]:
    predicted = model.predict(align_dataset(cohort, model).features)
    return {label: int(predicted[:, LABEL_INDEX[label]].sum()) for label in REPORTED_CLASSES}


def run_experiments(
    models: Mapping[str, MultiLabelModel],
    test: Dataset,
    config: Optional[EvasionConfig] = None,
) -> ExperimentReport:
    """Predict the target cohort unmodified (E1) and under the E2 and E3 perturbations.

    Args:
        models: trained models keyed by kind, all fitted on the same split
        test: held-out split (cohorts and percentiles come from it)
        config: cohort and percentile settings

    Raises:
        DataError: no models, or an empty target or Downloader cohort
    """
    config = config or EvasionConfig()
    if not models:
        raise DataError("run_experiments needs at least one model")
    if config.main_labels_only:
        test = filter_to_labels(test, LabelSet.from_names(MAIN_LABELS))

    cohort = select_cohort(test, TARGET_LABEL, config.exclusive)
    if len(cohort) == 0:
        raise DataError(f"no {TARGET_LABEL} samples in {test.name}")
    specs = {
        "E1": IDENTITY,
        "E2": build_e2_spec(test, config.e2_percentile, config.exclusive),
        "E3": build_e3_spec(test, config.e3_percentile, config.exclusive),
    }
    perturbed = {name: apply(spec, cohort) for name, spec in specs.items()}

    counts: Dict[str, Dict[str, Dict[str, int]]] = {}
    names: List[str] = []
    for model in models.values():
        name = model.display_name
        names.append(name)
        counts[name] = {experiment: count_positives(model, perturbed[experiment]) for experiment in EXPERIMENTS}
        logger.info(
            f"{name}: {TARGET_LABEL} positives "
            + ", ".join(f"{e}={counts[name][e][TARGET_LABEL]}" for e in EXPERIMENTS)
        )
    return ExperimentReport(counts, len(cohort), specs, TARGET_LABEL, config.exclusive, names)


@dataclass
class RobustnessSummary:
    target_drop_e2: float
    target_drop_e3: float
    downloader_rise_e2: int
    downloader_rise_e3: int
    grayware_rise_e2: int
    grayware_rise_e3: int


def _relative_drop(before: int, after: int) -> float:
    return 0.0 if before == 0 else (before - after) / before


def robustness_delta(report: ExperimentReport) -> Dict[str, RobustnessSummary]:
    """Relative target-class drop and absolute Downloader/Grayware rise per model."""
    summary = {}
    for model in report.models:
        c = report.counts[model]
        target = report.target_label
        summary[model] = RobustnessSummary(
            target_drop_e2=_relative_drop(c["E1"][target], c["E2"][target]),
            target_drop_e3=_relative_drop(c["E1"][target], c["E3"][target]),
            downloader_rise_e2=c["E2"]["Downloader"] - c["E1"]["Downloader"],
            downloader_rise_e3=c["E3"]["Downloader"] - c["E1"]["Downloader"],
            grayware_rise_e2=c["E2"]["Grayware"] - c["E1"]["Grayware"],
            grayware_rise_e3=c["E3"]["Grayware"] - c["E1"]["Grayware"],
        )
    return summary


def robustness_frame(report: ExperimentReport) -> pd.DataFrame:
    rows = [{"model": model, **vars(delta)} for model, delta in robustness_delta(report).items()]
    return pd.DataFrame(rows)


def write_report(report: ExperimentReport, directory: Union[str, Path]) -> Path:
    """Write table8.csv, robustness.csv and provenance.json into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    report.to_frame().to_csv(directory / "table8.csv", lineterminator="\n")
    robustness_frame(report).to_csv(directory / "robustness.csv", index=False, lineterminator="\n")
    with open(directory / "provenance.json", "w", encoding="utf-8") as f:
        json.dump(report.provenance(), f, indent=2, sort_keys=True)
    logger.info(f"Evasion report written to {directory}")
    return directory
