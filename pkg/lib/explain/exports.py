"""
Tabular plot data for attribution figures: summary, force, decision and
dependence views, one CSV per view per label plus a JSON manifest.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from ..dataset.schema import LABELS
from .aggregate import GlobalImportance, global_importance
from .shapley import ExplanationSet

logger = logging.getLogger(__name__)

PLOT_TYPES = ("importance", "summary", "force", "decision", "dependence")


def importance_data(importance: GlobalImportance, label: int, top_k: Optional[int] = None) -> pd.DataFrame:
    ranked = importance.top_k(label, top_k or len(importance.feature_names))
    return pd.DataFrame(
        {
            "rank": np.arange(1, len(ranked) + 1),
            "feature": [name for name, _ in ranked],
            "mean_abs_phi": [value for _, value in ranked],
        }
    )


def summary_data(explanations: ExplanationSet, label: int, top_k: Optional[int] = None) -> pd.DataFrame:
    """(sample, feature, phi, value) rows for the top-k features of ``label``."""
    j = explanations.label_position(label)
    ranking = global_importance(explanations).ranking(label)
    if top_k is not None:
        ranking = ranking[:top_k]
    rows = []
    for pos in ranking:
        for i in range(explanations.n_samples):
            rows.append(
                {
                    "sample": i,
                    "source_id": explanations.source_ids[i],
                    "feature": explanations.feature_names[pos],
                    "phi": explanations.phi[i, j, pos],
                    "value": explanations.features[i, pos],
                }
            )
    return pd.DataFrame(rows, columns=["sample", "source_id", "feature", "phi", "value"])


def force_data(explanations: ExplanationSet, label: int) -> pd.DataFrame:
    """Signed contributions by decreasing magnitude; ``cumulative`` ends at the model output."""
    j = explanations.label_position(label)
    rows = []
    for i in range(explanations.n_samples):
        phi = explanations.phi[i, j]
        order = np.argsort(-np.abs(phi), kind="stable")
        cumulative = explanations.base_values[i, j] + np.cumsum(phi[order])
        for step, pos in enumerate(order):
            rows.append(
                {
                    "sample": i,
                    "base_value": explanations.base_values[i, j],
                    "feature": explanations.feature_names[pos],
                    "value": explanations.features[i, pos],
                    "contribution": phi[pos],
                    "cumulative": cumulative[step],
                    "output": explanations.outputs[i, j],
                }
            )
    return pd.DataFrame(
        rows, columns=["sample", "base_value", "feature", "value", "contribution", "cumulative", "output"]
    )


def decision_data(explanations: ExplanationSet, label: int) -> pd.DataFrame:
    """Cumulative path per sample from the base value through features, least important first."""
    j = explanations.label_position(label)
    order = global_importance(explanations).ranking(label)[::-1]
    rows = []
    for i in range(explanations.n_samples):
        base = explanations.base_values[i, j]
        rows.append({"sample": i, "step": 0, "feature": "", "position": base})
        path = base + np.cumsum(explanations.phi[i, j, order])
        for step, pos in enumerate(order, start=1):
            rows.append(
                {"sample": i, "step": step, "feature": explanations.feature_names[pos], "position": path[step - 1]}
            )
    return pd.DataFrame(rows, columns=["sample", "step", "feature", "position"])


def secondary_feature(explanations: ExplanationSet, label: int, primary: int) -> Optional[int]:
    """Feature whose values correlate most (in absolute value) with the primary attribution."""
    j = explanations.label_position(label)
    target = explanations.phi[:, j, primary]
    if explanations.n_samples < 2 or np.std(target) == 0:
        return None
    best, best_score = None, -1.0
    for pos in range(explanations.features.shape[1]):
        column = explanations.features[:, pos]
        if pos == primary or np.std(column) == 0:
            continue
        score = abs(float(np.corrcoef(target, column)[0, 1]))
        if score > best_score:
            best, best_score = pos, score
    return best


def dependence_data(
    explanations: ExplanationSet, label: int, primary: Optional[int] = None
) -> pd.DataFrame:
    """(primary value, primary phi, secondary value) per sample; primary defaults to the top feature."""
    j = explanations.label_position(label)
    if primary is None:
        primary = int(global_importance(explanations).ranking(label)[0])
    secondary = secondary_feature(explanations, label, primary)
    names = explanations.feature_names
    return pd.DataFrame(
        {
            "sample": np.arange(explanations.n_samples),
            "primary_feature": names[primary],
            "primary_value": explanations.features[:, primary],
            "primary_phi": explanations.phi[:, j, primary],
            "secondary_feature": names[secondary] if secondary is not None else "",
            "secondary_value": explanations.features[:, secondary] if secondary is not None else np.nan,
        }
    )


def write_exports(
    explanations: ExplanationSet,
    directory: Union[str, Path],
    provenance: Dict[str, Any],
    top_k: int = 20,
) -> Path:
    """Write every plot type for every explained label; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    importance = global_importance(explanations)
    files = []
    for label in explanations.labels:
        name = LABELS[label]
        frames = {
            "importance": importance_data(importance, label, top_k),
            "summary": summary_data(explanations, label, top_k),
            "force": force_data(explanations, label),
            "decision": decision_data(explanations, label),
            "dependence": dependence_data(explanations, label),
        }
        for plot_type in PLOT_TYPES:
            path = directory / f"{plot_type}_{name}.csv"
            frames[plot_type].to_csv(path, index=False, lineterminator="\n")
            files.append({"plot": plot_type, "label": name, "file": path.name})

    manifest = {
        **provenance,
        "estimator": explanations.estimator,
        "n_samples": explanations.n_samples,
        "top_k": top_k,
        "max_abs_residual": float(np.max(np.abs(explanations.residuals))) if explanations.residuals.size else 0.0,
        "files": files,
    }
    manifest_path = directory / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    logger.info(f"Wrote {len(files)} explanation exports to {directory}")
    return manifest_path
