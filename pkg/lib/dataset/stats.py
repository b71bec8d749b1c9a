"""Order statistics shared by the featurizer and the evasion harness."""

from typing import Sequence, Union

import numpy as np
from scipy import stats as scipy_stats


def percentile(values: Union[Sequence[float], np.ndarray], p: float) -> float:
    """Percentile by linear interpolation between closest ranks.

    With the values sorted, rank h = (n - 1) * p / 100 and the result is
    v[floor(h)] + (h - floor(h)) * (v[floor(h) + 1] - v[floor(h)]).

    Raises:
        ValueError: empty input or p outside [0, 100]
    """
    array = np.asarray(values, dtype=np.float64).ravel()
    if array.size == 0:
        raise ValueError("percentile of an empty list")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"p must be in [0, 100], got {p}")
    return float(np.percentile(array, p, method="linear"))


def percentile_or_zero(values: Union[Sequence[float], np.ndarray], p: float) -> float:
    return percentile(values, p) if len(values) else 0.0


def mean_or_zero(values: Union[Sequence[float], np.ndarray]) -> float:
    return float(np.mean(values)) if len(values) else 0.0


def std_or_zero(values: Union[Sequence[float], np.ndarray]) -> float:
    """Population standard deviation; 0 for fewer than two values."""
    return float(np.std(values)) if len(values) >= 2 else 0.0


def median_or_zero(values: Union[Sequence[float], np.ndarray]) -> float:
    return float(np.median(values)) if len(values) else 0.0


def max_or_zero(values: Union[Sequence[float], np.ndarray]) -> float:
    return float(np.max(values)) if len(values) else 0.0


def min_or_zero(values: Union[Sequence[float], np.ndarray]) -> float:
    return float(np.min(values)) if len(values) else 0.0


def mode_or_zero(values: Union[Sequence[float], np.ndarray]) -> float:
    """Most frequent value, smallest among ties; 0 for an empty list."""
    if not len(values):
        return 0.0
    return float(scipy_stats.mode(np.asarray(values, dtype=np.float64), keepdims=False).mode)
