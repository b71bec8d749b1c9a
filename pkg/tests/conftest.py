"""
Shared fixtures for the onionlabel test suite.

Desk-scale benchmarks on the synthetic D5 profile are marked ``slow`` and
only run with ONIONLABEL_RUN_SLOW=1.
"""

import os
import sys
from typing import Optional, Sequence

import numpy as np
import pytest

# Add the project root to Python path
TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.dirname(TESTS_DIR))

from lib.dataset.core import Dataset
from lib.dataset.schema import LabelSet, canonical_schema
from lib.utils.config import ForestConfig, LampConfig, set_config


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: synthetic-profile benchmarks (set ONIONLABEL_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("ONIONLABEL_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set ONIONLABEL_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_dataset(
    features: np.ndarray,
    label_sets: Sequence[Sequence[str]],
    name: str = "toy",
    indices: Optional[Sequence[int]] = None,
) -> Dataset:
    """Dataset over the first F canonical features (or the given original indices)."""
    features = np.asarray(features, dtype=np.float64)
    positions = list(indices) if indices is not None else list(range(features.shape[1]))
    return Dataset(
        features=features,
        labels=np.vstack([LabelSet.from_names(names).to_array() for names in label_sets]),
        source_ids=tuple(f"{name}-{i:03d}" for i in range(features.shape[0])),
        schema=canonical_schema().subset(positions),
        name=name,
    )


@pytest.fixture(autouse=True)
def reset_global_config():
    set_config(None)
    yield
    set_config(None)


@pytest.fixture
def toy_dataset() -> Dataset:
    """60 samples, 4 features: feature 0 marks Downloader, 1 Ransomware, 2 Grayware, 3 is noise."""
    patterns = [["Downloader"], ["Ransomware"], ["Downloader", "Ransomware"], ["Grayware"]]
    rng = np.random.default_rng(7)
    rows, label_sets = [], []
    for i in range(60):
        names = patterns[i % len(patterns)]
        rows.append(
            [
                5.0 if "Downloader" in names else 1.0,
                7.0 if "Ransomware" in names else 2.0,
                9.0 if "Grayware" in names else 3.0,
                float(rng.integers(0, 3)),
            ]
        )
        label_sets.append(names)
    return make_dataset(np.array(rows), label_sets)


@pytest.fixture
def two_label_dataset() -> Dataset:
    """50 samples separable on two labels; values drawn from {0, 1, 2}."""
    patterns = [["Downloader"], ["Ransomware"], ["Downloader", "Ransomware"]]
    rows, label_sets = [], []
    for i in range(50):
        names = patterns[i % len(patterns)]
        rows.append([1.0 if "Downloader" in names else 0.0, 1.0 if "Ransomware" in names else 0.0, float(i % 3)])
        label_sets.append(names)
    return make_dataset(np.array(rows), label_sets, name="two-label")


@pytest.fixture
def small_forest_config() -> ForestConfig:
    return ForestConfig(n_trees=15, seed=3)


@pytest.fixture
def tiny_lamp_config() -> LampConfig:
    return LampConfig(
        d_model=16,
        d_hidden=32,
        dropout=0.0,
        learning_rate=5e-3,
        batch_size=16,
        epochs=5,
        message_rounds=1,
        attention_heads=2,
        seed=0,
    )


EVASION_COLUMNS = [3, 16, 17, 183, 185, 199]


@pytest.fixture
def attack_dataset() -> Dataset:
    """48 samples over the evasion columns; Downloader-only durations are constant."""
    patterns = [["Ransomware"], ["Downloader"], ["Downloader", "Ransomware"], ["Grayware"]]
    rng = np.random.default_rng(11)
    rows, label_sets = [], []
    for i in range(48):
        names = patterns[i % len(patterns)]
        row = rng.uniform(1, 5, size=len(EVASION_COLUMNS))
        if names == ["Downloader"]:
            row[3], row[4] = 7.0, 13.0
        elif "Ransomware" in names:
            row[1:] = rng.uniform(15, 60, size=5)
        rows.append(row)
        label_sets.append(names)
    return make_dataset(np.array(rows), label_sets, name="attack", indices=EVASION_COLUMNS)
