"""
Session featurization: merge per-connection flows into one packet sequence,
compute both feature halves and assemble datasets from session logs.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from ..dataset.core import Dataset
from ..dataset.schema import LABEL_INDEX, N_LABELS, canonical_schema
from ..utils.errors import DataError
from .connection import N_CONNECTION_FEATURES, features_from_arrays
from .host import host_features
from .models import HostSession, read_sessions

logger = logging.getLogger(__name__)


def merge_flows(session: HostSession) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenate the session's flows into one time-ordered packet sequence.

    With one connection per flow, each flow's times are shifted by its
    connection's start relative to the earliest start.
    """
    parts = [flow.arrays() for flow in session.flows]
    if not parts:
        return np.zeros(0), np.zeros(0, dtype=bool)

    if len(session.flows) == len(session.connections):
        origin = min(c.start for c in session.connections)
        parts = [(times + (conn.start - origin), outgoing) for (times, outgoing), conn in zip(parts, session.connections)]

    times = np.concatenate([p[0] for p in parts])
    outgoing = np.concatenate([p[1] for p in parts])
    order = np.argsort(times, kind="stable")
    return times[order], outgoing[order]


def featurize(session: HostSession) -> np.ndarray:
    """Full 215-slot feature vector for one host session."""
    times, outgoing = merge_flows(session)
    if times.size == 0 and not session.connections:
        raise DataError(f"session '{session.host_id}' has no flows and no connections")

    if times.size:
        connection_half = features_from_arrays(times, outgoing)
    else:
        connection_half = np.zeros(N_CONNECTION_FEATURES)
    return np.concatenate([connection_half, host_features(session)])


def featurize_many(sessions: Iterable[HostSession], n_jobs: int = 1) -> np.ndarray:
    """Featurize sessions (in parallel when n_jobs > 1); rows keep input order."""
    sessions = list(sessions)
    if not sessions:
        return np.zeros((0, N_CONNECTION_FEATURES + 40))
    rows = Parallel(n_jobs=n_jobs)(delayed(featurize)(session) for session in sessions)
    return np.vstack(rows)


def sessions_to_dataset(sessions: List[HostSession], name: str = "sessions", n_jobs: int = 1) -> Dataset:
    """Dataset from sessions; sessions without labels get an empty label set."""
    features = featurize_many(sessions, n_jobs=n_jobs)
    labels = np.zeros((len(sessions), N_LABELS), dtype=bool)
    for row, session in enumerate(sessions):
        for label in session.labels:
            labels[row, LABEL_INDEX[label]] = True
    unlabeled = int((~labels.any(axis=1)).sum())
    if unlabeled:
        logger.warning(f"{unlabeled} session(s) carry no labels; their rows can be explained but not trained on or scored")
    return Dataset(
        features=features,
        labels=labels,
        source_ids=tuple(s.source_id or s.host_id for s in sessions),
        schema=canonical_schema(),
        name=name,
    )


def featurize_file(path: Union[str, Path], n_jobs: int = 1) -> Dataset:
    """Read a JSON-lines session log and featurize every session."""
    sessions = list(read_sessions(path))
    logger.info(f"Featurizing {len(sessions)} sessions from {path}")
    return sessions_to_dataset(sessions, name=Path(path).stem, n_jobs=n_jobs)
