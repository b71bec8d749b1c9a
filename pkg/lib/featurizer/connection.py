"""
Connection-level features (indices 0-174) from packet timing and direction.

Layout:
    0-11     inter-arrival max/mean/std/p75 for total, outgoing, incoming
    12-23    p25/p50/p75/p100 of packet times for total, outgoing, incoming
    24-26    packet counts total, outgoing, incoming
    27-30    outgoing/incoming counts in the first 30 and last 30 packets
    31,32,39,43       concentration (outgoing per 20-packet chunk) std/mean/median/max
    33,34,40,41,42    packets per second mean/std/median/min/max
    35-38    outgoing/incoming ordering mean, then std
    44,45    percentage incoming, outgoing
    46-115   concentration sum-pooled into 70 slots; 116 zero
    117-137  packets in the first 21 seconds
    138-142  group sums
    143-174  zero padding
"""

from typing import Union

import numpy as np

from ..dataset.stats import (
    max_or_zero,
    mean_or_zero,
    median_or_zero,
    min_or_zero,
    percentile_or_zero,
    std_or_zero,
)
from ..utils.errors import DataError
from .models import FlowTrace

N_CONNECTION_FEATURES = 175
CHUNK_SIZE = 20
EDGE_PACKETS = 30
ALT_CONCENTRATION_SLOTS = 70
ALT_PPS_SLOTS = 21


def _interarrival_stats(times: np.ndarray) -> list:
    gaps = np.diff(times)
    return [max_or_zero(gaps), mean_or_zero(gaps), std_or_zero(gaps), percentile_or_zero(gaps, 75)]


def _time_percentiles(times: np.ndarray) -> list:
    return [percentile_or_zero(times, p) for p in (25, 50, 75, 100)]


def concentration(outgoing: np.ndarray) -> np.ndarray:
    """Outgoing packet count per consecutive 20-packet chunk (last chunk may be short)."""
    if outgoing.size == 0:
        return np.zeros(0)
    return np.add.reduceat(outgoing.astype(np.float64), np.arange(0, outgoing.size, CHUNK_SIZE))


def packets_per_second(times: np.ndarray) -> np.ndarray:
    """Packet count for every whole second from the first packet to the last."""
    seconds = np.floor(times - times[0]).astype(np.int64)
    return np.bincount(seconds).astype(np.float64)


def _pooled(values: np.ndarray, slots: int) -> np.ndarray:
    if values.size > slots:
        return np.array([chunk.sum() for chunk in np.array_split(values, slots)])
    out = np.zeros(slots)
    out[: values.size] = values
    return out


def _truncated(values: np.ndarray, slots: int) -> np.ndarray:
    out = np.zeros(slots)
    head = values[:slots]
    out[: head.size] = head
    return out


def features_from_arrays(times: np.ndarray, outgoing: np.ndarray) -> np.ndarray:
    """Connection-level feature vector from packet times and an outgoing mask."""
    times = np.asarray(times, dtype=np.float64)
    outgoing = np.asarray(outgoing, dtype=bool)
    if times.size == 0:
        raise DataError("cannot featurize an empty flow")
    if times.shape != outgoing.shape:
        raise DataError("times and directions differ in length")

    incoming = ~outgoing
    n = times.size
    v = np.zeros(N_CONNECTION_FEATURES)

    out_times, in_times = times[outgoing], times[incoming]
    v[0:12] = _interarrival_stats(times) + _interarrival_stats(out_times) + _interarrival_stats(in_times)
    v[12:24] = _time_percentiles(times) + _time_percentiles(out_times) + _time_percentiles(in_times)
    v[24:27] = [n, outgoing.sum(), incoming.sum()]

    first, last = outgoing[:EDGE_PACKETS], outgoing[-EDGE_PACKETS:]
    v[27:31] = [first.sum(), (~first).sum(), last.sum(), (~last).sum()]

    chunks = concentration(outgoing)
    v[31] = std_or_zero(chunks)
    v[32] = mean_or_zero(chunks)
    v[39] = median_or_zero(chunks)
    v[43] = max_or_zero(chunks)

    pps = packets_per_second(times)
    v[33] = mean_or_zero(pps)
    v[34] = std_or_zero(pps)
    v[40] = median_or_zero(pps)
    v[41] = min_or_zero(pps)
    v[42] = max_or_zero(pps)

    order = np.arange(n, dtype=np.float64)
    v[35] = mean_or_zero(order[outgoing])
    v[36] = mean_or_zero(order[incoming])
    v[37] = std_or_zero(order[outgoing])
    v[38] = std_or_zero(order[incoming])

    v[44] = 100.0 * incoming.sum() / n
    v[45] = 100.0 * outgoing.sum() / n

    alt_concentration = _pooled(chunks, ALT_CONCENTRATION_SLOTS)
    alt_pps = _truncated(pps, ALT_PPS_SLOTS)
    v[46:116] = alt_concentration
    v[117:138] = alt_pps

    v[138] = alt_concentration.sum()
    v[139] = alt_pps.sum()
    v[140] = v[0:12].sum()
    v[141] = v[12:24].sum()
    v[142] = v[24:31].sum()
    return v


def connection_features(flow: Union[FlowTrace, list]) -> np.ndarray:
    """Connection-level features (indices 0-174) of a non-empty flow.

    Args:
        flow: FlowTrace, or a list of ``[time, "in"|"out"]`` pairs

    Returns:
        Vector of 175 finite reals
    """
    if not isinstance(flow, FlowTrace):
        flow = FlowTrace.from_pairs(flow)
    times, outgoing = flow.arrays()
    return features_from_arrays(times, outgoing)
