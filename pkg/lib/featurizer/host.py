"""Host-level features (indices 175-214) from Tor connection and DNS logs."""

import numpy as np

from ..dataset.stats import max_or_zero, mean_or_zero, median_or_zero, min_or_zero, mode_or_zero
from .models import STANDARD_TOR_PORTS, HostSession

N_HOST_FEATURES = 40
HOST_OFFSET = 175
SHORT_CONNECTION_SECONDS = 60.0


def host_features(session: HostSession) -> np.ndarray:
    """Host-level feature vector (40 values, original indices 175-214).

    Empty aggregates are 0, so a session without connections only carries its
    DNS/onion counters. Index 181 counts distinct non-standard destination
    ports (outside 443, 9001 and 9030), not connections to them.
    """
    v = np.zeros(N_HOST_FEATURES)
    v[31:40] = session.counters()

    connections = session.connections
    if not connections:
        return v

    starts = np.array([c.start for c in connections], dtype=np.float64)
    durations = np.array([c.duration for c in connections], dtype=np.float64)
    failed = sum(c.failed for c in connections)
    span = float(np.max(starts + durations) - np.min(starts))

    ports = np.array([c.dest_port for c in connections], dtype=np.float64)
    non_standard = np.array([p for p in ports if int(p) not in STANDARD_TOR_PORTS])

    v[0] = len(connections)
    v[1] = failed
    v[2] = len(connections) / span if span > 0 else 0.0
    v[3] = failed / span if span > 0 else 0.0
    v[4] = len(np.unique(ports))
    v[5] = mode_or_zero(ports)
    v[6] = len(np.unique(non_standard))
    v[7] = mode_or_zero(non_standard)
    v[8] = mean_or_zero(durations)
    v[9] = min_or_zero(durations)
    v[10] = max_or_zero(durations)
    v[11] = np.count_nonzero(durations <= SHORT_CONNECTION_SECONDS)
    v[12] = mean_or_zero(np.diff(np.sort(starts)))

    sent_packets = np.array([c.pkts_sent for c in connections], dtype=np.float64)
    recv_packets = np.array([c.pkts_recv for c in connections], dtype=np.float64)
    sent_bytes = np.array([c.bytes_sent for c in connections], dtype=np.float64)
    recv_bytes = np.array([c.bytes_recv for c in connections], dtype=np.float64)
    per_connection = (
        sent_packets + recv_packets,
        sent_bytes + recv_bytes,
        sent_bytes,
        sent_packets,
        recv_packets,
        recv_bytes,
    )
    for block, values in enumerate(per_connection):
        base = 13 + 3 * block
        v[base : base + 3] = [mean_or_zero(values), median_or_zero(values), mode_or_zero(values)]
    return v
