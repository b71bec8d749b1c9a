"""Tests for connection-level and host-level feature extraction."""

import json

import numpy as np
import pytest

from lib.dataset.stats import percentile
from lib.featurizer.connection import N_CONNECTION_FEATURES, connection_features, features_from_arrays
from lib.featurizer.host import HOST_OFFSET, host_features
from lib.featurizer.models import HostSession, TorConnRecord, read_sessions
from lib.featurizer.pipeline import featurize, featurize_file
from lib.utils.errors import DataError


def _connection(duration: float = 10.0, start: float = 0.0, **kwargs) -> TorConnRecord:
    values = dict(
        start=start,
        duration=duration,
        pkts_sent=10,
        pkts_recv=20,
        bytes_sent=1000,
        bytes_recv=4000,
        dest_port=9001,
    )
    values.update(kwargs)
    return TorConnRecord(**values)


def _host(vector: np.ndarray, index: int) -> float:
    return float(vector[index - HOST_OFFSET])


def _random_flow(rng: np.random.Generator, n: int) -> list:
    times = np.cumsum(rng.exponential(0.3, size=n))
    times -= times[0]
    return [[float(t), "out" if rng.random() < 0.5 else "in"] for t in times]


class TestConnectionFeatures:
    def test_four_outgoing_packets(self):
        v = connection_features([[0, "out"], [1, "out"], [2, "out"], [3, "out"]])
        assert v.shape == (N_CONNECTION_FEATURES,)
        assert v[24] == 4
        assert v[44] == 0
        assert v[45] == 100
        assert v[16] == pytest.approx(0.75)

    def test_single_packet_has_zero_interarrival_stats(self):
        v = connection_features([[0.5, "in"]])
        np.testing.assert_array_equal(v[0:12], np.zeros(12))
        assert v[24] == 1
        assert np.isfinite(v).all()

    def test_padding_is_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = connection_features(_random_flow(rng, int(rng.integers(1, 400))))
            np.testing.assert_array_equal(v[143:175], 0.0)
            assert v[116] == 0.0

    def test_percentile_features_match_direct_calls(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            flow = _random_flow(rng, int(rng.integers(2, 80)))
            v = connection_features(flow)
            times = np.array([t for t, _ in flow])
            outgoing = np.array([d == "out" for _, d in flow])
            for block, subset in enumerate((times, times[outgoing], times[~outgoing])):
                for k, p in enumerate((25, 50, 75, 100)):
                    expected = percentile(subset, p) if subset.size else 0.0
                    assert v[12 + 4 * block + k] == pytest.approx(expected, abs=1e-12)
            assert v[44] + v[45] == pytest.approx(100.0)

    def test_concentration_and_group_sums(self):
        directions = ["out"] * 30 + ["in"] * 10
        v = connection_features([[0.1 * i, d] for i, d in enumerate(directions)])
        # chunks of 20 packets: 20 outgoing, then 10 outgoing + 10 incoming
        assert v[32] == pytest.approx(15.0)
        assert v[43] == 20.0
        assert v[46] == 20.0 and v[47] == 10.0
        assert v[138] == pytest.approx(30.0)
        assert v[142] == pytest.approx(v[24:31].sum())

    def test_packets_per_second_buckets(self):
        flow = [[0.0, "out"], [0.5, "in"], [1.2, "out"], [3.9, "in"]]
        v = connection_features(flow)
        np.testing.assert_array_equal(v[117:121], [2, 1, 0, 1])
        assert v[41] == 0.0
        assert v[42] == 2.0

    def test_empty_flow_rejected(self):
        with pytest.raises(DataError):
            features_from_arrays(np.zeros(0), np.zeros(0, dtype=bool))

    def test_decreasing_times_rejected(self):
        with pytest.raises(ValueError):
            connection_features([[1.0, "out"], [0.5, "in"]])


class TestHostFeatures:
    def test_duration_statistics(self):
        session = HostSession(connections=[_connection(10), _connection(20), _connection(33.42)])
        v = host_features(session)
        assert _host(v, 183) == pytest.approx(21.14)
        assert _host(v, 184) == pytest.approx(10.0)
        assert _host(v, 185) == pytest.approx(33.42)
        assert _host(v, 186) == 3

    def test_no_connections_gives_zero_aggregates(self):
        session = HostSession(dns_nxdomain=4, tor_keyword_urls=2)
        v = host_features(session)
        np.testing.assert_array_equal(v[: 205 - HOST_OFFSET + 1], 0.0)
        assert _host(v, 206) == 4
        assert _host(v, 214) == 2

    def test_failed_states_counted(self):
        session = HostSession(
            connections=[_connection(state="established"), _connection(state="S0"), _connection(state="REJ")]
        )
        assert _host(host_features(session), 176) == 2

    def test_ports_and_rates(self):
        session = HostSession(
            connections=[
                _connection(start=0.0, duration=5.0, dest_port=443),
                _connection(start=10.0, duration=5.0, dest_port=8080),
                _connection(start=30.0, duration=10.0, dest_port=8080),
                _connection(start=35.0, duration=5.0, dest_port=7000),
            ]
        )
        v = host_features(session)
        assert _host(v, 175) == 4
        assert _host(v, 177) == pytest.approx(4 / 40.0)
        assert _host(v, 179) == 3
        assert _host(v, 180) == 8080
        assert _host(v, 181) == 2
        assert _host(v, 182) == 8080
        assert _host(v, 187) == pytest.approx(35.0 / 3)

    def test_repeated_non_standard_port_counted_once(self):
        session = HostSession(
            connections=[
                _connection(start=0.0, dest_port=8080),
                _connection(start=20.0, dest_port=8080),
                _connection(start=40.0, dest_port=443),
            ]
        )
        v = host_features(session)
        assert _host(v, 179) == 2
        assert _host(v, 181) == 1
        assert _host(v, 182) == 8080

    def test_per_connection_totals(self):
        session = HostSession(
            connections=[
                _connection(pkts_sent=1, pkts_recv=3, bytes_sent=100, bytes_recv=300),
                _connection(pkts_sent=1, pkts_recv=5, bytes_sent=100, bytes_recv=500),
            ]
        )
        v = host_features(session)
        assert _host(v, 188) == pytest.approx(5.0)  # mean packets per connection
        assert _host(v, 191) == pytest.approx(500.0)  # mean data exchanged
        assert _host(v, 196) == 100.0  # mode of data sent
        assert _host(v, 203) == pytest.approx(400.0)  # mean data received

    def test_longer_connections_raise_mean_duration(self):
        base = [_connection(d) for d in (3.0, 8.0, 40.0)]
        longer = [_connection(d + 1.5) for d in (3.0, 8.0, 40.0)]
        before = host_features(HostSession(connections=base))
        after = host_features(HostSession(connections=longer))
        assert _host(after, 183) > _host(before, 183)
        assert _host(after, 185) >= _host(before, 185)


class TestFeaturize:
    def test_composition_of_both_halves(self):
        flow = [[0.0, "out"], [0.2, "in"], [1.4, "out"]]
        session = HostSession(connections=[_connection()], flows=[flow])
        v = featurize(session)
        assert v.shape == (215,)
        np.testing.assert_array_equal(v[:175], connection_features(flow))
        np.testing.assert_array_equal(v[175:], host_features(session))

    def test_dns_counter_is_local(self):
        common = dict(connections=[_connection()], flows=[[[0.0, "out"], [0.3, "in"]]])
        a = featurize(HostSession(dns_nxdomain=1, **common))
        b = featurize(HostSession(dns_nxdomain=6, **common))
        assert np.nonzero(a != b)[0].tolist() == [206]
        np.testing.assert_array_equal(featurize(HostSession(dns_nxdomain=1, **common)), a)

    def test_flows_merge_by_connection_start(self):
        session = HostSession(
            connections=[_connection(start=100.0), _connection(start=101.0)],
            flows=[[[0.0, "out"], [2.0, "out"]], [[0.0, "in"]]],
        )
        v = featurize(session)
        assert v[24] == 3
        # merged order: out@0, in@1, out@2
        assert v[35] == pytest.approx(1.0)
        assert v[36] == pytest.approx(1.0)

    def test_empty_session_rejected(self):
        with pytest.raises(DataError):
            featurize(HostSession(host_id="idle"))

    def test_featurize_file(self, tmp_path):
        path = tmp_path / "sessions.jsonl"
        lines = [
            {
                "host_id": "h1",
                "labels": ["Ransomware"],
                "flows": [[[0.0, "out"], [0.05, "in"]]],
                "connections": [
                    {"start": 0.0, "duration": 12.5, "pkts_sent": 10, "pkts_recv": 14,
                     "bytes_sent": 2048, "bytes_recv": 8192, "dest_port": 9001}
                ],
                "dns_nxdomain": 3,
            },
            {"host_id": "h2", "labels": ["Downloader", "Grayware"], "flows": [[[0.0, "in"]]]},
        ]
        path.write_text("\n".join(json.dumps(line) for line in lines) + "\n\n", encoding="utf-8")

        data = featurize_file(path)
        assert len(data) == 2
        assert data.source_ids == ("h1", "h2")
        assert data.sample(0).labels.names == ["Ransomware"]
        assert data.column(183)[0] == pytest.approx(12.5)
        assert data.column(206)[0] == 3

    def test_invalid_session_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"host_id": "ok", "flows": [[[0, "out"]]]}\n{"labels": ["Trojan"]}\n', encoding="utf-8")
        with pytest.raises(DataError) as excinfo:
            list(read_sessions(path))
        assert excinfo.value.row == 2
