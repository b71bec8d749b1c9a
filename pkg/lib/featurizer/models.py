"""
Session log models for feature extraction.

A session log is JSON-lines, one ``HostSession`` per line. Packet lists are
arrays of ``[time, "in"|"out"]`` pairs; a flow may be given as a bare packet
list or as ``{"packets": [...]}``.
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterator, List, Literal, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..dataset.schema import LABEL_INDEX
from ..utils.errors import DataError

logger = logging.getLogger(__name__)

STANDARD_TOR_PORTS = frozenset({443, 9001, 9030})
FAILED_STATES = frozenset({"S0", "REJ"})

_DIRECTIONS = {"in": "incoming", "out": "outgoing", "incoming": "incoming", "outgoing": "outgoing"}


class PacketMeta(BaseModel):
    """Timestamp (seconds since flow start) and direction of one packet."""

    time: float = Field(ge=0)
    direction: Literal["outgoing", "incoming"]

    @model_validator(mode="before")
    @classmethod
    def _from_pair(cls, value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError("packet must be a [time, direction] pair")
            time, direction = value
            return {"time": time, "direction": _DIRECTIONS.get(str(direction), direction)}
        if isinstance(value, dict) and "direction" in value:
            value = dict(value)
            value["direction"] = _DIRECTIONS.get(str(value["direction"]), value["direction"])
        return value


class FlowTrace(BaseModel):
    """Ordered packet metadata of one flow."""

    packets: List[PacketMeta] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _from_list(cls, value: Any) -> Any:
        if isinstance(value, list):
            return {"packets": value}
        return value

    @model_validator(mode="after")
    def _times_non_decreasing(self) -> "FlowTrace":
        times = [packet.time for packet in self.packets]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("packet times must be non-decreasing within a flow")
        return self

    def arrays(self) -> tuple:
        """(times, outgoing mask) as numpy arrays."""
        times = np.array([p.time for p in self.packets], dtype=np.float64)
        outgoing = np.array([p.direction == "outgoing" for p in self.packets], dtype=bool)
        return times, outgoing

    @classmethod
    def from_pairs(cls, pairs: List[Union[list, tuple]]) -> "FlowTrace":
        return cls.model_validate({"packets": pairs})


class TorConnRecord(BaseModel):
    """One Tor connection as seen in the host's connection log."""

    start: float
    duration: float = Field(ge=0)
    pkts_sent: int = Field(ge=0)
    pkts_recv: int = Field(ge=0)
    bytes_sent: int = Field(ge=0)
    bytes_recv: int = Field(ge=0)
    dest_port: int = Field(ge=1, le=65535)
    state: Literal["established", "S0", "REJ"] = "established"

    @property
    def failed(self) -> bool:
        return self.state in FAILED_STATES


class HostSession(BaseModel):
    """Everything observed for one host/capture."""

    host_id: str = ""
    source_id: str = ""
    labels: List[str] = Field(default_factory=list)
    connections: List[TorConnRecord] = Field(default_factory=list)
    flows: List[FlowTrace] = Field(default_factory=list)
    dns_nxdomain: int = Field(default=0, ge=0)
    dns_refused: int = Field(default=0, ge=0)
    dns_servfail: int = Field(default=0, ge=0)
    onion_accesses: int = Field(default=0, ge=0)
    unique_onion_domains: int = Field(default=0, ge=0)
    rejected_onion_queries: int = Field(default=0, ge=0)
    onion_domains_total: int = Field(default=0, ge=0)
    consensus_links: int = Field(default=0, ge=0)
    tor_keyword_urls: int = Field(default=0, ge=0)

    @field_validator("labels")
    @classmethod
    def _known_labels(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in LABEL_INDEX]
        if unknown:
            raise ValueError(f"unknown label name(s) {unknown}")
        return value

    def counters(self) -> List[int]:
        return [
            self.dns_nxdomain,
            self.dns_refused,
            self.dns_servfail,
            self.onion_accesses,
            self.unique_onion_domains,
            self.rejected_onion_queries,
            self.onion_domains_total,
            self.consensus_links,
            self.tor_keyword_urls,
        ]


def read_sessions(path: Union[str, Path]) -> Iterator[HostSession]:
    """Yield validated sessions from a JSON-lines file (blank lines skipped).

    Raises:
        DataError: invalid JSON or session, with the 1-based line number
    """
    session_path = Path(path)
    if not session_path.exists():
        raise DataError(f"Session log not found: {path}")

    with open(session_path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                yield HostSession.model_validate(json.loads(line))
            except json.JSONDecodeError as e:
                raise DataError(f"invalid JSON: {e.msg}", row=line_number)
            except ValidationError as e:
                first = e.errors()[0]
                location = ".".join(str(part) for part in first["loc"])
                raise DataError(f"invalid session field {location}: {first['msg']}", row=line_number)
