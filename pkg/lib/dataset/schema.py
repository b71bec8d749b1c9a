"""
Feature schema and label set definitions.

The canonical schema has 215 features: indices 0-174 are connection-level
statistics computed from packet metadata, indices 175-214 are host-level Tor
connection and DNS statistics. Columns are named ``feature_NNN`` by their
original index so identity survives column reduction.
"""

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..utils.errors import DataError

LABELS: Tuple[str, ...] = (
    "Backdoor",
    "Downloader",
    "Grayware",
    "Keylogger",
    "Miner",
    "Ransomware",
    "Spyware",
    "Unknown",
    "Virus",
    "Worm",
)
N_LABELS = len(LABELS)
LABEL_INDEX: Dict[str, int] = {name: i for i, name in enumerate(LABELS)}

# Classes with more than 300 instances in the D5 corpus.
MAIN_LABELS: Tuple[str, ...] = ("Downloader", "Grayware", "Miner", "Ransomware")

N_FEATURES = 215
N_CONNECTION_FEATURES = 175


@dataclass(frozen=True)
class LabelSet:
    """Fixed 10-slot boolean set over the canonical (alphabetical) label order."""

    bits: Tuple[bool, ...]

    def __post_init__(self):
        if len(self.bits) != N_LABELS:
            raise ValueError(f"LabelSet needs {N_LABELS} bits, got {len(self.bits)}")
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "LabelSet":
        bits = [False] * N_LABELS
        for name in names:
            if name not in LABEL_INDEX:
                raise DataError(f"Unknown label name '{name}'")
            bits[LABEL_INDEX[name]] = True
        return cls(tuple(bits))

    @classmethod
    def from_bits(cls, bits: Sequence[bool]) -> "LabelSet":
        return cls(tuple(bool(b) for b in bits))

    @classmethod
    def all(cls) -> "LabelSet":
        return cls((True,) * N_LABELS)

    @property
    def names(self) -> List[str]:
        return [LABELS[i] for i, bit in enumerate(self.bits) if bit]

    @property
    def popcount(self) -> int:
        return sum(self.bits)

    def to_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)

    def __contains__(self, name: str) -> bool:
        return self.bits[LABEL_INDEX[name]]

    def __str__(self) -> str:
        return "|".join(self.names)


@dataclass(frozen=True)
class FeatureDescriptor:
    index: int
    name: str
    group: str  # "connection" or "host"
    description: str


def feature_name(index: int) -> str:
    return f"feature_{index:03d}"


def parse_feature_name(name: str) -> int:
    """Recover the original index from a ``feature_NNN`` column name."""
    prefix, _, digits = name.partition("_")
    if prefix != "feature" or len(digits) != 3 or not digits.isdigit():
        raise DataError(f"Not a feature column: '{name}'")
    index = int(digits)
    if index >= N_FEATURES:
        raise DataError(f"Feature index out of range: '{name}'")
    return index


def _connection_descriptions() -> Dict[int, str]:
    text: Dict[int, str] = {}
    stats = ("max", "mean", "std. deviation", "75th percentile")
    lists = ("total", "outgoing", "incoming")
    for block, which in enumerate(lists):
        for k, stat in enumerate(stats):
            text[block * 4 + k] = f"Inter-arrival times ({which}): {stat}"
        for k, pct in enumerate((25, 50, 75, 100)):
            text[12 + block * 4 + k] = f"{pct}th percentile of the list of {which} packet times"
        text[24 + block] = f"Number of {which} packets"
    text.update(
        {
            27: "Outgoing packets within the first 30 packets",
            28: "Incoming packets within the first 30 packets",
            29: "Outgoing packets within the last 30 packets",
            30: "Incoming packets within the last 30 packets",
            31: "Packet concentration (std. deviation)",
            32: "Packet concentration (mean)",
            33: "Number of packets per second (mean)",
            34: "Number of packets per second (std. deviation)",
            35: "Outgoing packet ordering (mean)",
            36: "Incoming packet ordering (mean)",
            37: "Outgoing packet ordering (std. deviation)",
            38: "Incoming packet ordering (std. deviation)",
            39: "Packet concentration (median)",
            40: "Number of packets per second (median)",
            41: "Number of packets per second (min)",
            42: "Number of packets per second (max)",
            43: "Packet concentration (max)",
            44: "Percentage incoming packets",
            45: "Percentage outgoing packets",
            138: "Sum of alternative concentration features",
            139: "Sum of alternative number of packets per second features",
            140: "Sum of inter-arrival time based features",
            141: "Sum of packet time percentile features",
            142: "Sum of number of packet-based features",
        }
    )
    for slot, index in enumerate(range(46, 116)):
        text[index] = f"Alternative concentration (slot {slot})"
    text[116] = "Alternative concentration padding (zero)"
    for slot, index in enumerate(range(117, 138)):
        text[index] = f"Alternative number of packets per second (second {slot})"
    for index in range(143, 175):
        text[index] = "Padded feature (zero)"
    return text


_HOST_DESCRIPTIONS: Dict[int, str] = {
    175: "Number of Tor connections",
    176: "Number of failed/rejected Tor connection attempts (state S0/REJ)",
    177: "Rate of Tor connections per second",
    178: "Rate of failed attempts per second",
    179: "Number of unique destination ports used across Tor connections",
    180: "Most used destination port",
    181: "Number of non-standard destination ports seen in Tor connections",
    182: "Most frequent non-standard destination port used",
    183: "Average duration of Tor connections (seconds)",
    184: "Smallest duration Tor connection seen per host (seconds)",
    185: "Max duration Tor connection per host (seconds)",
    186: "Number of short-duration Tor connections (max 1 minute)",
    187: "Average time gap between each Tor connection",
    206: "Total number of DNS queries answered NXDOMAIN",
    207: "Total number of DNS queries answered REFUSED",
    208: "Total number of DNS queries answered SERVFAIL",
    209: "Total number of onion domain accesses",
    210: "Total number of unique onion domains accessed",
    211: "Total number of rejected onion domain queries",
    212: "Total number of onion domains accessed",
    213: "Total number of links with 'consensus' seen",
    214: "Total number of URLs with 'tor' keyword",
}

_PER_CONNECTION_TOTALS = (
    "total transmitted packets",
    "total data exchanged",
    "total data sent",
    "packets sent",
    "packets received",
    "total data received",
)
for _block, _what in enumerate(_PER_CONNECTION_TOTALS):
    for _k, _stat in enumerate(("Mean", "Median", "Mode")):
        _HOST_DESCRIPTIONS[188 + 3 * _block + _k] = f"{_stat} of the {_what} in a Tor connection"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature descriptors; may be a reduced subset of the canonical 215."""

    entries: Tuple[FeatureDescriptor, ...]

    def __post_init__(self):
        indices = [entry.index for entry in self.entries]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise DataError("Feature schema indices must be unique and ascending")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def names(self) -> List[str]:
        return [entry.name for entry in self.entries]

    @property
    def indices(self) -> List[int]:
        return [entry.index for entry in self.entries]

    @property
    def is_full(self) -> bool:
        return len(self.entries) == N_FEATURES

    def position(self, index: int) -> int:
        """Column position of an original feature index."""
        for pos, entry in enumerate(self.entries):
            if entry.index == index:
                return pos
        raise DataError(f"Feature {index} is not part of this schema")

    def subset(self, keep: Sequence[int]) -> "FeatureSchema":
        """Schema restricted to the given column positions."""
        return FeatureSchema(tuple(self.entries[pos] for pos in keep))

    def hash(self) -> str:
        return schema_hash(self)


def _build_canonical() -> FeatureSchema:
    connection = _connection_descriptions()
    entries = []
    for index in range(N_FEATURES):
        if index < N_CONNECTION_FEATURES:
            entries.append(FeatureDescriptor(index, feature_name(index), "connection", connection[index]))
        else:
            entries.append(FeatureDescriptor(index, feature_name(index), "host", _HOST_DESCRIPTIONS[index]))
    return FeatureSchema(tuple(entries))


CANONICAL_SCHEMA = _build_canonical()


def canonical_schema() -> FeatureSchema:
    """The full 215-feature schema."""
    return CANONICAL_SCHEMA


def schema_from_names(names: Sequence[str]) -> FeatureSchema:
    """Rebuild a (possibly reduced) schema from ``feature_NNN`` column names."""
    return FeatureSchema(tuple(CANONICAL_SCHEMA.entries[parse_feature_name(name)] for name in names))


def schema_hash(schema: FeatureSchema) -> str:
    """Hex sha256 over the ordered column names."""
    return hashlib.sha256("\n".join(schema.names).encode("utf-8")).hexdigest()
