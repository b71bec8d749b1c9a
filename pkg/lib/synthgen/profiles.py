"""
Generator configuration: class profiles, the built-in corpus profiles and
their ``key = value`` serialization.

The built-in profiles reproduce the label structure of the D5, D10, D20, D30
and D40 corpora (D5: 2,027 instances, 22 label combinations, Unknown never
co-occurring) and plant class-conditional signals on the features known to
drive the classifiers, e.g. Tor connection durations (183, 185) for
Ransomware and Downloader.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..dataset.schema import N_FEATURES, FeatureSchema, LabelSet, canonical_schema
from ..utils.config import read_key_value_file, write_key_value_file
from ..utils.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

Signal = Tuple[int, float, float]  # (feature index, mean, std)

ALLOCATION_TABLE_VERSION = 1

# Per-combination instance counts. Each label's total matches the D5 class
# distribution (Grayware 1263, Downloader 1186, Ransomware 365, Miner 384,
# Virus 59, Spyware 45, Backdoor 59, Keylogger 15, Worm 75, Unknown 179).
D5_ALLOCATION: Tuple[Tuple[Tuple[str, ...], int], ...] = (
    (("Unknown",), 179),
    (("Keylogger", "Spyware", "Grayware"), 10),
    (("Keylogger",), 5),
    (("Spyware", "Grayware"), 20),
    (("Spyware",), 15),
    (("Backdoor",), 24),
    (("Backdoor", "Grayware", "Downloader"), 35),
    (("Worm",), 20),
    (("Worm", "Grayware"), 25),
    (("Worm", "Grayware", "Miner"), 30),
    (("Virus",), 25),
    (("Virus", "Grayware"), 20),
    (("Virus", "Downloader"), 14),
    (("Miner",), 54),
    (("Miner", "Grayware"), 100),
    (("Miner", "Grayware", "Downloader"), 200),
    (("Ransomware",), 135),
    (("Ransomware", "Downloader"), 80),
    (("Ransomware", "Grayware", "Downloader"), 150),
    (("Grayware", "Downloader"), 494),
    (("Downloader",), 213),
    (("Grayware",), 179),
)

# Corpora built from more captures per binary keep a subset of the D5
# combinations: D10 drops Worm+Grayware, D20 also drops Spyware+Grayware.
D10_ALLOCATION: Tuple[Tuple[Tuple[str, ...], int], ...] = (
    (("Unknown",), 319),
    (("Keylogger", "Spyware", "Grayware"), 18),
    (("Keylogger",), 10),
    (("Spyware", "Grayware"), 40),
    (("Spyware",), 29),
    (("Backdoor",), 47),
    (("Backdoor", "Grayware", "Downloader"), 70),
    (("Worm",), 20),
    (("Worm", "Grayware", "Miner"), 28),
    (("Virus",), 48),
    (("Virus", "Grayware"), 40),
    (("Virus", "Downloader"), 30),
    (("Miner",), 97),
    (("Miner", "Grayware"), 150),
    (("Miner", "Grayware", "Downloader"), 350),
    (("Ransomware",), 270),
    (("Ransomware", "Downloader"), 160),
    (("Ransomware", "Grayware", "Downloader"), 299),
    (("Grayware", "Downloader"), 919),
    (("Downloader",), 333),
    (("Grayware",), 380),
)

D20_ALLOCATION: Tuple[Tuple[Tuple[str, ...], int], ...] = (
    (("Unknown",), 591),
    (("Keylogger", "Spyware", "Grayware"), 30),
    (("Keylogger",), 28),
    (("Spyware",), 86),
    (("Backdoor",), 96),
    (("Backdoor", "Grayware", "Downloader"), 140),
    (("Worm",), 51),
    (("Worm", "Grayware", "Miner"), 40),
    (("Virus",), 94),
    (("Virus", "Grayware"), 80),
    (("Virus", "Downloader"), 60),
    (("Miner",), 90),
    (("Miner", "Grayware"), 170),
    (("Miner", "Grayware", "Downloader"), 250),
    (("Ransomware",), 555),
    (("Ransomware", "Downloader"), 300),
    (("Ransomware", "Grayware", "Downloader"), 600),
    (("Grayware", "Downloader"), 1524),
    (("Downloader",), 498),
    (("Grayware",), 852),
)

# No Worm instances.
D30_ALLOCATION: Tuple[Tuple[Tuple[str, ...], int], ...] = (
    (("Unknown",), 615),
    (("Keylogger", "Spyware", "Grayware"), 50),
    (("Keylogger",), 37),
    (("Spyware",), 125),
    (("Backdoor",), 50),
    (("Backdoor", "Grayware", "Downloader"), 40),
    (("Virus",), 100),
    (("Virus", "Downloader"), 74),
    (("Miner", "Grayware", "Downloader"), 174),
    (("Ransomware",), 1003),
    (("Ransomware", "Grayware", "Downloader"), 1000),
    (("Grayware", "Downloader"), 857),
    (("Downloader",), 398),
    (("Grayware",), 819),
)

# No Miner, Spyware, Keylogger or Worm instances. The class totals need more
# label assignments than 1,940 instances of D5 combinations can carry, so the
# total is the smallest that keeps every class count: 2,078.
D40_ALLOCATION: Tuple[Tuple[Tuple[str, ...], int], ...] = (
    (("Unknown",), 235),
    (("Backdoor",), 20),
    (("Backdoor", "Grayware", "Downloader"), 100),
    (("Virus",), 32),
    (("Virus", "Grayware"), 200),
    (("Ransomware",), 653),
    (("Ransomware", "Grayware", "Downloader"), 247),
    (("Grayware",), 591),
)

ALLOCATIONS: Dict[str, Tuple[Tuple[Tuple[str, ...], int], ...]] = {
    "d5": D5_ALLOCATION,
    "d10": D10_ALLOCATION,
    "d20": D20_ALLOCATION,
    "d30": D30_ALLOCATION,
    "d40": D40_ALLOCATION,
}
DATASET_PROFILES = tuple(ALLOCATIONS)

# Per-label planted signals; a combination averages its members' means and stds.
# Connection duration (183 mean, 185 max) is the dominant Downloader and
# Ransomware signal: short for Downloader, moderate for Ransomware.
LABEL_SIGNALS: Dict[str, Tuple[Signal, ...]] = {
    "Downloader": ((183, 7.58, 1.0), (185, 13.63, 2.0), (188, 16.0, 3.0), (197, 15.0, 3.0)),
    "Ransomware": ((183, 21.14, 9.0), (185, 48.01, 20.0), (199, 22.0, 9.0), (17, 25.0, 10.0), (16, 20.0, 8.0)),
    "Grayware": ((202, 60.0, 6.0), (196, 300.0, 30.0)),
    "Miner": ((187, 120.0, 10.0), (194, 800.0, 50.0), (199, 45.0, 4.0)),
    "Virus": ((203, 500.0, 40.0), (186, 25.0, 3.0)),
    "Worm": ((184, 30.0, 3.0), (190, 90.0, 6.0)),
    "Backdoor": ((201, 150.0, 10.0),),
    "Keylogger": ((200, 16.0, 3.0), (191, 16.0, 3.0), (198, 16.0, 3.0)),
    "Spyware": ((195, 16.0, 3.0), (189, 16.0, 3.0), (193, 16.0, 3.0)),
    "Unknown": ((205, 200.0, 15.0), (192, 50.0, 4.0)),
}

# Columns that are zero for every instance of every corpus profile.
D5_ZERO_FEATURES: Tuple[int, ...] = tuple(range(143, 175)) + (176, 178) + tuple(range(206, 215))

BACKGROUND_MEAN = 10.0
BACKGROUND_STD = 3.0

# Duration features of combinations without a duration signal: long-lived circuits.
DURATION_BACKGROUND: Dict[int, Tuple[float, float]] = {183: (40.0, 4.0), 185: (80.0, 8.0)}


@dataclass
class ClassProfile:
    """One label combination and how its feature values are drawn."""

    combo: LabelSet
    count: int
    signals: List[Signal] = field(default_factory=list)
    background_mean: float = BACKGROUND_MEAN
    background_std: float = BACKGROUND_STD

    def validate(self, n_features: int = N_FEATURES) -> None:
        if self.count <= 0:
            raise ConfigError(f"profile {self.combo} needs a positive count")
        if self.combo.popcount == 0:
            raise ConfigError("profile combo must contain at least one label")
        if self.background_std < 0:
            raise ConfigError(f"profile {self.combo} has a negative background std")
        seen = set()
        for index, _, std in self.signals:
            if not 0 <= index < n_features:
                raise ConfigError(f"profile {self.combo} signal index {index} out of range")
            if std < 0:
                raise ConfigError(f"profile {self.combo} signal {index} has a negative std")
            if index in seen:
                raise ConfigError(f"profile {self.combo} repeats signal index {index}")
            seen.add(index)


@dataclass
class GeneratorConfig:
    """Everything needed to generate a synthetic dataset deterministically."""

    profiles: List[ClassProfile]
    seed: int = 0
    schema: FeatureSchema = field(default_factory=canonical_schema)
    clamp_nonnegative: bool = True
    decimals: Optional[int] = None
    zero_features: Tuple[int, ...] = ()
    name: str = "synthetic"

    def validate(self) -> None:
        if not self.profiles:
            raise ConfigError("generator config needs at least one profile")
        if not self.schema.is_full:
            raise ConfigError("generator config needs the full feature schema")
        combos = [profile.combo for profile in self.profiles]
        if len(set(combos)) != len(combos):
            raise ConfigError("generator profiles must have distinct label combinations")
        for profile in self.profiles:
            profile.validate(len(self.schema))
        if any(not 0 <= index < len(self.schema) for index in self.zero_features):
            raise ConfigError("zero feature index out of range")

    @property
    def total(self) -> int:
        return sum(profile.count for profile in self.profiles)


def combine_signals(names: Sequence[str]) -> List[Signal]:
    """Average the member labels' signals feature by feature.

    Duration features no member signals on take ``DURATION_BACKGROUND``.
    """
    collected: Dict[int, List[Tuple[float, float]]] = {}
    for name in names:
        for index, mean, std in LABEL_SIGNALS[name]:
            collected.setdefault(index, []).append((mean, std))
    for index, moments in DURATION_BACKGROUND.items():
        collected.setdefault(index, [moments])
    return [
        (index, sum(m for m, _ in values) / len(values), sum(s for _, s in values) / len(values))
        for index, values in sorted(collected.items())
    ]


def dataset_profile(name: str, seed: int = 0) -> GeneratorConfig:
    """Generator config mirroring one of the D5/D10/D20/D30/D40 corpora.

    Raises:
        ConfigError: unknown profile name
    """
    key = name.lower()
    if key not in ALLOCATIONS:
        raise ConfigError(f"Unknown dataset profile '{name}' (expected one of {', '.join(DATASET_PROFILES)})")
    profiles = [
        ClassProfile(combo=LabelSet.from_names(names), count=count, signals=combine_signals(names))
        for names, count in ALLOCATIONS[key]
    ]
    return GeneratorConfig(
        profiles=profiles,
        seed=seed,
        clamp_nonnegative=True,
        decimals=0,
        zero_features=D5_ZERO_FEATURES,
        name=key,
    )


def default_d5_profile(seed: int = 0) -> GeneratorConfig:
    """Generator config mirroring the D5 corpus (allocation table version 1)."""
    return dataset_profile("d5", seed)


def _format_indices(indices: Sequence[int]) -> str:
    return ",".join(str(i) for i in indices)


def _parse_indices(text: str) -> Tuple[int, ...]:
    indices: List[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part:
            low, high = part.split("-", 1)
            indices.extend(range(int(low), int(high) + 1))
        else:
            indices.append(int(part))
    return tuple(indices)


def config_to_key_values(config: GeneratorConfig) -> Dict[str, object]:
    values: Dict[str, object] = {
        "name": config.name,
        "seed": config.seed,
        "clamp_nonnegative": config.clamp_nonnegative,
        "decimals": config.decimals,
        "zero_features": _format_indices(config.zero_features),
        "allocation_version": ALLOCATION_TABLE_VERSION,
    }
    for i, profile in enumerate(config.profiles):
        prefix = f"profile.{i:02d}"
        values[f"{prefix}.combo"] = str(profile.combo)
        values[f"{prefix}.count"] = profile.count
        values[f"{prefix}.background_mean"] = profile.background_mean
        values[f"{prefix}.background_std"] = profile.background_std
        values[f"{prefix}.signals"] = ",".join(f"{idx}:{mean!r}:{std!r}" for idx, mean, std in profile.signals)
    return values


def dump_config(config: GeneratorConfig, path: Union[str, Path]) -> None:
    """Write a generator config as a ``key = value`` file."""
    write_key_value_file(path, config_to_key_values(config))
    logger.info(f"Generator config written to {path}")


def config_from_key_values(values: Dict[str, Optional[str]]) -> GeneratorConfig:
    profiles: Dict[str, Dict[str, str]] = {}
    top: Dict[str, str] = {}
    for key, value in values.items():
        value = "" if value is None else value
        if key.startswith("profile."):
            parts = key.split(".")
            if len(parts) != 3:
                raise ConfigError(f"Malformed profile key '{key}'")
            profiles.setdefault(parts[1], {})[parts[2]] = value
        else:
            top[key] = value

    try:
        parsed = []
        for key in sorted(profiles, key=int):
            entry = profiles[key]
            signals = []
            for item in filter(None, (s.strip() for s in entry.get("signals", "").split(","))):
                index, mean, std = item.split(":")
                signals.append((int(index), float(mean), float(std)))
            parsed.append(
                ClassProfile(
                    combo=LabelSet.from_names(entry["combo"].split("|")),
                    count=int(entry["count"]),
                    signals=signals,
                    background_mean=float(entry.get("background_mean", BACKGROUND_MEAN)),
                    background_std=float(entry.get("background_std", BACKGROUND_STD)),
                )
            )
        decimals = top.get("decimals", "")
        config = GeneratorConfig(
            profiles=parsed,
            seed=int(top.get("seed", "0")),
            clamp_nonnegative=top.get("clamp_nonnegative", "true").lower() in {"1", "true", "yes", "on"},
            decimals=int(decimals) if decimals not in {"", "None", "none"} else None,
            zero_features=_parse_indices(top.get("zero_features", "")),
            name=top.get("name", "synthetic"),
        )
    except (KeyError, ValueError, DataError) as e:
        raise ConfigError(f"Invalid generator config: {e}")
    config.validate()
    return config


def load_config(path: Union[str, Path]) -> GeneratorConfig:
    """Read a generator config written by ``dump_config`` (or by hand)."""
    if not Path(path).exists():
        raise ConfigError(f"Generator config not found: {path}")
    return config_from_key_values(read_key_value_file(path))
