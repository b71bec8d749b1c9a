"""Tests for the synthetic corpus-shaped dataset generator."""

import numpy as np
import pytest

from lib.dataset.core import class_distribution, cooccurrence_graph, label_combinations
from lib.dataset.schema import LABEL_INDEX, LabelSet
from lib.synthgen.generator import generate
from lib.synthgen.profiles import (
    D5_ZERO_FEATURES,
    DURATION_BACKGROUND,
    ClassProfile,
    GeneratorConfig,
    combine_signals,
    dataset_profile,
    default_d5_profile,
    dump_config,
    load_config,
)
from lib.utils.errors import ConfigError

D5_CLASS_TOTALS = {
    "Grayware": 1263,
    "Downloader": 1186,
    "Miner": 384,
    "Ransomware": 365,
    "Unknown": 179,
    "Worm": 75,
    "Virus": 59,
    "Backdoor": 59,
    "Spyware": 45,
    "Keylogger": 15,
}

# (instances, label combinations, class totals in canonical label order:
#  Backdoor, Downloader, Grayware, Keylogger, Miner, Ransomware, Spyware, Unknown, Virus, Worm)
CORPUS_SHAPES = {
    "d10": (3657, 21, (117, 2161, 2294, 28, 625, 729, 87, 319, 118, 48)),
    "d20": (6135, 20, (236, 3372, 3686, 58, 550, 1455, 116, 591, 234, 91)),
    "d30": (5342, 14, (90, 2543, 2940, 87, 174, 2003, 175, 615, 174, 0)),
    "d40": (2078, 8, (120, 347, 1138, 0, 0, 900, 0, 235, 232, 0)),
}


@pytest.fixture(scope="module")
def d5_data():
    return generate(default_d5_profile(seed=1))


def test_d5_label_structure(d5_data):
    assert len(d5_data) == 2027
    assert class_distribution(d5_data) == D5_CLASS_TOTALS
    assert len(label_combinations(d5_data)) == 22
    assert "Unknown" in cooccurrence_graph(d5_data).isolated()


@pytest.mark.parametrize("name", sorted(CORPUS_SHAPES))
def test_corpus_profiles_match_class_distribution(name):
    instances, n_combinations, totals = CORPUS_SHAPES[name]
    data = generate(dataset_profile(name, seed=3))
    assert data.name == name
    assert len(data) == instances
    assert list(class_distribution(data).values()) == list(totals)
    assert len(label_combinations(data)) == n_combinations

    d5_combinations = set(label_combinations(generate(default_d5_profile(seed=0))))
    assert set(label_combinations(data)) <= d5_combinations
    assert "Unknown" in cooccurrence_graph(data).isolated()


def test_later_corpora_drop_grayware_pairs():
    worm_grayware = LabelSet.from_names(["Worm", "Grayware"])
    spyware_grayware = LabelSet.from_names(["Spyware", "Grayware"])
    d10 = {profile.combo for profile in dataset_profile("d10").profiles}
    d20 = {profile.combo for profile in dataset_profile("d20").profiles}
    assert worm_grayware not in d10 and spyware_grayware in d10
    assert worm_grayware not in d20 and spyware_grayware not in d20


def test_unknown_profile_name():
    with pytest.raises(ConfigError):
        dataset_profile("d15")
    assert dataset_profile("D5").name == "d5"


def test_combination_multiset_matches_config():
    config = default_d5_profile(seed=2)
    data = generate(config)
    expected = {profile.combo: profile.count for profile in config.profiles}
    assert label_combinations(data) == expected


def test_d5_zero_columns_and_nonnegative_integers(d5_data):
    zero = list(D5_ZERO_FEATURES)
    assert len(zero) == 43
    np.testing.assert_array_equal(d5_data.features[:, zero], 0.0)
    assert (d5_data.features >= 0).all()
    np.testing.assert_array_equal(d5_data.features, np.round(d5_data.features))


def test_planted_ransomware_duration_mean(d5_data):
    only = d5_data.labels.sum(axis=1) == 1
    rows = only & d5_data.labels[:, LABEL_INDEX["Ransomware"]]
    values = d5_data.column(183)[rows]
    standard_error = 9.0 / np.sqrt(values.size)
    assert abs(values.mean() - 21.14) <= 3 * standard_error + 0.5


def test_duration_signals_in_combinations():
    moments = {index: (mean, std) for index, mean, std in combine_signals(["Grayware", "Downloader"])}
    assert moments[183] == (7.58, 1.0)
    assert moments[185] == (13.63, 2.0)

    mixed = {index: mean for index, mean, _ in combine_signals(["Ransomware", "Downloader"])}
    assert mixed[183] == pytest.approx((21.14 + 7.58) / 2)

    unrelated = {index: (mean, std) for index, mean, std in combine_signals(["Miner"])}
    assert unrelated[183] == DURATION_BACKGROUND[183]
    assert unrelated[185] == DURATION_BACKGROUND[185]


def test_generation_is_deterministic():
    first = generate(default_d5_profile(seed=5))
    second = generate(default_d5_profile(seed=5))
    np.testing.assert_array_equal(first.features, second.features)
    assert first.source_ids == second.source_ids
    third = generate(default_d5_profile(seed=6))
    assert not np.array_equal(first.features, third.features)


def test_zero_std_profile_repeats_the_mean():
    profile = ClassProfile(
        combo=LabelSet.from_names(["Miner"]),
        count=5,
        signals=[(187, 120.0, 0.0)],
        background_mean=2.5,
        background_std=0.0,
    )
    data = generate(GeneratorConfig(profiles=[profile], seed=3))
    expected = np.full(215, 2.5)
    expected[187] = 120.0
    for row in data.features:
        np.testing.assert_array_equal(row, expected)


def test_config_file_round_trip(tmp_path):
    config = default_d5_profile(seed=9)
    path = tmp_path / "d5.conf"
    dump_config(config, path)
    loaded = load_config(path)

    assert loaded.seed == 9
    assert loaded.decimals == 0
    assert loaded.zero_features == config.zero_features
    assert [p.combo for p in loaded.profiles] == [p.combo for p in config.profiles]
    np.testing.assert_array_equal(generate(loaded).features, generate(config).features)


@pytest.mark.parametrize(
    "profiles",
    [
        [],
        [ClassProfile(combo=LabelSet.from_names(["Miner"]), count=0)],
        [ClassProfile(combo=LabelSet.from_names(["Miner"]), count=3, signals=[(300, 1.0, 1.0)])],
        [
            ClassProfile(combo=LabelSet.from_names(["Miner"]), count=3),
            ClassProfile(combo=LabelSet.from_names(["Miner"]), count=4),
        ],
    ],
)
def test_invalid_configs(profiles):
    with pytest.raises(ConfigError):
        generate(GeneratorConfig(profiles=profiles))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.conf")
