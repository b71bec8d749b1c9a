"""
Binary container for trained LaMP models.

Layout (all integers little-endian uint32):
    magic ``ONIONLABEL-LAMP\\0`` (16 bytes), format version,
    header length, UTF-8 JSON header (config, vocabulary values, label mask,
    schema hash, labels, feature names, parameter names),
    tensor count, then per tensor: ndim, dims..., float32 little-endian data.
"""

import json
import logging
import struct
from dataclasses import asdict
from typing import Any, BinaryIO, Dict, List

import numpy as np
import torch

from ..dataset.schema import LABELS
from ..utils.config import LampConfig
from ..utils.errors import DataError, SchemaMismatchError
from .model import LabelMessagePassing
from .training import LampClassifier
from .vocab import ValueVocab

logger = logging.getLogger(__name__)

MAGIC = b"ONIONLABEL-LAMP\x00"
FORMAT_VERSION = 1

_UINT = struct.Struct("<I")


def _write_uint(stream: BinaryIO, value: int) -> None:
    stream.write(_UINT.pack(value))


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise DataError("truncated LaMP model file")
    return data


def _read_uint(stream: BinaryIO) -> int:
    return _UINT.unpack(_read_exact(stream, _UINT.size))[0]


def write_lamp(model: LampClassifier, stream: BinaryIO) -> None:
    state = model.network.state_dict()
    header: Dict[str, Any] = dict(model.header())
    header.update(
        {
            "format_version": FORMAT_VERSION,
            "config": asdict(model.config),
            "vocab": model.vocab.values.tolist(),
            "label_mask": model.label_mask.astype(int).tolist(),
            "n_features": model.network.n_features,
            "parameters": list(state.keys()),
        }
    )
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")

    stream.write(MAGIC)
    _write_uint(stream, FORMAT_VERSION)
    _write_uint(stream, len(encoded))
    stream.write(encoded)
    _write_uint(stream, len(state))
    for tensor in state.values():
        array = tensor.detach().cpu().numpy().astype("<f4")
        _write_uint(stream, array.ndim)
        for dim in array.shape:
            _write_uint(stream, dim)
        stream.write(array.tobytes(order="C"))


def read_lamp(stream: BinaryIO) -> LampClassifier:
    """Rebuild a LampClassifier; raises DataError on a malformed container."""
    if _read_exact(stream, len(MAGIC)) != MAGIC:
        raise DataError("not a LaMP model file")
    version = _read_uint(stream)
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported LaMP model format version {version}")
    try:
        header = json.loads(_read_exact(stream, _read_uint(stream)).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"corrupt LaMP model header: {e}")

    if header.get("labels") != list(LABELS):
        raise SchemaMismatchError("model label order differs from the canonical label order")

    config = LampConfig()
    config.update(header["config"])
    vocab = ValueVocab(np.asarray(header["vocab"], dtype=np.float64))
    mask = np.asarray(header["label_mask"], dtype=bool)
    network = LabelMessagePassing(int(header["n_features"]), vocab.n_tokens, mask, config)

    names: List[str] = header["parameters"]
    if _read_uint(stream) != len(names):
        raise DataError("tensor count does not match the header")
    state = {}
    for name in names:
        shape = tuple(_read_uint(stream) for _ in range(_read_uint(stream)))
        count = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(_read_exact(stream, 4 * count), dtype="<f4").reshape(shape)
        state[name] = torch.from_numpy(data.astype(np.float32))
    try:
        network.load_state_dict(state)
    except RuntimeError as e:
        raise DataError(f"LaMP parameters do not fit the recorded config: {e}")

    model = LampClassifier(header["feature_names"], vocab, network, config, mask)
    if model.schema_hash != header["schema_hash"]:
        raise SchemaMismatchError("schema hash in the model file does not match its feature names")
    logger.debug(f"Loaded LaMP model: {len(names)} tensors, {vocab.n_tokens} tokens")
    return model
