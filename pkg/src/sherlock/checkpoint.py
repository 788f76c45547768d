"""Versioned binary model container.

Layout (all integers little-endian):

    bytes 0-3   magic "SHLK"
    bytes 4-5   format version, u16
    u32 length + UTF-8 JSON hyperparameter block
    u32 length + UTF-8 vocabulary block (the lexeme<TAB>id text format)
    parameter tensors in declaration order, raw IEEE-754 float32
    u32 CRC-32 of everything between the magic and this field

Parameters are stored as float32 to halve the artifact size and widened
back to float64 on load.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    CheckpointError,
    ChecksumError,
    NotAModelFileError,
    TruncatedFileError,
    VersionMismatchError,
)
from .model import Hyperparams, ModelParams, parameter_shapes
from .tokenizer import Vocabulary

MAGIC = b"SHLK"
FORMAT_VERSION = 1


def save_model(model: ModelParams, vocab: Vocabulary, path: str | Path) -> None:
    """Write the container; hyperparameters travel inside the model."""
    hp_bytes = json.dumps(model.hp.to_dict(), sort_keys=True).encode("utf-8")
    vocab_bytes = vocab.to_text().encode("utf-8")
    body = bytearray()
    body += struct.pack("<H", FORMAT_VERSION)
    body += struct.pack("<I", len(hp_bytes)) + hp_bytes
    body += struct.pack("<I", len(vocab_bytes)) + vocab_bytes
    for _, arr in model.named_arrays():
        body += arr.astype("<f4").tobytes()
    crc = zlib.crc32(bytes(body))
    Path(path).write_bytes(MAGIC + bytes(body) + struct.pack("<I", crc))


def _read(data: bytes, offset: int, count: int, what: str) -> tuple[bytes, int]:
    if offset + count > len(data):
        raise TruncatedFileError(f"file ends inside the {what}")
    return data[offset : offset + count], offset + count


def load_model(path: str | Path) -> tuple[ModelParams, Vocabulary]:
    """Read a container back, validating magic, version, completeness and
    checksum (in that order) before reconstructing float64 parameters."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise NotAModelFileError(f"{path} is not a model file (bad magic)")
    raw, offset = _read(data, len(MAGIC), 2, "version field")
    version = struct.unpack("<H", raw)[0]
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"model format version {version} is not supported (expected {FORMAT_VERSION})"
        )

    raw, offset = _read(data, offset, 4, "hyperparameter block header")
    hp_len = struct.unpack("<I", raw)[0]
    hp_bytes, offset = _read(data, offset, hp_len, "hyperparameter block")
    try:
        hp = Hyperparams.from_dict(json.loads(hp_bytes.decode("utf-8")))
    except Exception as exc:
        raise CheckpointError(f"unreadable hyperparameter block: {exc}") from exc

    raw, offset = _read(data, offset, 4, "vocabulary block header")
    vocab_len = struct.unpack("<I", raw)[0]
    vocab_bytes, offset = _read(data, offset, vocab_len, "vocabulary block")

    shapes = parameter_shapes(hp)
    tensor_bytes = sum(4 * int(np.prod(shape)) for _, shape in shapes)
    expected_total = offset + tensor_bytes + 4
    if len(data) < expected_total:
        raise TruncatedFileError(
            f"file holds {len(data)} bytes but the declared contents need {expected_total}"
        )
    if len(data) > expected_total:
        raise CheckpointError(f"{len(data) - expected_total} trailing bytes after the checksum")

    stored_crc = struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(data[len(MAGIC) : -4]) != stored_crc:
        raise ChecksumError("checksum mismatch: the file content is corrupted")

    try:
        vocab = Vocabulary.from_text(vocab_bytes.decode("utf-8"))
    except Exception as exc:
        raise CheckpointError(f"unreadable vocabulary block: {exc}") from exc
    if vocab.size != hp.vocab_size:
        raise CheckpointError(
            f"vocabulary holds {vocab.size} ids but hyperparameters declare {hp.vocab_size}"
        )

    arrays: dict[str, np.ndarray] = {}
    for name, shape in shapes:
        count = int(np.prod(shape))
        flat = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        arrays[name] = flat.astype(np.float64).reshape(shape)
        offset += 4 * count

    model = ModelParams(
        hp=hp,
        embedding=arrays["embedding"],
        conv_w=arrays["conv_w"],
        conv_b=arrays["conv_b"],
        dense1_w=arrays["dense1_w"],
        dense1_b=arrays["dense1_b"],
        dense2_w=arrays["dense2_w"],
        dense2_b=arrays["dense2_b"],
        head_w=[arrays[f"head{i}_w"] for i in range(hp.heads)],
        head_b=[arrays[f"head{i}_b"] for i in range(hp.heads)],
    )
    return model, vocab
