"""Binary parameter serialization.

Layout, all integers little-endian:

    magic "PTCD" | u32 version | u32 config_len | config JSON (UTF-8)
    then per tensor, sorted by name:
    u32 name_len | name UTF-8 | u32 rank | rank × u64 dims | raw IEEE-754 data

The config JSON holds the model configuration fields plus the vocabulary
digest and the element dtype. Tensors are written in sorted name order with
native float bytes in little-endian, so identical parameters serialize to
identical bytes.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .errors import CorruptCheckpoint, IoFailure, VersionMismatch
from .model import ModelConfig

MAGIC = b"PTCD"
VERSION = 1

_MAX_RANK = 8
_DTYPE_CODES = {"double": "<f8", "single": "<f4"}


@dataclass(frozen=True)
class Checkpoint:
    """A deserialized checkpoint: configuration, tensors, vocabulary digest."""

    config: ModelConfig
    params: dict[str, np.ndarray]
    vocab_digest: str


def serialize(
    params: Mapping[str, np.ndarray], config: ModelConfig, vocab_digest: str
) -> bytes:
    """Encode parameters to the binary format."""
    dtype = np.dtype(_DTYPE_CODES[config.precision])
    block = dict(asdict(config))
    block["vocab_digest"] = vocab_digest
    block["dtype"] = dtype.str
    config_bytes = json.dumps(block, sort_keys=True).encode("utf-8")
    out = [MAGIC, struct.pack("<I", VERSION)]
    out.append(struct.pack("<I", len(config_bytes)))
    out.append(config_bytes)
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name], dtype=dtype)
        name_bytes = name.encode("utf-8")
        out.append(struct.pack("<I", len(name_bytes)))
        out.append(name_bytes)
        out.append(struct.pack("<I", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(arr.tobytes(order="C"))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes, origin: str):
        self.data = data
        self.pos = 0
        self.origin = origin

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise CorruptCheckpoint(
                f"{self.origin}: truncated at byte {self.pos} (need {n} more)"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.data)


def deserialize(data: bytes, origin: str = "<bytes>") -> Checkpoint:
    """Decode checkpoint bytes; validates structure as it reads."""
    reader = _Reader(data, origin)
    if reader.take(4) != MAGIC:
        raise CorruptCheckpoint(f"{origin}: bad magic")
    version = reader.u32()
    if version != VERSION:
        raise VersionMismatch(f"{origin}: version {version}, expected {VERSION}")
    config_len = reader.u32()
    try:
        block = json.loads(reader.take(config_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"{origin}: unreadable config block: {exc}") from exc
    if not isinstance(block, dict):
        raise CorruptCheckpoint(f"{origin}: config block is not an object")
    try:
        vocab_digest = block.pop("vocab_digest")
        dtype_str = block.pop("dtype")
        config = ModelConfig(**block)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptCheckpoint(f"{origin}: invalid config block: {exc}") from exc
    expected_dtype = np.dtype(_DTYPE_CODES[config.precision])
    if np.dtype(dtype_str) != expected_dtype:
        raise CorruptCheckpoint(
            f"{origin}: dtype {dtype_str} does not match precision {config.precision}"
        )
    params: dict[str, np.ndarray] = {}
    while not reader.exhausted:
        name_len = reader.u32()
        try:
            name = reader.take(name_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptCheckpoint(f"{origin}: tensor name not UTF-8") from exc
        if not name or name in params:
            raise CorruptCheckpoint(f"{origin}: empty or duplicate tensor {name!r}")
        rank = reader.u32()
        if rank > _MAX_RANK:
            raise CorruptCheckpoint(f"{origin}: tensor {name!r} rank {rank}")
        dims = tuple(reader.u64() for _ in range(rank))
        count = 1
        for d in dims:
            count *= d
        payload = reader.take(count * expected_dtype.itemsize)
        arr = np.frombuffer(payload, dtype=expected_dtype).reshape(dims)
        params[name] = arr.astype(config.dtype, copy=True)
    return Checkpoint(config=config, params=params, vocab_digest=vocab_digest)


def save_checkpoint(
    path, params: Mapping[str, np.ndarray], config: ModelConfig, vocab_digest: str
) -> None:
    """Serialize to a temp file, then rename into place."""
    data = serialize(params, config, vocab_digest)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from exc
    return deserialize(data, origin=str(path))
