"""Checkpoint codec: bit-exact round trips and corruption detection.

An independent struct-based reader re-parses the container so the format is
checked against the documented layout, not just against the library's own
deserializer.
"""

import hashlib
import json
import struct

import numpy as np
import pytest

from tashkeel.checkpoint import (
    MAGIC,
    VERSION,
    Checkpoint,
    deserialize,
    load_checkpoint,
    save_checkpoint,
    serialize,
)
from tashkeel.errors import CorruptCheckpoint, VersionMismatch
from tashkeel.model import ModelConfig, forward_logits, init_parameters

CFG = ModelConfig(
    vocab_size=23, hidden_dim=16, layer_count=1, head_count=2, ffn_dim=32,
    max_seq_len=12, dropout_rate=0.0, precision="double", seed=9,
)


@pytest.fixture()
def ckpt():
    return Checkpoint(config=CFG, params=init_parameters(CFG), vocab_digest="ab12" * 16)


def blob_of(ckpt: Checkpoint) -> bytes:
    return serialize(ckpt.params, ckpt.config, ckpt.vocab_digest)


def parse_by_hand(blob: bytes):
    """Walk the documented byte layout with struct alone."""
    assert blob[:4] == MAGIC
    (version,) = struct.unpack("<I", blob[4:8])
    (json_len,) = struct.unpack("<I", blob[8:12])
    header = json.loads(blob[12:12 + json_len].decode("utf-8"))
    offset = 12 + json_len
    tensors = {}
    order = []
    while offset < len(blob):
        (name_len,) = struct.unpack("<I", blob[offset:offset + 4])
        offset += 4
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (rank,) = struct.unpack("<I", blob[offset:offset + 4])
        offset += 4
        dims = struct.unpack(f"<{rank}Q", blob[offset:offset + 8 * rank])
        offset += 8 * rank
        count = int(np.prod(dims)) if dims else 1
        itemsize = np.dtype(header["dtype"]).itemsize
        raw = blob[offset:offset + count * itemsize]
        offset += count * itemsize
        tensors[name] = np.frombuffer(raw, dtype=header["dtype"]).reshape(dims)
        order.append(name)
    return version, header, tensors, order


class TestSerialize:
    def test_round_trip_bitwise(self, ckpt):
        loaded = deserialize(blob_of(ckpt))
        assert loaded.config == ckpt.config
        assert loaded.vocab_digest == ckpt.vocab_digest
        assert set(loaded.params) == set(ckpt.params)
        for name, tensor in ckpt.params.items():
            assert loaded.params[name].dtype == tensor.dtype
            assert np.array_equal(loaded.params[name], tensor)

    def test_deterministic_bytes(self, ckpt):
        assert hashlib.sha256(blob_of(ckpt)).hexdigest() == hashlib.sha256(
            blob_of(ckpt)
        ).hexdigest()

    def test_layout_by_hand(self, ckpt):
        version, header, tensors, order = parse_by_hand(blob_of(ckpt))
        assert version == VERSION
        assert header["dtype"] == "<f8"
        assert header["vocab_digest"] == ckpt.vocab_digest
        assert header["hidden_dim"] == 16
        assert order == sorted(order)
        assert set(tensors) == set(ckpt.params)
        for name, tensor in ckpt.params.items():
            assert np.array_equal(tensors[name], tensor)

    def test_single_precision_dtype_code(self):
        cfg = ModelConfig(vocab_size=23, hidden_dim=16, head_count=2,
                          ffn_dim=32, precision="single")
        blob = serialize(init_parameters(cfg), cfg, "0" * 64)
        _, header, tensors, _ = parse_by_hand(blob)
        assert header["dtype"] == "<f4"
        assert all(t.dtype == np.float32 for t in tensors.values())

    def test_forward_equivalence_after_reload(self, ckpt):
        ids = np.array([[2, 5, 6, 7, 3]])
        before = forward_logits(ckpt.params, CFG, ids, "cls")
        loaded = deserialize(blob_of(ckpt))
        after = forward_logits(loaded.params, loaded.config, ids, "cls")
        assert np.array_equal(before, after)


class TestCorruption:
    def test_bad_magic(self, ckpt):
        blob = bytearray(blob_of(ckpt))
        blob[0] ^= 0xFF
        with pytest.raises(CorruptCheckpoint):
            deserialize(bytes(blob))

    def test_future_version(self, ckpt):
        blob = bytearray(blob_of(ckpt))
        blob[4:8] = struct.pack("<I", VERSION + 1)
        with pytest.raises(VersionMismatch):
            deserialize(bytes(blob))

    @pytest.mark.parametrize("cut", [6, 11, 40, -1])
    def test_truncation(self, ckpt, cut):
        blob = blob_of(ckpt)
        with pytest.raises(CorruptCheckpoint):
            deserialize(blob[:cut] if cut > 0 else blob[:cut])

    def test_garbage_header(self, ckpt):
        blob = bytearray(blob_of(ckpt))
        json_len = struct.unpack("<I", bytes(blob[8:12]))[0]
        blob[12:12 + json_len] = b"{" * json_len
        with pytest.raises(CorruptCheckpoint):
            deserialize(bytes(blob))

    def test_trailing_junk(self, ckpt):
        with pytest.raises(CorruptCheckpoint):
            deserialize(blob_of(ckpt) + b"\x00\x01")

    def test_empty(self):
        with pytest.raises(CorruptCheckpoint):
            deserialize(b"")


class TestFiles:
    def test_save_load(self, tmp_path, ckpt):
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, ckpt.params, ckpt.config, ckpt.vocab_digest)
        loaded = load_checkpoint(path)
        assert loaded.config == ckpt.config
        for name, tensor in ckpt.params.items():
            assert np.array_equal(loaded.params[name], tensor)

    def test_no_partial_file_on_failure(self, tmp_path, ckpt):
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, ckpt.params, ckpt.config, ckpt.vocab_digest)
        first = path.read_bytes()
        save_checkpoint(path, ckpt.params, ckpt.config, ckpt.vocab_digest)
        assert path.read_bytes() == first
        assert [p.name for p in tmp_path.iterdir()] == ["model.ckpt"]

    def test_missing_file(self, tmp_path):
        from tashkeel.errors import IoFailure
        with pytest.raises(IoFailure):
            load_checkpoint(tmp_path / "absent.ckpt")
