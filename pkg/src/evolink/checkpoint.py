"""Binary model checkpoints.

Layout (all integers little-endian):

    magic          4 bytes  b"EVGC"
    version        uint32
    header_len     uint32
    header         UTF-8 JSON: {"config": {...}, "n_global": int}
    tensor_count   uint32
    per tensor:    name_len uint16, name UTF-8,
                   rows uint64, cols uint64, rows*cols float64 values
    registry_len   uint32
    per entry:     raw_id uint64, dense_id uint64

Values are stored as raw little-endian float64, so a save/load round trip
is bit-exact. Anything structurally off (bad magic, unknown version,
truncation, trailing bytes, name mismatches) raises CheckpointError;
tensor shapes that contradict the header's config raise ShapeError.
"""
from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError, ShapeError
from .model import GcnChain, ModelConfig
from .tape import param

MAGIC = b"EVGC"
VERSION = 1

Array = np.ndarray


def save_checkpoint(model: GcnChain) -> bytes:
    header = json.dumps(
        {"config": dataclasses.asdict(model.config), "n_global": model.n_global},
        sort_keys=True,
    ).encode("utf-8")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    out += struct.pack("<I", len(header))
    out += header
    tensors = model.param_arrays()
    out += struct.pack("<I", len(tensors))
    for name, arr in tensors.items():
        encoded = name.encode("utf-8")
        out += struct.pack("<H", len(encoded))
        out += encoded
        out += struct.pack("<QQ", arr.shape[0], arr.shape[1])
        out += arr.astype("<f8").tobytes()
    out += struct.pack("<I", len(model.registry))
    for raw_id, dense_id in model.registry.items():
        out += struct.pack("<QQ", raw_id, dense_id)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated checkpoint")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(data: bytes) -> GcnChain:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise CheckpointError("bad checkpoint magic")
    (version,) = r.unpack("<I")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (header_len,) = r.unpack("<I")
    try:
        header = json.loads(r.take(header_len).decode("utf-8"))
        config = ModelConfig(**header["config"])
        n_global = int(header["n_global"])
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"unreadable checkpoint header: {exc}") from exc

    (tensor_count,) = r.unpack("<I")
    tensors: dict[str, Array] = {}
    for _ in range(tensor_count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8")
        rows_, cols = r.unpack("<QQ")
        raw = r.take(rows_ * cols * 8)
        tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(rows_, cols).copy()
    (registry_len,) = r.unpack("<I")
    registry: dict[int, int] = {}
    for _ in range(registry_len):
        raw_id, dense_id = r.unpack("<QQ")
        registry[raw_id] = dense_id
    if r.pos != len(data):
        raise CheckpointError(f"{len(data) - r.pos} trailing bytes after checkpoint")

    return _assemble(config, n_global, tensors, registry)


def _assemble(config: ModelConfig, n_global: int, tensors: dict[str, Array],
              registry: dict[int, int]) -> GcnChain:
    d1, d2 = config.hidden_dim, config.embed_dim
    expected: dict[str, tuple[int, int]] = {"w1/0": (n_global, d1)}
    for i in range(config.window + 1):
        expected[f"w2/{i}"] = (d1, d2)
    for t in range(config.window):
        for j in range(config.heads):
            expected[f"attn/{t}/{j}/transform"] = (d1, d1)
            expected[f"attn/{t}/{j}/score"] = (2 * d1, 1)
    if set(tensors) != set(expected):
        raise CheckpointError("checkpoint tensors do not match the header config")
    for name, shape in expected.items():
        if tensors[name].shape != shape:
            raise ShapeError(f"checkpoint tensor {name!r} has shape "
                             f"{tensors[name].shape}, config requires {shape}")

    from .attention import AttentionHead, Transition

    w1 = param(tensors["w1/0"], "w1/0")
    w2 = [param(tensors[f"w2/{i}"], f"w2/{i}") for i in range(config.window + 1)]
    transitions = []
    for t in range(config.window):
        heads = [AttentionHead(transform=param(tensors[f"attn/{t}/{j}/transform"],
                                               f"attn/{t}/{j}/transform"),
                               score_vec=param(tensors[f"attn/{t}/{j}/score"],
                                               f"attn/{t}/{j}/score"))
                 for j in range(config.heads)]
        transitions.append(Transition(heads=heads))
    return GcnChain(config, n_global, w1, w2, transitions, registry)


def write_checkpoint(model: GcnChain, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(save_checkpoint(model))
    return path


def read_checkpoint(path: str | Path) -> GcnChain:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"no checkpoint at {path}") from None
    return load_checkpoint(data)
