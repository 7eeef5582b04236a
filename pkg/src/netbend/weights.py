"""Deterministic weight initialization and the NBW1 binary weight format.

NBW1 layout, all little-endian:

    magic "NBW1" | u32 version=1 | u32 tensor_count
    per tensor: u16 name_len | name (UTF-8) | u8 ndim | u32 x ndim dims
                | f32 x numel data

Round-trips are bit-exact, including non-finite payloads (the loader warns
on those but does not reject them).
"""

from __future__ import annotations

import logging
import math
import struct

import numpy as np

from .graph import CONST_WEIGHT_NAME, GeneratorConfig, expected_weight_shapes
from .tensor import DeterministicRng, Tensor

__all__ = [
    "WeightFormatError",
    "random_init",
    "save",
    "load",
    "MAGIC",
]

log = logging.getLogger(__name__)

MAGIC = b"NBW1"
VERSION = 1
MAX_NAME_BYTES = 255


class WeightFormatError(ValueError):
    """Malformed NBW1 file; ``code`` is one of bad_magic, bad_version,
    truncated, duplicate_name, bad_name."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def random_init(config: GeneratorConfig, seed: int) -> dict[str, Tensor]:
    """He-init weight table from a single deterministic stream.

    Dense and conv weights are normal with std sqrt(2/fan_in), biases are
    zero, and the learned constant input is normal with std 1. Tensors are
    drawn in canonical layer order so the table is a pure function of the
    seed.
    """
    rng = DeterministicRng(seed)
    table: dict[str, Tensor] = {}
    for name, shape in expected_weight_shapes(config).items():
        if name.endswith(".b"):
            table[name] = Tensor.zeros(shape)
            continue
        draws = rng.normals(int(np.prod(shape)))
        if name == CONST_WEIGHT_NAME:
            std = 1.0
        elif name.endswith("conv.w"):
            fan_in = shape[1] * shape[2] * shape[3]
            std = math.sqrt(2.0 / fan_in)
        elif name.startswith("syn.") and name.endswith("torgb.w"):
            std = math.sqrt(2.0 / shape[1])
        else:  # dense [in, out]
            std = math.sqrt(2.0 / shape[0])
        table[name] = Tensor((draws * np.float32(std)).reshape(shape), copy=False)
    return table


def save(table: dict[str, Tensor], path: str) -> None:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(table))]
    for name, tensor in table.items():
        encoded = name.encode("utf-8")
        if not 0 < len(encoded) <= MAX_NAME_BYTES:
            raise WeightFormatError("bad_name", f"tensor name {name!r} must be 1-255 UTF-8 bytes")
        arr = np.ascontiguousarray(tensor.array, dtype="<f4")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise WeightFormatError("truncated", f"file truncated while reading {what}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out


def load(path: str) -> dict[str, Tensor]:
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise WeightFormatError("bad_magic", f"bad magic {magic!r}, expected {MAGIC!r}")
    version, count = struct.unpack("<II", r.take(8, "header"))
    if version != VERSION:
        raise WeightFormatError("bad_version", f"unsupported version {version}")
    table: dict[str, Tensor] = {}
    for i in range(count):
        (name_len,) = struct.unpack("<H", r.take(2, f"tensor {i} name length"))
        try:
            name = r.take(name_len, f"tensor {i} name").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WeightFormatError("bad_name", f"tensor {i} name is not valid UTF-8") from exc
        (ndim,) = struct.unpack("<B", r.take(1, f"tensor {name!r} rank"))
        if not 1 <= ndim <= 4:
            raise WeightFormatError("bad_shape", f"tensor {name!r} has rank {ndim}, expected 1-4")
        dims = struct.unpack(f"<{ndim}I", r.take(4 * ndim, f"tensor {name!r} dims"))
        numel = 1
        for d in dims:
            if d < 1:
                raise WeightFormatError("bad_shape", f"tensor {name!r} has a zero extent")
            numel *= d
        raw = r.take(4 * numel, f"tensor {name!r} data")
        if name in table:
            raise WeightFormatError("duplicate_name", f"duplicate tensor name {name!r}")
        arr = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float32)
        if not np.isfinite(arr).all():
            log.warning("tensor %r contains non-finite values", name)
        table[name] = Tensor(arr, copy=False)
    if r.pos != len(data):
        raise WeightFormatError("trailing_data", f"{len(data) - r.pos} trailing bytes after last tensor")
    return table
