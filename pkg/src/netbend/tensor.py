"""Deterministic tensor substrate: f32 tensors, the handful of kernels the
toy generator needs, and a seeded, bit-reproducible random source.

Every kernel is a pure function with a fixed accumulation order (no FMA, no
reassociation), so outputs are bit-identical across runs and platforms.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Tensor",
    "DeterministicRng",
    "ShapeMismatchError",
    "matmul",
    "conv2d_same",
    "upsample2x_nearest",
    "add",
    "scale",
    "normal_vector",
]


class ShapeMismatchError(ValueError):
    """Raised when operand shapes are incompatible."""


class Tensor:
    """Dense row-major float32 tensor of rank 1-4.

    Rank-4 tensors are interpreted as [N, C, H, W]. The backing array is
    C-contiguous and frozen after construction; tensors are safe to share
    across threads.
    """

    __slots__ = ("array",)

    def __init__(self, values, copy: bool = True):
        arr = np.array(values, dtype=np.float32, copy=copy, order="C")
        if arr.ndim < 1 or arr.ndim > 4:
            raise ValueError(f"tensor rank must be 1-4, got {arr.ndim}")
        if any(e < 1 for e in arr.shape):
            raise ValueError(f"every extent must be >= 1, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "array", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Tensor is immutable")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.array.shape

    @property
    def rank(self) -> int:
        return self.array.ndim

    @property
    def size(self) -> int:
        return self.array.size

    def flat(self) -> np.ndarray:
        return self.array.reshape(-1)

    def reshape(self, shape) -> "Tensor":
        return Tensor(self.array.reshape(shape), copy=False)

    def tolist(self):
        return self.array.tolist()

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(
            self.array, other.array, equal_nan=True
        )

    def __hash__(self):
        return hash((self.shape, self.array.tobytes()))

    def __repr__(self):
        return f"Tensor(shape={list(self.shape)})"

    @staticmethod
    def zeros(shape) -> "Tensor":
        return Tensor(np.zeros(shape, dtype=np.float32), copy=False)


def _finite_or_raise(arr: np.ndarray, op: str) -> None:
    if not np.isfinite(arr).all():
        raise FloatingPointError(f"{op} produced non-finite values")


_MASK64 = (1 << 64) - 1


class DeterministicRng:
    """splitmix64 uniform stream; standard normals via Box-Muller.

    The Box-Muller transform runs in f64 and truncates each normal to f32,
    consuming exactly two uniform draws per pair of normals (for an odd
    count the second normal of the final pair is discarded). The stream for
    a given seed is a cross-platform golden sequence.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        # uniform in (0, 1]: 53 high bits, shifted off zero so log() is safe
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def next_normal_pair(self) -> tuple[np.float32, np.float32]:
        u1 = self.next_unit()
        u2 = self.next_unit()
        r = math.sqrt(-2.0 * math.log(u1))
        t = 2.0 * math.pi * u2
        return np.float32(r * math.cos(t)), np.float32(r * math.sin(t))

    def normals(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        out = np.empty(n, dtype=np.float32)
        i = 0
        while i < n:
            z0, z1 = self.next_normal_pair()
            out[i] = z0
            if i + 1 < n:
                out[i + 1] = z1
            i += 2
        return out


def normal_vector(rng: DeterministicRng, n: int) -> Tensor:
    """n standard-normal draws as a rank-1 tensor."""
    return Tensor(rng.normals(n), copy=False)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """c[i,j] = sum_t a[i,t]*b[t,j]; f32 accumulation with t ascending."""
    if a.rank != 2 or b.rank != 2:
        raise ShapeMismatchError(
            f"matmul needs rank-2 operands, got {list(a.shape)} x {list(b.shape)}"
        )
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ShapeMismatchError(
            f"matmul inner extents differ: {list(a.shape)} x {list(b.shape)}"
        )
    aa, ba = a.array, b.array
    c = np.zeros((m, n), dtype=np.float32)
    for t in range(k):
        c += aa[:, t : t + 1] * ba[t : t + 1, :]
    _finite_or_raise(c, "matmul")
    return Tensor(c, copy=False)


def conv2d_same(x: Tensor, k: Tensor, bias: Tensor) -> Tensor:
    """3x3 cross-correlation, stride 1, zero pad 1, plus per-channel bias.

    Per output element the accumulation order is input channel ascending,
    then kernel row, then kernel column; bias is added last.
    """
    if x.rank != 4 or k.rank != 4 or bias.rank != 1:
        raise ShapeMismatchError(
            f"conv2d_same needs x rank-4, k rank-4, bias rank-1; got "
            f"{list(x.shape)}, {list(k.shape)}, {list(bias.shape)}"
        )
    n, c, h, w = x.shape
    f, ck, kh, kw = k.shape
    if (kh, kw) != (3, 3):
        raise ShapeMismatchError(f"kernel must be 3x3, got {kh}x{kw}")
    if ck != c or bias.shape[0] != f:
        raise ShapeMismatchError(
            f"channel mismatch: x {list(x.shape)}, k {list(k.shape)}, "
            f"bias {list(bias.shape)}"
        )
    xa, ka = x.array, k.array
    pad = np.zeros((n, c, h + 2, w + 2), dtype=np.float32)
    pad[:, :, 1 : h + 1, 1 : w + 1] = xa
    out = np.zeros((n, f, h, w), dtype=np.float32)
    for ci in range(c):
        for ki in range(3):
            for kj in range(3):
                patch = pad[:, ci, ki : ki + h, kj : kj + w]
                out += patch[:, None, :, :] * ka[None, :, ci, ki, kj, None, None]
    out += bias.array[None, :, None, None]
    _finite_or_raise(out, "conv2d_same")
    return Tensor(out, copy=False)


def upsample2x_nearest(x: Tensor) -> Tensor:
    """Replicate each pixel of an [N,C,H,W] tensor into a 2x2 block."""
    if x.rank != 4:
        raise ShapeMismatchError(f"upsample2x_nearest needs rank-4, got {list(x.shape)}")
    out = np.repeat(np.repeat(x.array, 2, axis=2), 2, axis=3)
    return Tensor(out, copy=False)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"add shape mismatch: {list(a.shape)} vs {list(b.shape)}")
    out = a.array + b.array
    _finite_or_raise(out, "add")
    return Tensor(out, copy=False)


def scale(a: Tensor, s: float) -> Tensor:
    out = a.array * np.float32(s)
    _finite_or_raise(out, "scale")
    return Tensor(out, copy=False)
