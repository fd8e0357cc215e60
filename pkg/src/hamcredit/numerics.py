"""Dense float64 arithmetic and a counter-based seeded random stream.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 in C (row-major)
order. The helpers here only add the shape checks and error types the rest of
the package relies on.

Random numbers come from :class:`RngStream`, a SplitMix64 generator used in
counter mode: draw ``i`` of a stream with seed ``s`` is

    z = s + (i + 1) * 0x9E3779B97F4A7C15           (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

Uniforms on [0, 1) take the top 53 bits: ``(z >> 11) * 2**-53``. Normals use
the Box-Muller cosine branch with two consecutive uniforms ``u1, u2``:
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``. Child streams are seeded with
``mix64(seed ^ mix64(index + GOLDEN))`` so jobs can be given independent
streams derived from (master seed, job index).
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

_U64 = np.uint64


class ShapeError(ValueError):
    """Raised when tensor shapes are incompatible."""


def as_tensor(x, shape=None) -> np.ndarray:
    t = np.ascontiguousarray(x, dtype=np.float64)
    if shape is not None and t.shape != tuple(shape):
        raise ShapeError(f"expected shape {tuple(shape)}, got {t.shape}")
    return t


def zeros(*shape: int) -> np.ndarray:
    return np.zeros(shape, dtype=np.float64)


def matmul(a, b) -> np.ndarray:
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def squared_norm(t) -> float:
    t = as_tensor(t).ravel()
    return float(np.dot(t, t))


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "operands") -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what} have different shapes: {a.shape} vs {b.shape}")


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64, matching mix64
    z = (z ^ (z >> _U64(30))) * _U64(MIX1)
    z = (z ^ (z >> _U64(27))) * _U64(MIX2)
    return z ^ (z >> _U64(31))


class RngStream:
    """Deterministic SplitMix64 stream. Not safe to share between threads."""

    def __init__(self, seed: int):
        if seed < 0 or seed > MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.counter = 0

    def spawn(self, *indices: int) -> "RngStream":
        """Child stream keyed by ``indices``; independent of this stream's counter."""
        s = self.seed
        for i in indices:
            s = mix64(s ^ mix64((int(i) + GOLDEN) & MASK64))
        return RngStream(s)

    def next_u64(self, n: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            idx = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
            z = _U64(self.seed) + idx * _U64(GOLDEN)
            out = _mix64_array(z)
        self.counter += n
        return out

    def random(self, size=None):
        """Uniform draws on [0, 1); a float when ``size`` is None."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.next_u64(n) >> _U64(11)).astype(np.float64) * 2.0**-53
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def uniform(self, lo: float = 0.0, hi: float = 1.0, size=None):
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo}, {hi})")
        if lo == hi:
            return lo if size is None else np.full(size, float(lo))
        u = self.random(size)
        x = lo + (hi - lo) * u
        # rounding can land exactly on hi for very wide or very narrow intervals
        return min(x, math.nextafter(hi, lo)) if size is None else np.minimum(x, np.nextafter(hi, lo))

    def normal(self, mean: float = 0.0, std: float = 1.0, size=None):
        if std < 0:
            raise ValueError(f"std must be nonnegative, got {std}")
        n = 1 if size is None else int(np.prod(size))
        u = self.random(2 * n).reshape(n, 2)
        z = np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
        x = mean + std * z
        if size is None:
            return float(x[0])
        return x.reshape(size)

    def integers(self, n: int, size=None):
        """Integers in [0, n) via floor(u * n)."""
        if n < 1:
            raise ValueError("n must be positive")
        k = np.floor(self.random(1 if size is None else size) * n).astype(np.int64)
        k = np.minimum(k, n - 1)
        return int(k[0]) if size is None else k

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.random(n), kind="stable")


def sample_uniform(rng: RngStream, lo: float, hi: float) -> float:
    return rng.uniform(lo, hi)


def sample_normal(rng: RngStream, mean: float, std: float) -> float:
    return rng.normal(mean, std)
