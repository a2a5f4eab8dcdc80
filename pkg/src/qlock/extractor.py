"""Toeplitz hashing over GF(2) and its inversion.

Bit vectors are ``uint8`` arrays.  When a bit vector is packed into an
integer the first entry is the most significant bit, which is also the order
used by the hex serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import DEFAULT_BUDGET, Budget, BudgetExceeded, ValidationError


class ZeroFiberError(ValueError):
    """The requested key has zero probability under the source for this seed."""


@dataclass(frozen=True)
class ExtractorSpec:
    n_in: int
    m: int

    def __post_init__(self):
        if self.m < 0 or self.n_in < max(self.m, 1):
            raise ValidationError(f"need 0 <= m <= n_in and n_in >= 1, got n_in={self.n_in}, m={self.m}")

    @property
    def seed_bits(self) -> int:
        return self.n_in + self.m - 1 if self.m > 0 else 0

    @property
    def num_seeds(self) -> int:
        return 1 << self.seed_bits

    @property
    def num_keys(self) -> int:
        return 1 << self.m

    @property
    def num_inputs(self) -> int:
        return 1 << self.n_in


@dataclass(frozen=True)
class ToeplitzSeed:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8).ravel()
        if np.any(b > 1):
            raise ValidationError("seed bits must be 0 or 1")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def from_int(cls, value: int, length: int) -> "ToeplitzSeed":
        return cls(int_to_bits(value, length))

    @classmethod
    def from_hex(cls, text: str, length: int) -> "ToeplitzSeed":
        return cls(hex_to_bits(text, length))

    def to_int(self) -> int:
        return bits_to_int(self.bits)

    def to_hex(self) -> str:
        return bits_to_hex(self.bits)


def int_to_bits(value: int, length: int) -> np.ndarray:
    if value < 0 or (length < 64 and value >> length):
        raise ValidationError(f"{value} does not fit in {length} bits")
    return np.array([(value >> (length - 1 - t)) & 1 for t in range(length)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.uint8).ravel():
        out = (out << 1) | int(b)
    return out


def bits_to_hex(bits) -> str:
    b = np.asarray(bits, dtype=np.uint8).ravel()
    width = max(1, math.ceil(len(b) / 4))
    return format(bits_to_int(b), f"0{width}x")


def hex_to_bits(text: str, length: int) -> np.ndarray:
    try:
        value = int(text, 16)
    except ValueError as exc:
        raise ValidationError(f"not a hex string: {text!r}") from exc
    return int_to_bits(value, length)


def toeplitz_matrix(spec: ExtractorSpec, seed: ToeplitzSeed) -> np.ndarray:
    """``T[r, c] = seed[m - 1 - r + c]``, shape (m, n_in)."""
    if len(seed) != spec.seed_bits:
        raise ValidationError(f"seed has {len(seed)} bits, spec needs {spec.seed_bits}")
    r = np.arange(spec.m)[:, None]
    c = np.arange(spec.n_in)[None, :]
    return seed.bits[spec.m - 1 - r + c].astype(np.uint8)


def extract(spec: ExtractorSpec, seed: ToeplitzSeed, bits) -> np.ndarray:
    x = np.asarray(bits, dtype=np.uint8).ravel()
    if len(x) != spec.n_in:
        raise ValidationError(f"input has {len(x)} bits, spec needs {spec.n_in}")
    if spec.m == 0:
        return np.zeros(0, dtype=np.uint8)
    return (toeplitz_matrix(spec, seed).astype(np.int64) @ x) % 2


def extract_int(spec: ExtractorSpec, seed: ToeplitzSeed, x: int) -> int:
    return bits_to_int(extract(spec, seed, int_to_bits(x, spec.n_in)))


def seed_columns(spec: ExtractorSpec, seeds) -> np.ndarray:
    """Packed Toeplitz columns for an array of integer seeds, shape (S, n_in).

    Entry ``[s, c]`` is column ``c`` read as an m-bit integer, row 0 most significant.
    """
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.int64))
    L, m = spec.seed_bits, spec.m
    cols = np.zeros((len(seeds), spec.n_in), dtype=np.int64)
    for c in range(spec.n_in):
        for r in range(m):
            bit = (seeds >> (L - 1 - (m - 1 - r + c))) & 1
            cols[:, c] |= bit << (m - 1 - r)
    return cols


def seed_rows(spec: ExtractorSpec, seeds) -> np.ndarray:
    """Packed Toeplitz rows, shape (S, m); entry ``[s, r]`` is row ``r`` as an n_in-bit integer."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.int64))
    L, m, n = spec.seed_bits, spec.m, spec.n_in
    rows = np.zeros((len(seeds), m), dtype=np.int64)
    for r in range(m):
        for c in range(n):
            bit = (seeds >> (L - 1 - (m - 1 - r + c))) & 1
            rows[:, r] |= bit << (n - 1 - c)
    return rows


def hash_table(spec: ExtractorSpec, seed: ToeplitzSeed | int) -> np.ndarray:
    """Key of every input, indexed by the packed input integer."""
    s = seed.to_int() if isinstance(seed, ToeplitzSeed) else int(seed)
    return _kernels.hash_inputs(seed_columns(spec, [s]), spec.n_in)[0]


def leftover_hash_bound(k: float, m: int) -> float:
    """Statistical-distance guarantee ``1/2 * 2^{-(k - m)/2}`` of 2-universal hashing."""
    if k < 0:
        raise ValueError("min-entropy must be nonnegative")
    return 0.5 * 2.0 ** (-(k - m) / 2.0)


def invert_extractor(spec: ExtractorSpec, source_law, key, seed: ToeplitzSeed | int,
                     budget: Budget = DEFAULT_BUDGET) -> np.ndarray:
    """Conditional law of the input given ``extract(input, seed) = key``."""
    if spec.n_in > budget.max_extractor_bits:
        raise BudgetExceeded("extractor input bits", spec.n_in, budget.max_extractor_bits)
    p = np.asarray(source_law, dtype=float).ravel()
    if len(p) != spec.num_inputs:
        raise ValidationError(f"source law has {len(p)} atoms, expected {spec.num_inputs}")
    k = bits_to_int(key) if not isinstance(key, (int, np.integer)) else int(key)
    h = hash_table(spec, seed)
    w = np.where(h == k, p, 0.0)
    mass = w.sum()
    if mass <= 0:
        raise ZeroFiberError(f"key {k} has zero source mass for this seed")
    return w / mass


def sample_input(law: np.ndarray, rng: np.random.Generator) -> int:
    return int(rng.choice(len(law), p=law))


def collision_probability(spec: ExtractorSpec, x: int, y: int) -> float:
    """Fraction of seeds with ``extract(x) = extract(y)`` (exhaustive)."""
    seeds = np.arange(spec.num_seeds)
    cols = seed_columns(spec, seeds)
    diff = x ^ y
    acc = np.zeros(len(seeds), dtype=np.int64)
    for c in range(spec.n_in):
        if (diff >> (spec.n_in - 1 - c)) & 1:
            acc ^= cols[:, c]
    return float(np.mean(acc == 0))


def key_seed_distance(spec: ExtractorSpec, source_law) -> float:
    """``|| P(K, S) - U_K (x) U_S ||_1`` over all seeds, by enumeration."""
    p = np.asarray(source_law, dtype=float).ravel()
    seeds = np.arange(spec.num_seeds)
    total = 0.0
    for chunk in np.array_split(seeds, max(1, len(seeds) // 256)):
        h = _kernels.hash_inputs(seed_columns(spec, chunk), spec.n_in)
        for row in h:
            pk = np.bincount(row, weights=p, minlength=spec.num_keys)
            total += np.abs(pk - 1.0 / spec.num_keys).sum()
    return total / spec.num_seeds


def bits_per_symbol(alphabet: int) -> int:
    return max(1, math.ceil(math.log2(alphabet))) if alphabet > 1 else 1


def iid_source_law(p, n: int, budget: Budget = DEFAULT_BUDGET) -> tuple[np.ndarray, int]:
    """Law of ``n`` i.i.d. symbols packed into fixed-width binary words.

    Returns ``(law over 2^(n*w) packed integers, w)``; codes beyond the alphabet
    (padding) get zero mass.
    """
    p = np.asarray(p, dtype=float).ravel()
    w = bits_per_symbol(len(p))
    padded = np.zeros(1 << w)
    padded[: len(p)] = p
    total_bits = n * w
    if total_bits > budget.max_extractor_bits:
        raise BudgetExceeded("extractor input bits", total_bits, budget.max_extractor_bits)
    law = np.ones(1)
    for _ in range(n):
        law = np.kron(law, padded)
    return law, w


__all__ = [
    "ExtractorSpec",
    "ToeplitzSeed",
    "ZeroFiberError",
    "bits_per_symbol",
    "bits_to_hex",
    "bits_to_int",
    "collision_probability",
    "extract",
    "extract_int",
    "hash_table",
    "hex_to_bits",
    "iid_source_law",
    "int_to_bits",
    "invert_extractor",
    "key_seed_distance",
    "leftover_hash_bound",
    "sample_input",
    "seed_columns",
    "seed_rows",
    "toeplitz_matrix",
]
