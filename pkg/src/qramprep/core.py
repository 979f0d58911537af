"""Shared input types: sparse vectors and matrices, bit paths, tolerances.

Dimensions are zero-padded to powers of two so that the partial-sum trees
built on top of them are full binary trees; padding entries are implicit
zeros and never stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class InputError(ValueError):
    """Malformed input data (bad indices, duplicates, wrong dimensions)."""


class DegenerateInputError(ValueError):
    """Well-formed input that the pipeline cannot act on (zero vector, dim 1)."""


class ZeroVectorError(DegenerateInputError):
    """A vector (or matrix row) with no nonzero entry where one is required."""


def next_power_of_two(n: int) -> int:
    """Least power of two >= n, for n >= 1."""
    if n < 1:
        raise InputError("dimension must be >= 1")
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class Tolerance:
    """Numeric tolerances: per-amplitude (eps_amp) and norm-level (eps_norm)."""

    eps_amp: float = 1e-10
    eps_norm: float = 1e-9

    def __post_init__(self):
        if self.eps_amp <= 0.0 or self.eps_norm <= 0.0:
            raise ValueError("tolerances must be strictly positive")


@dataclass(frozen=True)
class BitPath:
    """A root-to-node path in a binary tree, most-significant bit first.

    The empty path addresses the root; a full-depth path addresses a leaf.
    """

    bits: tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InputError(f"path bits must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "BitPath":
        if any(c not in "01" for c in s):
            raise InputError(f"malformed bit string {s!r}")
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_int(cls, value: int, depth: int) -> "BitPath":
        if not 0 <= value < (1 << depth):
            raise InputError(f"value {value} does not fit in {depth} bits")
        return cls(tuple((value >> (depth - 1 - i)) & 1 for i in range(depth)))

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    def child(self, bit: int) -> "BitPath":
        return BitPath(self.bits + (bit,))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits) or "-"


def as_path(path: "BitPath | str | Sequence[int]") -> BitPath:
    """Coerce a string or bit sequence into a BitPath."""
    if isinstance(path, BitPath):
        return path
    if isinstance(path, str):
        return BitPath.from_string(path)
    return BitPath(tuple(path))


@dataclass(frozen=True)
class SparseVector:
    """Signed real vector stored as (index, value) pairs; unset indices are zero."""

    dim: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        entries = tuple((int(i), float(v)) for i, v in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for i, _ in entries:
            if not 0 <= i < self.dim:
                raise InputError(f"index {i} out of range for dim {self.dim}")
            if i in seen:
                raise InputError(f"duplicate index {i}")
            seen.add(i)

    @classmethod
    def from_dense(cls, values: Iterable[float]) -> "SparseVector":
        values = list(values)
        return cls(len(values), tuple((i, v) for i, v in enumerate(values) if v != 0.0))

    def to_dense(self) -> list[float]:
        out = [0.0] * self.dim
        for i, v in self.entries:
            out[i] = v
        return out

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for _, v in self.entries)


@dataclass(frozen=True)
class SparseMatrix:
    """Square signed real matrix stored as (row, col, value) triples."""

    rows: int
    cols: int
    entries: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InputError("rows and cols must be >= 1")
        entries = tuple((int(i), int(j), float(v)) for i, j, v in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for i, j, _ in entries:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise InputError(f"entry ({i},{j}) out of range")
            if (i, j) in seen:
                raise InputError(f"duplicate entry ({i},{j})")
            seen.add((i, j))

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def row(self, i: int) -> SparseVector:
        if not 0 <= i < self.rows:
            raise InputError(f"row {i} out of range")
        return SparseVector(self.cols, tuple((j, v) for r, j, v in self.entries if r == i))


def pad_to_power_of_two(v: SparseVector) -> SparseVector:
    """Grow the dimension to the least power of two >= dim; entries unchanged.

    Idempotent: a power-of-two dimension is returned as-is.
    """
    dim = next_power_of_two(v.dim)
    if dim == v.dim:
        return v
    return SparseVector(dim, v.entries)


def pad_matrix_to_power_of_two(m: SparseMatrix) -> SparseMatrix:
    """Pad both dimensions to the least power of two covering rows and cols."""
    n = next_power_of_two(max(m.rows, m.cols))
    if n == m.rows == m.cols:
        return m
    return SparseMatrix(n, n, m.entries)


def l2_norm_squared(v: SparseVector) -> float:
    """Sum of squared entry values."""
    return sum(val * val for _, val in v.entries)
