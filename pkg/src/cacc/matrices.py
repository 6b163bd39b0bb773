"""Communication matrices of iterated rules, row/column profiles, GF(2) rank and
Netpbm export."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import BinaryIO, Union

import numpy as np

from .evolve import IteratedTable


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class StateMatrix:
    entries: np.ndarray
    states: int = 2

    def __post_init__(self) -> None:
        if self.entries.ndim != 2:
            raise MatrixError("entries must be two-dimensional")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def T(self) -> "StateMatrix":
        return StateMatrix(self.entries.T, self.states)


@dataclass(frozen=True)
class RowColProfile:
    distinct_rows: int
    distinct_cols: int

    @property
    def d(self) -> int:
        return max(self.distinct_rows, self.distinct_cols)


def digit_reversal(digits: int, base: int) -> np.ndarray:
    """perm[i] = the integer whose base-`base` digits are those of i reversed."""
    rest = np.arange(base**digits, dtype=np.int64)
    out = np.zeros_like(rest)
    for _ in range(digits):
        out = out * base + rest % base
        rest //= base
    return out


def build_center_matrix(table: IteratedTable, center: int) -> StateMatrix:
    """M(i, j) = f^n(reverse(digits(i)), center, digits(j)) on n*r digits per side."""
    s = table.states
    if not 0 <= center < s:
        raise MatrixError(f"center state {center} not in [0, {s})")
    side = table.rule.radius * table.n
    block = table.entries.reshape(s**side, s, s**side)[:, center, :]
    return StateMatrix(block[digit_reversal(side, s)], s)


def build_partition_matrix(table: IteratedTable, p: int) -> StateMatrix:
    """M(u, v) = f^n(u . reverse(v)), Alice holding the p leftmost cells."""
    s, length = table.states, table.length
    if not 1 <= p <= length - 1:
        raise MatrixError(f"split p={p} outside [1, {length - 1}]")
    block = table.entries.reshape(s**p, s ** (length - p))
    return StateMatrix(block[:, digit_reversal(length - p, s)], s)


def _distinct_rows(a: np.ndarray, states: int) -> int:
    if a.shape[0] <= 1:
        return a.shape[0]
    if states == 2:
        a = np.packbits(a, axis=1)
    elif a.dtype != np.uint8:
        a = a.astype(np.uint8)
    a = np.ascontiguousarray(a)
    if a.shape[1] == 0:
        return 1
    keys = a.view(np.dtype((np.void, a.shape[1]))).ravel()
    return int(np.unique(keys).size)


def profile(m: StateMatrix) -> RowColProfile:
    return RowColProfile(
        _distinct_rows(m.entries, m.states),
        _distinct_rows(m.entries.T, m.states),
    )


def _row_ints(a: np.ndarray) -> list[int]:
    packed = np.packbits(a.astype(np.uint8), axis=1)
    keys = np.unique(np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[1]))).ravel())
    return [int.from_bytes(k.tobytes(), "big") for k in keys]


def rank_gf2(m: StateMatrix) -> int:
    """Rank over GF(2); duplicate rows are dropped before elimination."""
    if m.states != 2:
        raise MatrixError("GF(2) rank needs a binary matrix")
    if m.rows == 0 or m.cols == 0:
        return 0
    basis: dict[int, int] = {}
    for x in _row_ints(m.entries):
        while x:
            top = x.bit_length() - 1
            pivot = basis.get(top)
            if pivot is None:
                basis[top] = x
                break
            x ^= pivot
    return len(basis)


Sink = Union[str, os.PathLike, BinaryIO]


def netpbm_bytes(m: StateMatrix) -> bytes:
    """P4 for binary matrices (1 = black), P5 with gray floor(255*k/(s-1)) otherwise."""
    a = np.asarray(m.entries, dtype=np.uint8)
    if m.states == 2:
        header = f"P4\n{m.cols} {m.rows}\n".encode("ascii")
        return header + np.packbits(a, axis=1).tobytes()
    if m.states > 256:
        raise MatrixError("PGM output supports at most 256 states")
    gray = (a.astype(np.uint32) * 255 // (m.states - 1)).astype(np.uint8)
    header = f"P5\n{m.cols} {m.rows}\n255\n".encode("ascii")
    return header + gray.tobytes()


def export_pbm(m: StateMatrix, sink: Sink) -> None:
    data = netpbm_bytes(m)
    if hasattr(sink, "write"):
        sink.write(data)  # type: ignore[union-attr]
        return
    with open(sink, "wb") as fh:
        fh.write(data)
