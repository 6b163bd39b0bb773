"""Closed forms for automata whose d_n is known exactly, used to cross-check
the brute-force pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .rules import RuleTable, from_table, index_word

INF = math.inf


def rule132_dn(n: int) -> int:
    return n + 1


def rule132_center_rows(n: int, center: int) -> int:
    """Distinct rows of M_center^n: with a 0 center the output is always 0."""
    return 1 if center == 0 else n + 1


def rule132_identity_indices(n: int) -> tuple[list[int], list[int]]:
    """Row indices for left cells 0^(n-k) 1^k and column indices for right
    cells 1^l 0^(n-l), k, l = 0..n, in M_1^n coordinates."""
    # row i carries the reversed binary expansion of i on the left
    rows = [int("1" * k + "0" * (n - k), 2) if k else 0 for k in range(n + 1)]
    cols = [int("1" * l + "0" * (n - l), 2) if l else 0 for l in range(n + 1)]
    return rows, cols


def rule23_dn(n: int) -> int:
    return n + 1


def rule105_formula(x: int, c: int, y: int) -> int:
    return x ^ c ^ y ^ 1


def three_state_rule() -> RuleTable:
    """Expanding max rule: 0 survives only between two equal neighbors."""
    table = []
    for idx in range(27):
        i, j, k = index_word(idx, 3, 3)
        table.append(j if j == 0 and i == k else max(i, j, k))
    return from_table(3, 1, table, name="@three-state")


@dataclass(frozen=True)
class ThreeStateContext:
    """Distances (1..n, or inf) to the nearest 2, and to the nearest 1 before it."""

    l1: float
    l2: float
    r1: float
    r2: float

    def __post_init__(self) -> None:
        for near, far in ((self.l1, self.l2), (self.r1, self.r2)):
            if near != INF and far != INF and near >= far:
                raise ValueError("a 1-distance must be smaller than the 2-distance on its side")
            if any(d != INF and (d < 1 or d != int(d)) for d in (near, far)):
                raise ValueError("distances must be positive integers or inf")


def _scan_side(cells: Sequence[int]) -> tuple[float, float]:
    """cells ordered outward from the center."""
    d2 = next((k for k, x in enumerate(cells, 1) if x == 2), INF)
    d1 = next((k for k, x in enumerate(cells, 1) if x == 1 and k < d2), INF)
    return d1, d2


def three_state_context(word: Sequence[int]) -> tuple[int, ThreeStateContext]:
    if len(word) % 2 == 0:
        raise ValueError("word length must be odd")
    n = len(word) // 2
    l1, l2 = _scan_side(word[:n][::-1])
    r1, r2 = _scan_side(word[n + 1 :])
    return word[n], ThreeStateContext(l1, l2, r1, r2)


def three_state_predict(c: int, ctx: ThreeStateContext, n: int) -> int:
    """State of the center cell after n steps."""
    if c == 2:
        return 2
    no_two = ctx.l2 > n and ctx.r2 > n
    if c == 1:
        return 1 if no_two else 2
    if c != 0:
        raise ValueError(f"state {c} not in {{0, 1, 2}}")
    twos_meet = ctx.l2 == ctx.r2 != INF
    if not (no_two or twos_meet):
        return 2
    ones_ok = (ctx.l1 > n and ctx.r1 > n) or ctx.l1 == ctx.r1 != INF
    if ones_ok:
        return 0
    # a 1 got in first; a later pair of 2s cannot protect it
    return 2 if twos_meet else 1


def three_state_dn_bounds(n: int) -> tuple[int, int]:
    """(rows R_ij of the lower-bound construction, 2^cost of the l1/l2 protocol)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bits = math.ceil(math.log2(n + 1))
    return (n + 1) * (n + 2) // 2, 2 ** (2 * bits)


# plain 0, 1 and their tilde copies
ZERO, ONE, TZERO, TONE = 0, 1, 2, 3


def tilde(bit: int) -> int:
    return bit + 2


def comparison_rule() -> RuleTable:
    """Plain bits move right, tilde bits move left, the center compares them."""
    table = []
    for idx in range(64):
        z, c, y = index_word(idx, 3, 4)
        if c >= 2 and y >= 2:
            out = y
        elif z < 2 and c < 2 and y < 2:
            out = z
        elif z < 2 and c == ONE and y >= 2:
            out = int(z == y - 2)
        else:
            out = 0
        table.append(out)
    return from_table(4, 1, table, name="@comparison")


def comparison_expected(u: Sequence[int], v: Sequence[int]) -> int:
    """f^n(u, 1, tilde(v)): 1 iff every bit leaving the left meets its match,
    i.e. v is u read backwards."""
    if len(u) != len(v):
        raise ValueError("u and v must have the same length")
    return int(list(v) == list(u)[::-1])
