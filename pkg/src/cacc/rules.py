"""Local rules, Wolfram numbering and the ECA symmetry transforms.

A neighborhood word ``w = (w_0, ..., w_{2r})`` is indexed as a base-``s``
number with the leftmost cell as the most significant digit.  For ECA this
puts the neighborhood ``(a, b, c)`` at index ``4a + 2b + c``, which is also
the bit weight used by Wolfram numbers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class RuleError(ValueError):
    """Invalid rule description or unsupported operation for a rule."""


@dataclass(frozen=True)
class RuleTable:
    """A local rule over ``states`` symbols reading ``radius`` cells per side."""

    states: int
    radius: int
    table: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.states < 2:
            raise RuleError(f"need at least 2 states, got {self.states}")
        if self.radius < 1:
            raise RuleError(f"radius must be >= 1, got {self.radius}")
        expected = self.states ** self.width
        if len(self.table) != expected:
            raise RuleError(
                f"table has {len(self.table)} entries, expected {expected}"
            )
        if any(not 0 <= v < self.states for v in self.table):
            raise RuleError(f"table entries must lie in [0, {self.states})")

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    @property
    def is_eca(self) -> bool:
        return self.states == 2 and self.radius == 1

    def __call__(self, *cells: int) -> int:
        return self.table[word_index(cells, self.states)]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.uint8)

    def digest(self) -> str:
        """Stable content hash (name excluded)."""
        payload = f"{self.states} {self.radius}\n" + " ".join(map(str, self.table))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.is_eca:
            return str(wolfram_code(self))
        return f"s{self.states}r{self.radius}-{self.digest()}"


@dataclass(frozen=True)
class SymmetryOrbit:
    codes: frozenset[int]

    @property
    def canonical(self) -> int:
        return min(self.codes)


def word_index(cells: Sequence[int], states: int) -> int:
    idx = 0
    for c in cells:
        idx = idx * states + int(c)
    return idx


def index_word(idx: int, length: int, states: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        idx, d = divmod(idx, states)
        out.append(d)
    return tuple(reversed(out))


def _check_code(code: int) -> int:
    if isinstance(code, bool) or not isinstance(code, (int, np.integer)):
        raise RuleError(f"ECA code must be an integer, got {code!r}")
    if not 0 <= code <= 255:
        raise RuleError(f"ECA code must be in [0, 255], got {code}")
    return int(code)


def eca_from_wolfram(code: int) -> RuleTable:
    """ECA rule whose output on ``(a, b, c)`` is bit ``4a+2b+c`` of ``code``."""
    code = _check_code(code)
    return RuleTable(2, 1, tuple((code >> k) & 1 for k in range(8)))


def wolfram_code(rule: RuleTable) -> int:
    if not rule.is_eca:
        raise RuleError(
            f"Wolfram numbering needs s=2, r=1 (got s={rule.states}, r={rule.radius})"
        )
    return sum(bit << k for k, bit in enumerate(rule.table))


def from_table(states: int, radius: int, entries: Iterable[int], name: str = "") -> RuleTable:
    return RuleTable(states, radius, tuple(int(v) for v in entries), name)


def space_mirror(rule: RuleTable) -> RuleTable:
    """f'(w) = f(reverse(w))."""
    s, width = rule.states, rule.width
    table = tuple(
        rule.table[word_index(index_word(i, width, s)[::-1], s)]
        for i in range(s**width)
    )
    return RuleTable(s, rule.radius, table)


def state_complement(rule: RuleTable) -> RuleTable:
    """f''(w) = 1 - f(1 - w), binary rules only."""
    if rule.states != 2:
        raise RuleError("state complement is only defined for binary rules")
    top = len(rule.table) - 1
    # complementing every cell of w maps index i to top - i
    return RuleTable(2, rule.radius, tuple(1 - rule.table[top - i] for i in range(top + 1)))


def orbit(code: int) -> SymmetryOrbit:
    rule = eca_from_wolfram(code)
    mirrored = space_mirror(rule)
    images = (rule, mirrored, state_complement(rule), state_complement(mirrored))
    return SymmetryOrbit(frozenset(wolfram_code(r) for r in images))


def rule_orbit(rule: RuleTable) -> list[RuleTable]:
    """Symmetry images of an arbitrary rule; complement only for binary rules."""
    images = [rule, space_mirror(rule)]
    if rule.states == 2:
        images += [state_complement(r) for r in images]
    seen: dict[tuple[int, ...], RuleTable] = {}
    for r in images:
        seen.setdefault(r.table, r)
    return list(seen.values())


@lru_cache(maxsize=None)
def representatives() -> tuple[int, ...]:
    """The 88 ECA codes that are minimal within their symmetry orbit."""
    return tuple(c for c in range(256) if orbit(c).canonical == c)
