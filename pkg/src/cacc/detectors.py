"""Additivity (exact search), essential cells / sensibility and nilpotency
probes (experimental, bounded n)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .evolve import BudgetError, IteratedTable, iter_tables, tabulate
from .rules import RuleTable, index_word, word_index

# operator-table candidates examined before giving up
SEARCH_LIMIT = 2_000_000


@dataclass(frozen=True)
class AdditivityWitness:
    """Operator tables are row-major: ``oplus[x * s + y]`` is ``x (+) y``."""

    states: int
    oplus: tuple[int, ...]
    otimes: tuple[int, ...]
    neutral: int

    def add(self, x: int, y: int) -> int:
        return self.oplus[x * self.states + y]

    def mul(self, x: int, y: int) -> int:
        return self.otimes[x * self.states + y]

    def to_dict(self) -> dict:
        return {"oplus": list(self.oplus), "otimes": list(self.otimes), "neutral": self.neutral}


def _neighborhood_digits(rule: RuleTable) -> np.ndarray:
    s, w = rule.states, rule.width
    return np.array([index_word(i, w, s) for i in range(s**w)], dtype=np.int64)


def _combine(op: np.ndarray, digits: np.ndarray, s: int) -> np.ndarray:
    """Index of the cellwise combination w (op) w' for every pair (w, w')."""
    pair = op.reshape(s, s)[digits[:, None, :], digits[None, :, :]]
    weights = s ** np.arange(digits.shape[1] - 1, -1, -1)
    return pair @ weights


def verify_witness(rule: RuleTable, wit: AdditivityWitness) -> bool:
    """Both homomorphism equations over all neighborhood pairs, plus the neutral law."""
    s = rule.states
    if wit.states != s or len(wit.oplus) != s * s or len(wit.otimes) != s * s:
        return False
    if not 0 <= wit.neutral < s:
        return False
    if any(wit.add(x, wit.neutral) != x or wit.add(wit.neutral, x) != x for x in range(s)):
        return False
    f = rule.table
    size = len(f)
    for a, b in itertools.product(range(size), repeat=2):
        wa, wb = index_word(a, rule.width, s), index_word(b, rule.width, s)
        plus = word_index([wit.add(x, y) for x, y in zip(wa, wb)], s)
        times = word_index([wit.mul(x, y) for x, y in zip(wa, wb)], s)
        if f[plus] != wit.mul(f[a], f[b]) or f[times] != wit.add(f[a], f[b]):
            return False
    return True


def _oplus_candidates(s: int):
    """Tables with a two-sided neutral element, in lexicographic order, then e."""
    for table in itertools.product(range(s), repeat=s * s):
        for e in range(s):
            if all(table[x * s + e] == x and table[e * s + x] == x for x in range(s)):
                yield table, e


def detect_additivity(rule: RuleTable, limit: int = SEARCH_LIMIT) -> Optional[AdditivityWitness]:
    """First witness in (oplus, e, otimes) lexicographic order, or None.

    The first equation pins otimes on every pair of values in the image of
    the rule; only the remaining entries are enumerated.
    """
    s = rule.states
    if s ** (s * s) > limit:
        raise BudgetError(f"operator search over {s}^{s * s} tables exceeds the limit {limit}")
    f = rule.as_array().astype(np.int64)
    digits = _neighborhood_digits(rule)
    fa, fb = np.meshgrid(f, f, indexing="ij")
    keys = (fa * s + fb).ravel()
    examined = 0
    for oplus, e in _oplus_candidates(s):
        plus_val = f[_combine(np.array(oplus), digits, s)].ravel()
        forced = np.full(s * s, -1, dtype=np.int64)
        forced[keys] = plus_val
        # all pairs sharing a key must agree on the forced value
        if np.any(forced[keys] != plus_val):
            continue
        free = [k for k in range(s * s) if forced[k] < 0]
        for fill in itertools.product(range(s), repeat=len(free)):
            examined += 1
            if examined > limit:
                raise BudgetError(f"operator search exceeded {limit} candidates")
            otimes = forced.copy()
            otimes[free] = fill
            times_val = f[_combine(otimes, digits, s)].ravel()
            want = np.array(oplus)[keys]
            if np.array_equal(times_val, want):
                return AdditivityWitness(s, tuple(oplus), tuple(int(v) for v in otimes), e)
    return None


def additive_protocol_eval(
    rule: RuleTable,
    witness: AdditivityWitness,
    u: Sequence[int],
    c: int,
    v: Sequence[int],
    table: IteratedTable | None = None,
    check: bool = True,
) -> int:
    """Bob's output in the one-bit protocol for f^n(u, c, v).

    Alice sends f^n(u, c, e..e); Bob evaluates f^n(e..e, e, v) and combines
    with (+) for even n, (x) for odd n.  The center goes to one side only,
    since c (+) e = c while c (+) c need not be c.
    """
    r = rule.radius
    if len(u) != len(v) or len(u) == 0 or len(u) % r:
        raise ValueError("u and v must both hold r*n cells")
    if check and not verify_witness(rule, witness):
        raise ValueError("witness does not satisfy the additivity equations")
    n = len(u) // r
    if table is None or table.n != n:
        table = tabulate(rule, n)
    pad = [witness.neutral] * len(u)
    alice = table(list(u) + [c] + pad)
    bob = table(pad + [witness.neutral] + list(v))
    return witness.add(alice, bob) if n % 2 == 0 else witness.mul(alice, bob)


def essential_positions(table: IteratedTable) -> frozenset[int]:
    """1-based cells f^n actually depends on (leftmost cell is position 1)."""
    s, length = table.states, table.length
    out = set()
    for i in range(length):
        a = table.entries.reshape(s**i, s, s ** (length - 1 - i))
        if np.any(a != a[:, :1, :]):
            out.add(i + 1)
    return frozenset(out)


@dataclass(frozen=True)
class SensibilityLevel:
    n: int
    essential: frozenset[int]
    left_count: int
    right_count: int
    center: bool

    @property
    def total_count(self) -> int:
        return len(self.essential)


def _periodic(values: Sequence[int]) -> bool:
    return any(
        all(values[i] == values[i + p] for i in range(len(values) - p))
        for p in range(1, len(values) // 2 + 1)
    )


@dataclass(frozen=True)
class SensibilityReport:
    levels: tuple[SensibilityLevel, ...]
    window: int = 6

    @property
    def n_max(self) -> int:
        return len(self.levels)

    def _tail(self, attr: str) -> list[int]:
        return [getattr(lv, attr) for lv in self.levels[-self.window :]]

    @property
    def limited(self) -> bool:
        return len(self.levels) >= self.window and _periodic(self._tail("total_count"))

    @property
    def half_limited(self) -> bool:
        if len(self.levels) < self.window:
            return False
        return _periodic(self._tail("left_count")) or _periodic(self._tail("right_count"))

    def to_dict(self) -> dict:
        return {
            "limited": self.limited,
            "half_limited": self.half_limited,
            "total": [lv.total_count for lv in self.levels],
            "left": [lv.left_count for lv in self.levels],
            "right": [lv.right_count for lv in self.levels],
        }


def sensibility_level(table: IteratedTable) -> SensibilityLevel:
    ess = essential_positions(table)
    half = table.rule.radius * table.n
    return SensibilityLevel(
        table.n,
        ess,
        sum(1 for p in ess if p <= half),
        sum(1 for p in ess if p > half + 1),
        half + 1 in ess,
    )


def sensibility_report(rule: RuleTable, n_max: int, window: int = 6, budget: int | None = None) -> SensibilityReport:
    """Counts per level; a side counts as bounded when its trailing window is periodic."""
    levels = tuple(sensibility_level(t) for t in iter_tables(rule, n_max, budget))
    return SensibilityReport(levels, window)


@dataclass(frozen=True)
class NilpotencyReport:
    """Experimental only: constancy observed up to n_max proves nothing beyond it."""

    constant_from: Optional[int]
    n_max: int
    value: Optional[int] = None


def is_constant(table: IteratedTable) -> bool:
    e = table.entries
    return bool(np.all(e == e[0]))


def nilpotency_probe(rule: RuleTable, n_max: int, budget: int | None = None) -> NilpotencyReport:
    constant = [(is_constant(t), int(t.entries[0])) for t in iter_tables(rule, n_max, budget)]
    start = None
    for n in range(n_max, 0, -1):
        if not constant[n - 1][0]:
            break
        start = n
    value = constant[-1][1] if start is not None else None
    return NilpotencyReport(start, n_max, value)
