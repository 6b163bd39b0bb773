"""Iterated local functions f^n, single steps and space-time diagrams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .rules import RuleTable, word_index

DEFAULT_BUDGET = 512 * 2**20


class EvolveError(ValueError):
    """Bad word length or iteration count."""


class BudgetError(MemoryError):
    """Tabulation would exceed the configured memory budget."""


def _code_dtype(rule: RuleTable) -> np.dtype:
    size = len(rule.table)
    for dt in (np.uint8, np.uint16, np.uint32):
        if size - 1 <= np.iinfo(dt).max:
            return np.dtype(dt)
    return np.dtype(np.uint64)


def tabulation_bytes(rule: RuleTable, n: int) -> int:
    """Peak working memory for building f^n from f^(n-1)."""
    s, r = rule.states, rule.radius
    size = s ** (2 * r * n + 1)
    prev = s ** (2 * r * (n - 1) + 1) if n > 1 else 0
    return size * (_code_dtype(rule).itemsize + 1) + prev


def check_budget(rule: RuleTable, n: int, budget: int | None) -> None:
    budget = DEFAULT_BUDGET if budget is None else budget
    need = tabulation_bytes(rule, n)
    if need > budget:
        raise BudgetError(
            f"f^{n} for s={rule.states}, r={rule.radius} needs ~{need} bytes, "
            f"over the memory budget of {budget} bytes"
        )


@dataclass(frozen=True)
class IteratedTable:
    """Truth table of f^n over all words of length 2rn+1."""

    rule: RuleTable
    n: int
    entries: np.ndarray = field(repr=False, compare=False)

    @property
    def states(self) -> int:
        return self.rule.states

    @property
    def length(self) -> int:
        return 2 * self.rule.radius * self.n + 1

    def __len__(self) -> int:
        return self.entries.size

    def __call__(self, word: Sequence[int]) -> int:
        return eval_word(self, word)


def _next_level(rule: RuleTable, prev: np.ndarray) -> np.ndarray:
    s, width = rule.states, rule.width
    m = prev.size
    code = np.zeros(m * s ** (width - 1), dtype=_code_dtype(rule))
    for j in range(width):
        # window j covers digits j .. j+L-1 of the longer word
        view = code.reshape(s**j, m, s ** (width - 1 - j))
        view *= s
        view += prev[None, :, None]
    return rule.as_array()[code]


def iter_tables(rule: RuleTable, n_max: int, budget: int | None = None) -> Iterator[IteratedTable]:
    """Yield f^1, ..., f^n_max, each built from its predecessor."""
    if n_max < 1:
        raise EvolveError(f"n must be >= 1, got {n_max}")
    check_budget(rule, n_max, budget)
    entries = rule.as_array()
    yield IteratedTable(rule, 1, entries)
    for n in range(2, n_max + 1):
        entries = _next_level(rule, entries)
        yield IteratedTable(rule, n, entries)


def tabulate(rule: RuleTable, n: int, budget: int | None = None) -> IteratedTable:
    table = None
    for table in iter_tables(rule, n, budget):
        pass
    assert table is not None
    return table


def eval_word(table: IteratedTable, word: Sequence[int]) -> int:
    if len(word) != table.length:
        raise EvolveError(f"f^{table.n} takes {table.length} cells, got {len(word)}")
    if any(not 0 <= int(c) < table.states for c in word):
        raise EvolveError("cell state out of range")
    return int(table.entries[word_index(word, table.states)])


def step(rule: RuleTable, word: Sequence[int]) -> tuple[int, ...]:
    """Apply the rule once; the result is 2r cells shorter."""
    width = rule.width
    if len(word) < width:
        raise EvolveError(f"word of length {len(word)} is shorter than the neighborhood ({width})")
    return tuple(rule(*word[i : i + width]) for i in range(len(word) - width + 1))


def iterate_word(rule: RuleTable, word: Sequence[int], steps: int) -> tuple[int, ...]:
    out = tuple(word)
    for _ in range(steps):
        out = step(rule, out)
    return out


@dataclass(frozen=True)
class SpacetimeDiagram:
    rows: tuple[tuple[int, ...], ...]
    states: int = 2

    def padded(self) -> np.ndarray:
        """Rows centered in a full-width array, time going upward (row 0 at the bottom)."""
        width = len(self.rows[0])
        out = np.zeros((len(self.rows), width), dtype=np.uint8)
        for t, row in enumerate(self.rows):
            off = (width - len(row)) // 2
            out[len(self.rows) - 1 - t, off : off + len(row)] = row
        return out


def spacetime(rule: RuleTable, word: Sequence[int], steps: int) -> SpacetimeDiagram:
    if steps < 0:
        raise EvolveError("steps must be >= 0")
    need = 2 * rule.radius * steps + 1
    if len(word) < need:
        raise EvolveError(f"{steps} steps need at least {need} cells, got {len(word)}")
    rows = [tuple(int(c) for c in word)]
    for _ in range(steps):
        rows.append(step(rule, rows[-1]))
    return SpacetimeDiagram(tuple(rows), rule.states)
