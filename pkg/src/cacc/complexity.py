"""The distinct-row measure d_n, one-way cost, partition scans and the
Bounded / Linear / Other classification of d_n sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .evolve import IteratedTable, iter_tables, tabulate
from .matrices import build_center_matrix, build_partition_matrix, profile
from .rules import RuleTable


class ClassifyError(ValueError):
    pass


def center_profiles(table: IteratedTable) -> list[tuple[int, int]]:
    """(distinct rows, distinct cols) of M_c^n for every center state c."""
    out = []
    for c in range(table.states):
        prof = profile(build_center_matrix(table, c))
        out.append((prof.distinct_rows, prof.distinct_cols))
    return out


def d_from_profiles(profiles: Iterable[tuple[int, int]]) -> int:
    return max(max(pair) for pair in profiles)


def d_n(rule: RuleTable, n: int, budget: int | None = None) -> int:
    return d_from_profiles(center_profiles(tabulate(rule, n, budget)))


def one_way_cc(d: int) -> int:
    """Bits Alice must send when her inputs fall into d row classes."""
    if d < 1:
        raise ValueError(f"row count must be >= 1, got {d}")
    return (d - 1).bit_length()


@dataclass(frozen=True)
class ComplexitySequence:
    rule: str
    values: tuple[int, ...]

    @property
    def n_max(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        """d_n, 1-based."""
        return self.values[n - 1]


def d_sequence(rule: RuleTable, n_max: int, budget: int | None = None) -> ComplexitySequence:
    values = [d_from_profiles(center_profiles(t)) for t in iter_tables(rule, n_max, budget)]
    return ComplexitySequence(rule.label, tuple(values))


@dataclass(frozen=True)
class ClassifierParams:
    tail_len: int = 6
    min_n: int = 4

    def __post_init__(self) -> None:
        if self.tail_len < 3:
            raise ClassifyError("tail_len must be >= 3")
        if self.min_n < 1:
            raise ClassifyError("min_n must be >= 1")


@dataclass(frozen=True)
class ClassLabel:
    kind: str  # "Bounded" | "Linear" | "Other"
    b: int | None = None
    period: int | None = None
    a1: Fraction | None = None
    a0: int | None = None
    n0: int | None = None
    growth_hint: float | None = field(default=None, compare=False)

    def __str__(self) -> str:
        if self.kind == "Bounded":
            return f"Bounded{{b={self.b}}}"
        if self.kind == "Linear":
            return f"Linear{{a1={self.a1}, a0={self.a0}, n0={self.n0}}}"
        return "Other"


def _tail_period(tail: Sequence[int]) -> int | None:
    for p in range(1, len(tail) // 2 + 1):
        if all(tail[i] == tail[i + p] for i in range(len(tail) - p)):
            return p
    return None


def simplest_fraction(lo: Fraction, hi: Fraction) -> Fraction:
    """The fraction with the smallest denominator in [lo, hi) (requires lo < hi)."""
    q = 1
    while True:
        num = math.ceil(lo * q)
        if Fraction(num, q) < hi:
            return Fraction(num, q)
        q += 1


def fit_floor_line(points: Sequence[tuple[int, int]], a0: int) -> Fraction | None:
    """Simplest a1 with d = floor(a1*n) + a0 at every (n, d), or None."""
    lo, hi = Fraction(0), None
    for n, d in points:
        lo = max(lo, Fraction(d - a0, n))
        top = Fraction(d - a0 + 1, n)
        hi = top if hi is None else min(hi, top)
    if hi is None or lo >= hi:
        return None
    return simplest_fraction(lo, hi)


def fit_linear(points: Sequence[tuple[int, int]]) -> tuple[Fraction, int] | None:
    """Exact fit of d_n = floor(a1*n) + a0 with a1 > 0 and a0 a natural number.

    Among all feasible a0 the one yielding the smallest denominator of a1 wins,
    ties going to the larger a0.
    """
    best = None
    for a0 in range(min(d for _, d in points), -1, -1):
        a1 = fit_floor_line(points, a0)
        if a1 is None or a1 <= 0:
            continue
        if best is None or a1.denominator < best[0].denominator:
            best = (a1, a0)
    return best


def growth_hint(values: Sequence[int], tail_len: int) -> float | None:
    """Log-log slope over the tail; ~1 for linear, larger for faster growth."""
    n_hi, n_lo = len(values), len(values) - tail_len + 1
    d_hi, d_lo = values[n_hi - 1], values[n_lo - 1]
    if d_lo <= 0 or n_lo <= 0 or n_hi == n_lo:
        return None
    return round(math.log(d_hi / d_lo) / math.log(n_hi / n_lo), 4)


def classify(seq: ComplexitySequence | Sequence[int], params: ClassifierParams = ClassifierParams()) -> ClassLabel:
    values = tuple(seq.values if isinstance(seq, ComplexitySequence) else seq)
    if len(values) < params.min_n + params.tail_len:
        raise ClassifyError(
            f"need at least {params.min_n + params.tail_len} values, got {len(values)}"
        )
    start = len(values) - params.tail_len + 1
    tail = values[start - 1 :]

    period = _tail_period(tail)
    if period is not None:
        return ClassLabel("Bounded", b=max(tail), period=period)

    if fit_linear([(n, values[n - 1]) for n in range(start, len(values) + 1)]):
        # report the fit reaching furthest back towards min_n
        for n0 in range(params.min_n, start + 1):
            fit = fit_linear([(n, values[n - 1]) for n in range(n0, len(values) + 1)])
            if fit is not None:
                return ClassLabel("Linear", a1=fit[0], a0=fit[1], n0=n0)
    return ClassLabel("Other", growth_hint=growth_hint(values, params.tail_len))


@dataclass(frozen=True)
class RnScan:
    n: int
    rows: tuple[int, ...]  # distinct rows of M_p^n, p = 1..len
    cols: tuple[int, ...]

    @property
    def per_p(self) -> tuple[int, ...]:
        return tuple(max(r, c) for r, c in zip(self.rows, self.cols))

    @property
    def r_n(self) -> int:
        return max(self.per_p)

    @property
    def argmax_p(self) -> int:
        return self.per_p.index(self.r_n) + 1

    @property
    def r_n_rows(self) -> int:
        return max(self.rows)

    @property
    def argmax_p_rows(self) -> int:
        return self.rows.index(self.r_n_rows) + 1


def r_n_scan_table(table: IteratedTable) -> RnScan:
    rows, cols = [], []
    for p in range(1, 2 * table.rule.radius * table.n + 1):
        prof = profile(build_partition_matrix(table, p))
        rows.append(prof.distinct_rows)
        cols.append(prof.distinct_cols)
    return RnScan(table.n, tuple(rows), tuple(cols))


def r_n_scan(rule: RuleTable, n: int, budget: int | None = None) -> RnScan:
    return r_n_scan_table(tabulate(rule, n, budget))


@dataclass(frozen=True)
class RowClassProtocol:
    """One-way protocol for a fixed center: Alice names the class of her row,
    Bob reads the answer from that class's representative row."""

    center: int
    alice: dict[int, int]  # row index -> class id
    bob: tuple[tuple[int, ...], ...]  # class id -> representative row

    @property
    def classes(self) -> int:
        return len(self.bob)

    @property
    def bits(self) -> int:
        return one_way_cc(self.classes)

    def run(self, row: int, col: int) -> int:
        return self.bob[self.alice[row]][col]


def row_class_protocol(table: IteratedTable, center: int) -> RowClassProtocol:
    m = build_center_matrix(table, center).entries
    ids: dict[bytes, int] = {}
    alice = {}
    reps = []
    for i, row in enumerate(m):
        key = row.tobytes()
        if key not in ids:
            ids[key] = len(reps)
            reps.append(tuple(int(x) for x in row))
        alice[i] = ids[key]
    return RowClassProtocol(center, alice, tuple(reps))
