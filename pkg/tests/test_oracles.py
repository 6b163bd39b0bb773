import itertools
import math

import pytest
from hypothesis import given, strategies as st

from cacc.complexity import center_profiles, d_n, d_sequence
from cacc.evolve import iter_tables, tabulate
from cacc.matrices import build_center_matrix, profile
from cacc.oracles import (
    INF,
    ThreeStateContext,
    comparison_expected,
    comparison_rule,
    rule23_dn,
    rule132_center_rows,
    rule132_dn,
    three_state_context,
    three_state_dn_bounds,
    three_state_predict,
    three_state_rule,
    tilde,
)
from cacc.rules import eca_from_wolfram

from naive import naive_fn


def test_rule132_closed_form():
    f = eca_from_wolfram(132)
    for n, t in enumerate(iter_tables(f, 10), 1):
        assert d_n(f, n) == rule132_dn(n)
        for c in (0, 1):
            assert profile(build_center_matrix(t, c)).distinct_rows == rule132_center_rows(n, c)


def test_rule23_closed_form():
    seq = d_sequence(eca_from_wolfram(23), 10).values
    assert seq == tuple(rule23_dn(n) for n in range(1, 11))


def test_three_state_rule_local_map():
    f = three_state_rule()
    assert f(1, 0, 1) == 0
    assert f(2, 0, 2) == 0
    assert f(1, 0, 0) == 1
    assert f(0, 1, 2) == 2
    assert f(0, 0, 0) == 0


@pytest.mark.parametrize("n", range(1, 6))
def test_three_state_prediction_exhaustive(n):
    ref = naive_fn(3, 1, three_state_rule().table, n)
    for w, out in ref.items():
        c, ctx = three_state_context(w)
        assert three_state_predict(c, ctx, n) == out, w


@pytest.mark.parametrize("n", range(1, 6))
def test_three_state_dn_in_bounds(n):
    d = d_n(three_state_rule(), n)
    lo, hi = three_state_dn_bounds(n)
    assert lo <= d <= hi
    assert hi <= 4 * (n + 1) ** 2


def test_three_state_dn_values():
    # measured: exactly the lower-bound construction
    assert d_sequence(three_state_rule(), 5).values == (3, 6, 10, 15, 21)


def test_three_state_context_examples():
    c, ctx = three_state_context((2, 1, 0, 0, 2))
    assert c == 0
    assert ctx == ThreeStateContext(1, 2, INF, 2)
    c, ctx = three_state_context((0, 0, 1, 0, 0))
    assert (c, ctx) == (1, ThreeStateContext(INF, INF, INF, INF))


def test_three_state_context_invariants():
    with pytest.raises(ValueError):
        ThreeStateContext(3, 2, INF, INF)
    with pytest.raises(ValueError):
        ThreeStateContext(0, INF, INF, INF)
    with pytest.raises(ValueError):
        three_state_context((0, 1))


def test_three_state_bounds_reject_zero():
    with pytest.raises(ValueError):
        three_state_dn_bounds(0)


@given(st.integers(1, 200))
def test_three_state_bounds_ordered(n):
    lo, hi = three_state_dn_bounds(n)
    assert lo <= hi
    assert hi >= (n + 1) ** 2


def test_comparison_rule_symbols():
    assert tilde(0) == 2 and tilde(1) == 3
    rule = comparison_rule()
    assert rule.states == 4 and rule.radius == 1


@pytest.mark.parametrize("n", range(1, 5))
def test_comparison_expected_matches(n):
    t = tabulate(comparison_rule(), n)
    for u in itertools.product((0, 1), repeat=n):
        for v in itertools.product((0, 1), repeat=n):
            word = u + (1,) + tuple(tilde(b) for b in v)
            assert t(word) == comparison_expected(u, v)


@pytest.mark.parametrize("n", range(1, 6))
def test_comparison_rows_exponential(n):
    rows = center_profiles(tabulate(comparison_rule(), n))[1][0]
    assert rows >= 2**n
    assert math.log2(d_n(comparison_rule(), n)) >= n


def test_comparison_expected_length_check():
    with pytest.raises(ValueError):
        comparison_expected((0,), (0, 1))
