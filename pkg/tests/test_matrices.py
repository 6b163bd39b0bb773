import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cacc.evolve import IteratedTable, iter_tables, tabulate
from cacc.matrices import (
    MatrixError,
    StateMatrix,
    build_center_matrix,
    build_partition_matrix,
    digit_reversal,
    export_pbm,
    netpbm_bytes,
    profile,
    rank_gf2,
)
from cacc.oracles import rule132_identity_indices, three_state_rule
from cacc.rules import eca_from_wolfram, representatives, space_mirror

bit_matrices = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 1))


def dense_rank_gf2(a):
    """Textbook elimination on a copied uint8 array."""
    a = a.copy() % 2
    rank = 0
    for col in range(a.shape[1]):
        pivots = np.nonzero(a[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        a[[rank, p]] = a[[p, rank]]
        for r in range(a.shape[0]):
            if r != rank and a[r, col]:
                a[r] ^= a[rank]
        rank += 1
        if rank == a.shape[0]:
            break
    return rank


def test_center_matrix_rule_105():
    m = build_center_matrix(tabulate(eca_from_wolfram(105), 1), 0)
    assert m.entries.tolist() == [[1, 0], [0, 1]]


def test_center_matrix_rule_0():
    for n in (1, 3):
        for c in (0, 1):
            assert not build_center_matrix(tabulate(eca_from_wolfram(0), n), c).entries.any()


def test_center_matrix_row_is_reversed():
    # n = 2: row i = 1 -> b_1 = 01 reversed = 10 on the left, i.e. x_{-2} = 1
    t = tabulate(eca_from_wolfram(204), 2)
    m = build_center_matrix(t, 1)
    word = (1, 0, 1, 0, 1)  # left 10, center 1, right 01 = b_1
    assert m.entries[1, 1] == t(word)


def test_center_out_of_range():
    with pytest.raises(MatrixError):
        build_center_matrix(tabulate(eca_from_wolfram(30), 2), 2)


@pytest.mark.parametrize("n", range(1, 8))
def test_rule_132_identity_submatrix(n):
    m = build_center_matrix(tabulate(eca_from_wolfram(132), n), 1)
    rows, cols = rule132_identity_indices(n)
    sub = m.entries[np.ix_(rows, cols)]
    assert (sub == np.eye(n + 1, dtype=np.uint8)).all()


def test_center_matrix_consumes_each_entry_once():
    rule = eca_from_wolfram(30)
    for n in (1, 2, 3):
        length = 2 * n + 1
        fake = IteratedTable(rule, n, np.arange(2**length))
        for c in (0, 1):
            used = build_center_matrix(fake, c).entries.ravel()
            expected = [i for i in range(2**length) if (i >> n) & 1 == c]
            assert sorted(used.tolist()) == expected


def test_partition_matrix_shapes_and_range():
    t = tabulate(eca_from_wolfram(30), 3)
    for p in range(1, 7):
        m = build_partition_matrix(t, p)
        assert (m.rows, m.cols) == (2**p, 2 ** (7 - p))
    for p in (0, 7):
        with pytest.raises(MatrixError):
            build_partition_matrix(t, p)


def test_partition_matrix_contains_center_matrices():
    """With p = n Bob holds the center; fixing it selects every other column."""
    perm = digit_reversal(3, 2)
    for code in (30, 110, 132):
        t = tabulate(eca_from_wolfram(code), 3)
        mp = build_partition_matrix(t, 3)
        for c in (0, 1):
            # Bob's word is read reversed, so the center is the low digit of v
            block = mp.entries[:, c::2]
            assert (build_center_matrix(t, c).entries == block[perm][:, perm]).all()


def test_partition_matrix_rule_0():
    t = tabulate(eca_from_wolfram(0), 3)
    for p in range(1, 7):
        assert profile(build_partition_matrix(t, p)).d == 1


def test_profile_examples():
    assert profile(StateMatrix(np.eye(8, dtype=np.uint8))).distinct_rows == 8
    assert profile(StateMatrix(np.eye(8, dtype=np.uint8))).distinct_cols == 8
    z = profile(StateMatrix(np.zeros((4, 9), dtype=np.uint8)))
    assert (z.distinct_rows, z.distinct_cols) == (1, 1)
    m = build_center_matrix(tabulate(eca_from_wolfram(105), 5), 0)
    assert profile(m).distinct_rows == 2


def test_profile_multistate():
    m = StateMatrix(np.array([[0, 1, 2], [0, 1, 2], [2, 2, 2]], dtype=np.uint8), states=3)
    p = profile(m)
    assert (p.distinct_rows, p.distinct_cols) == (2, 3)


@given(bit_matrices, st.randoms())
def test_profile_permutation_invariant(a, rnd):
    rows = list(range(a.shape[0]))
    cols = list(range(a.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assert profile(StateMatrix(a)) == profile(StateMatrix(a[rows][:, cols]))


@given(bit_matrices)
def test_profile_matches_set_count(a):
    p = profile(StateMatrix(a))
    assert p.distinct_rows == len({tuple(r) for r in a.tolist()})
    assert p.distinct_cols == len({tuple(c) for c in a.T.tolist()})


def test_mirror_transposes_center_matrix():
    for code in representatives():
        f = eca_from_wolfram(code)
        for t, tm in zip(iter_tables(f, 4), iter_tables(space_mirror(f), 4)):
            for c in (0, 1):
                assert (build_center_matrix(tm, c).entries == build_center_matrix(t, c).entries.T).all()


def test_rank_examples():
    for n in range(1, 6):
        assert rank_gf2(StateMatrix(np.eye(2**n, dtype=np.uint8))) == 2**n
    assert rank_gf2(StateMatrix(np.ones((5, 7), dtype=np.uint8))) == 1
    assert rank_gf2(StateMatrix(np.zeros((3, 3), dtype=np.uint8))) == 0


def test_rank_rejects_multistate():
    with pytest.raises(MatrixError):
        rank_gf2(StateMatrix(np.zeros((2, 2), dtype=np.uint8), states=3))


@settings(max_examples=200)
@given(bit_matrices)
def test_rank_matches_dense_elimination(a):
    m = StateMatrix(a)
    r = rank_gf2(m)
    assert r == dense_rank_gf2(a)
    p = profile(m)
    if a.any():
        assert 1 <= r <= min(p.distinct_rows, p.distinct_cols)
    else:
        assert r == 0


def test_rank_bounded_by_distinct_rows_on_eca_matrices():
    for code in representatives():
        for t in iter_tables(eca_from_wolfram(code), 5):
            for c in (0, 1):
                m = build_center_matrix(t, c)
                p = profile(m)
                r = rank_gf2(m)
                assert r <= min(p.distinct_rows, p.distinct_cols)


def test_pbm_identity_2x2():
    buf = io.BytesIO()
    export_pbm(StateMatrix(np.eye(2, dtype=np.uint8)), buf)
    assert buf.getvalue() == b"P4\n2 2\n\x80\x40"


def test_pbm_zero_row():
    assert netpbm_bytes(StateMatrix(np.zeros((1, 8), dtype=np.uint8))) == b"P4\n8 1\n\x00"


def test_pbm_row_padding():
    a = np.ones((2, 9), dtype=np.uint8)
    assert netpbm_bytes(StateMatrix(a)) == b"P4\n9 2\n\xff\x80\xff\x80"


def test_pbm_rule_105_scanlines(tmp_path):
    out = tmp_path / "m.pbm"
    export_pbm(build_center_matrix(tabulate(eca_from_wolfram(105), 5), 0), out)
    data = out.read_bytes()
    header = b"P4\n32 32\n"
    assert data.startswith(header)
    body = data[len(header):]
    assert len(body) == 32 * 4
    assert len({body[i : i + 4] for i in range(0, len(body), 4)}) == 2


def test_pgm_fallback():
    m = build_center_matrix(tabulate(three_state_rule(), 1), 0)
    data = netpbm_bytes(m)
    header = b"P5\n3 3\n255\n"
    assert data.startswith(header)
    gray = np.frombuffer(data[len(header):], dtype=np.uint8).reshape(3, 3)
    assert (gray == m.entries.astype(int) * 255 // 2).all()


def test_export_is_deterministic():
    m = build_center_matrix(tabulate(eca_from_wolfram(110), 6), 1)
    assert netpbm_bytes(m) == netpbm_bytes(m)
