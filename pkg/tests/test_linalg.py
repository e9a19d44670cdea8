import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclicmod.linalg import (
    MatrixZpm,
    Solver,
    howell,
    intersect_array,
    kernel,
    smith_cols,
    solve,
    span_equal,
    span_member,
)
from cyclicmod.residue import RingCtx
from cyclicmod.verify import howell_canonical_trial, kernel_enumeration_trial, span_set


def M(p, m, rows):
    return MatrixZpm.from_rows(RingCtx(p, m), rows)


def enumerate_span(p, m, rows):
    a = np.array(rows, dtype=np.int64)
    return span_set(a, p, m, a.shape[1])


def test_identity_is_its_own_form():
    A = MatrixZpm.identity(RingCtx(3, 2), 3)
    assert howell(A).matrix == A


def test_howell_example_span_size():
    H = howell(M(2, 2, [[2, 0], [0, 1], [2, 2]]))
    assert H.order_exponent() == 3
    assert enumerate_span(2, 2, H.matrix.tolist()) == enumerate_span(2, 2, [[2, 0], [0, 1], [2, 2]])
    assert len(enumerate_span(2, 2, [[2, 0], [0, 1]])) == 8


def test_howell_pivots_are_p_powers_and_reduce_entries_above():
    rng = random.Random(5)
    for _ in range(200):
        p, m = rng.choice([2, 3]), rng.randint(1, 3)
        q = p**m
        A = M(p, m, [[rng.randrange(q) for _ in range(4)] for _ in range(4)])
        H = howell(A)
        cols = [c for _, c, _ in H.pivots]
        assert cols == sorted(set(cols))
        for r, c, e in H.pivots:
            assert H.matrix.entries[r, c] == p**e and e < m
            for above in range(r):
                assert H.matrix.entries[above, c] < p**e


def test_howell_is_canonical_under_row_operations():
    rng = random.Random(11)
    assert all(howell_canonical_trial(rng) for _ in range(300))


def test_kernel_examples():
    K = kernel(M(2, 2, [[2]]))
    assert span_equal(howell(K), howell(M(2, 2, [[2]])))
    K = kernel(M(3, 2, [[3], [1]]))
    assert span_equal(howell(K), howell(M(3, 2, [[1, 6]])))
    K = kernel(M(3, 1, [[0, 0], [0, 0]]))
    assert howell(K).order_exponent() == 2


def test_kernel_matches_enumeration():
    rng = random.Random(3)
    done = 0
    while done < 60:
        res = kernel_enumeration_trial(rng)
        if res is None:
            continue
        assert res
        done += 1


def test_solve_examples():
    A = M(2, 2, [[2]])
    assert list(solve(A, [0])) == [0]
    x = solve(A, [2])
    assert x is not None and (int(x[0]) * 2) % 4 == 2
    assert solve(A, [1]) is None


def test_span_member_examples():
    H = howell(M(2, 2, [[2, 0]]))
    assert span_member(H, [0, 0])
    assert span_member(H, [2, 0])
    assert not span_member(H, [1, 0])


def test_span_equal_examples():
    assert span_equal(howell(M(2, 3, [[2]])), howell(M(2, 3, [[6]])))
    assert not span_equal(howell(M(2, 3, [[2]])), howell(M(2, 3, [[4]])))
    with pytest.raises(ValueError):
        span_equal(howell(M(2, 3, [[2]])), howell(M(2, 3, [[2, 0]])))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 2), st.data())
def test_membership_matches_enumerated_span(p, m, data):
    q = p**m
    rows = data.draw(st.lists(st.lists(st.integers(0, q - 1), min_size=2, max_size=2), min_size=1, max_size=2))
    span = enumerate_span(p, m, rows)
    H = howell(M(p, m, rows))
    for v in itertools.product(range(q), repeat=2):
        assert span_member(H, v) == (v in span)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.data())
def test_solve_agrees_with_membership(p, m, data):
    q = p**m
    rows = data.draw(st.lists(st.lists(st.integers(0, q - 1), min_size=3, max_size=3), min_size=1, max_size=3))
    b = data.draw(st.lists(st.integers(0, q - 1), min_size=3, max_size=3))
    A = M(p, m, rows)
    x = solve(A, b)
    assert (x is not None) == span_member(howell(A), b)
    if x is not None:
        assert np.all((np.asarray(x) @ A.entries - b) % q == 0)


def test_solver_reuse():
    A = np.array([[1, 2], [0, 3]])
    S = Solver(A, 3, 2)
    for b in ([1, 2], [0, 3], [0, 0], [2, 1]):
        x = S.solve(b)
        assert x is not None and np.all((x @ A - b) % 9 == 0)


def test_intersection_matches_enumeration():
    rng = random.Random(8)
    for _ in range(40):
        p, m = rng.choice([2, 3]), rng.randint(1, 2)
        q = p**m
        a = np.array([[rng.randrange(q) for _ in range(2)] for _ in range(2)])
        b = np.array([[rng.randrange(q) for _ in range(2)] for _ in range(2)])
        inter = intersect_array(a, b, p, m)
        want = enumerate_span(p, m, a) & enumerate_span(p, m, b)
        got = enumerate_span(p, m, inter) if inter.shape[0] else {(0, 0)}
        assert got == want


def test_smith_cols_diagonalises():
    rng = random.Random(2)
    for _ in range(50):
        p, m = rng.choice([2, 3]), rng.randint(1, 3)
        q = p**m
        a = np.array([[rng.randrange(q) for _ in range(3)] for _ in range(3)])
        exps, V, Vinv = smith_cols(a, p, m)
        assert np.all((V @ Vinv) % q == np.eye(3, dtype=np.int64))
        diag = np.diag([p**e % q for e in exps]) % q
        assert span_equal(howell(M(p, m, a @ V % q)), howell(M(p, m, diag)))
