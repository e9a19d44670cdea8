import itertools

import pytest
from hypothesis import given, strategies as st

from cyclicmod.residue import (
    INF,
    NEG_INF,
    PowerKind,
    Residue,
    RingCtx,
    in_U,
    in_minus_U,
    minus_u_level,
    p_pow,
    pow_class,
    pow_expansion_check,
    u_level,
    val_p,
)


def R(p, m, x):
    return Residue(RingCtx(p, m), x)


def test_ringctx_rejects_composite_and_bad_exponents():
    with pytest.raises(ValueError):
        RingCtx(4, 2)
    with pytest.raises(ValueError):
        RingCtx(3, 0)
    with pytest.raises(ValueError):
        RingCtx(3, 2, -1)


def test_values_are_canonical():
    assert R(3, 2, -1).value == 8
    assert R(3, 2, 10) == R(3, 2, 1)
    assert hash(R(3, 2, 10)) == hash(R(3, 2, 1))


def test_mixing_rings_is_an_error():
    with pytest.raises(ValueError):
        R(3, 2, 1) + R(3, 3, 1)


def test_val_p_examples():
    assert val_p(R(3, 4, 9)) == 2
    assert val_p(R(2, 3, 0)) == INF
    assert val_p(R(2, 3, 6)) == 1


def test_in_U_examples():
    assert in_U(R(3, 4, 10), 2)
    assert not in_U(R(3, 4, 4), 2)
    assert in_U(R(2, 3, 1), INF)
    assert not in_U(R(2, 3, 5), INF)
    with pytest.raises(ValueError):
        in_U(R(2, 3, 1), 0)


def test_in_minus_U_examples():
    assert in_minus_U(R(2, 4, 7), 3)
    assert not in_minus_U(R(2, 4, 7), 4)
    assert in_minus_U(R(2, 4, 15), 4)
    with pytest.raises(ValueError):
        in_minus_U(R(3, 2, 2), 1)


def test_levels():
    assert u_level(R(2, 5, 1)) == INF
    assert u_level(R(2, 5, 5)) == 2
    assert minus_u_level(R(2, 5, 31)) == INF
    assert minus_u_level(R(2, 5, 7)) == 3


def test_p_pow_conventions():
    assert p_pow(3, NEG_INF) == 0
    assert p_pow(3, 2) == 9
    with pytest.raises(ValueError):
        p_pow(3, -1)


def test_pow_class_examples():
    c = pow_class(R(3, 7, 4), 1, 2)
    assert c.kind is PowerKind.IN_U_NOT_NEXT and c.level == 3
    assert pow(4, 9, 3**7) == 262144 % 3**7
    assert c.contains(R(3, 7, 262144))
    assert pow_class(R(2, 5, -1), 1, 1).kind is PowerKind.EXACTLY_ONE
    c = pow_class(R(2, 6, 7), 1, 1)
    assert c.level == 4 and c.contains(R(2, 6, 49))
    with pytest.raises(ValueError):
        pow_class(R(3, 3, 2), 1, 1)


@pytest.mark.parametrize("p,m", [(p, m) for p in (2, 3, 5) for m in range(1, 7) if p**m <= 5**4])
def test_pow_class_contains_direct_power(p, m):
    ctx = RingCtx(p, m)
    for dv in range(1, p**m):
        d = Residue(ctx, dv)
        for i in range(1, m + 1):
            if not in_U(d, i):
                continue
            for j in range(4):
                assert pow_class(d, i, j).contains(d ** (p**j)), (dv, i, j)


@pytest.mark.parametrize("m", range(1, 7))
def test_squares_of_odd_numbers_gain_an_extra_level(m):
    ctx = RingCtx(2, m)
    for dv in range(1, 2**m, 2):
        for j in range(1, 4):
            assert in_U(Residue(ctx, dv) ** (2**j), j + 2)


def test_expansion_examples():
    assert pow_expansion_check(R(3, 6, 10), 2, 1)
    assert pow_expansion_check(R(2, 6, 5), 2, 1)
    assert 5**2 == 1 + 8 * (1 + 2)
    for p, i, j in itertools.product((2, 3), (1, 2), (0, 1, 2)):
        assert pow_expansion_check(R(p, 6, 1), i, j)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_expansion_holds_for_positive_j(p):
    m = 6 if p < 5 else 4
    ctx = RingCtx(p, m)
    for dv in range(1, p**m):
        d = Residue(ctx, dv)
        for i in range(1, 4):
            if (dv - 1) % p**i:
                continue
            for j in range(1 if p == 2 else 0, 4):
                assert pow_expansion_check(d, i, j), (dv, i, j)


def test_expansion_for_p2_fails_without_a_squaring():
    # with j = 0 the correction 2^(i-1) x would have to vanish
    assert not pow_expansion_check(R(2, 6, 3), 1, 0)


@given(st.sampled_from([2, 3, 5]), st.integers(1, 5), st.integers(0, 10**6), st.integers(0, 10**6))
def test_val_p_of_product(p, m, a, b):
    x, y = R(p, m, a), R(p, m, b)
    va, vb, vab = val_p(x), val_p(y), val_p(x * y)
    assert vab >= min(va + vb, m) or vab == INF
    if va + vb < m:
        assert vab == va + vb


@given(st.sampled_from([2, 3, 5]), st.integers(1, 5), st.integers(0, 10**6))
def test_units_invert(p, m, a):
    x = R(p, m, a)
    if x.is_unit():
        assert (x * x.inverse()).value == 1
