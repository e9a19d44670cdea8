import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclicmod.groupring import (
    GroupRingCtx,
    IdealHandle,
    MultiGen,
    Pow,
    PowTimes,
    SigmaMinusD,
    ann_closed_form,
    ann_generic,
    build_P,
    build_Q,
    chi,
    ideal_intersect,
    multigen_generators,
    phi_d,
    sigma_pow_minus_one,
    twist_exponent,
)
from cyclicmod.residue import NEG_INF, RingCtx
from cyclicmod.verify import (
    kerint_specs,
    run_kerbasic,
    run_phi,
    run_phidb,
    run_qhomo,
    run_separate,
)


def ring(p, m, i):
    return GroupRingCtx(RingCtx(p, m, i), i)


def all_elements(R):
    for coeffs in itertools.product(range(R.q), repeat=R.order):
        yield R.elem(coeffs)


def enumerated_ideal(I: IdealHandle):
    return {tuple(int(c) for c in f.coeffs) for f in all_elements(I.ctx) if f in I}


def test_level_bounds():
    with pytest.raises(ValueError):
        GroupRingCtx(RingCtx(2, 2, 1), 2)
    with pytest.raises(ValueError):
        GroupRingCtx(RingCtx(2, 2), -1)


def test_P_examples():
    R = ring(2, 2, 1)
    assert build_P(R, 1, 0) == R.one() + R.sigma
    R = ring(3, 1, 2)
    assert build_P(R, 2, 1) == R.one() + R.sigma_pow(3) + R.sigma_pow(6)
    for i in range(3):
        assert build_P(R, i, i) == R.one()
    assert build_P(R, 2, NEG_INF) == R.one()
    with pytest.raises(ValueError):
        build_P(R, 1, 2)


def test_Q_examples():
    R = ring(2, 2, 1)
    assert build_Q(R, 1, 0, 3) == R.scalar(3) + R.sigma
    R = ring(3, 2, 2)
    for i, j in [(1, 0), (2, 0), (2, 1)]:
        assert build_Q(R, i, j, 1) == build_P(R, i, j)
        for d in (4, 7, 13):
            assert np.all((build_Q(R, i, j, d) - build_P(R, i, j)).coeffs % 3 == 0)
    with pytest.raises(ValueError):
        build_Q(R, 1, 0, 2)


@pytest.mark.parametrize("p,m,n", [(2, 3, 2), (3, 2, 2), (5, 2, 1)])
def test_norm_identities(p, m, n):
    R = ring(p, m, n)
    for d in [d for d in range(1, R.q) if d % p == 1]:
        for i in range(n + 1):
            for j in range(i + 1):
                P, Q = build_P(R, i, j), build_Q(R, i, j, d)
                assert (R.sigma_pow(p**j) - 1) * P == R.sigma_pow(p**i) - 1
                dj, di = pow(d, p**j, R.q), pow(d, p**i, R.q)
                assert (R.sigma_pow(p**j) - dj) * Q == R.sigma_pow(p**i) - di
                for k in range(j + 1):
                    assert build_P(R, i, k) == P * build_P(R, j, k)
                    assert build_Q(R, i, k, d) == Q * build_Q(R, j, k, d)


def test_phi_examples():
    R = ring(2, 3, 2)
    for i in (1, 2):
        assert int(phi_d(build_P(R, i, 0), -1)) == 0
    R = ring(3, 4, 2)
    v = int(phi_d(build_P(R, 2, 1), 4))
    assert 1 + 4**3 + 4**6 == 4161 and v == 4161 % 81 and v % 9 == 3
    assert int(phi_d(R.one(), 5)) == 1


@pytest.mark.parametrize("p,m,n", [(2, 3, 1), (3, 2, 1), (2, 2, 2)])
def test_phi_is_multiplicative_when_d_has_order_dividing_group(p, m, n):
    R = ring(p, m, n)
    rng = random.Random(p * 100 + m)
    for d in range(1, R.q):
        if d % p != 1 or pow(d, R.order, R.q) != 1:
            continue
        for _ in range(20):
            f = R.elem([rng.randrange(R.q) for _ in range(R.order)])
            g = R.elem([rng.randrange(R.q) for _ in range(R.order)])
            assert phi_d(f * g, d) == phi_d(f, d) * phi_d(g, d)


def test_chi_examples():
    R = ring(2, 3, 2)
    assert chi(build_P(R, 2, 0), 0) == R.at_level(0).scalar(4)
    for i in (1, 2):
        assert chi(build_Q(R, i, 0, -1), 0).is_zero()
    with pytest.raises(ValueError):
        chi(R.one(), 3)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(0, 2), st.data())
def test_chi_is_a_ring_map(p, m, i, data):
    R = ring(p, m, i)
    j = data.draw(st.integers(0, i))
    f = R.elem(data.draw(st.lists(st.integers(0, R.q - 1), min_size=R.order, max_size=R.order)))
    g = R.elem(data.draw(st.lists(st.integers(0, R.q - 1), min_size=R.order, max_size=R.order)))
    assert chi(f * g, j) == chi(f, j) * chi(g, j)
    assert chi(f + g, j) == chi(f, j) + chi(g, j)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(0, 2), st.data())
def test_ring_axioms(p, m, i, data):
    R = ring(p, m, i)
    draw = lambda: R.elem(data.draw(st.lists(st.integers(0, R.q - 1), min_size=R.order, max_size=R.order)))
    f, g, h = draw(), draw(), draw()
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert R.sigma ** R.order == R.one()


def test_annihilator_examples():
    R = ring(2, 2, 1)
    assert ann_closed_form(R, Pow(1)) == IdealHandle(R, [R.scalar(2)])
    assert twist_exponent(R, 3) == 0
    A = ann_closed_form(R, SigmaMinusD(3))
    assert A == IdealHandle(R, [R.scalar(3) + R.sigma])
    killed = {tuple(int(c) for c in f.coeffs) for f in all_elements(R) if (f * (R.sigma - 3)).is_zero()}
    assert killed == enumerated_ideal(A)
    assert ann_closed_form(R, MultiGen((1,), (NEG_INF,))) == IdealHandle(R, [R.scalar(2)])


def test_generic_annihilator_edge_cases():
    R = ring(3, 2, 1)
    assert ann_generic(R, [R.zero()]) == IdealHandle(R, [R.one()])
    assert ann_generic(R, [R.one()]).is_zero()


@pytest.mark.parametrize("p,m,i", [(2, 2, 1), (3, 1, 1), (2, 1, 2)])
def test_generic_annihilator_matches_enumeration(p, m, i):
    R = ring(p, m, i)
    rng = random.Random(7)
    elems = list(all_elements(R))
    for _ in range(6):
        g = R.elem([rng.randrange(R.q) for _ in range(R.order)])
        want = {tuple(int(c) for c in f.coeffs) for f in elems if (f * g).is_zero()}
        assert enumerated_ideal(ann_generic(R, [g])) == want


def test_intersection_examples():
    R = ring(2, 2, 1)
    I = IdealHandle(R, [R.scalar(2)])
    assert ideal_intersect(I, I) == I
    J = IdealHandle(R, [R.sigma - 1])
    assert enumerated_ideal(ideal_intersect(I, J)) == enumerated_ideal(I) & enumerated_ideal(J)


def test_multigen_validation():
    R = ring(2, 2, 2)
    with pytest.raises(ValueError):
        ann_closed_form(R, MultiGen((0, 1), (NEG_INF, 0)))
    with pytest.raises(ValueError):
        ann_closed_form(R, MultiGen((1, 0), (0, 0)))
    with pytest.raises(ValueError):
        ann_closed_form(R, MultiGen((2,), (NEG_INF,)))
    # equal b entries are allowed
    ann_closed_form(R, MultiGen((1, 1), (NEG_INF, 0)))


def test_equal_c_entries_break_the_closed_form():
    R = ring(2, 2, 0)
    spec = MultiGen((1, 0), (NEG_INF, NEG_INF), allow_equal_c=True)
    assert ann_closed_form(R, spec) != ann_generic(R, multigen_generators(R, spec))


@pytest.mark.parametrize("p,m,i", [(p, m, i) for p in (2, 3) for m in (1, 2, 3) for i in (0, 1, 2)])
def test_multigen_closed_form_matches_generic(p, m, i):
    R = ring(p, m, i)
    for b, c in kerint_specs(p, m, i):
        spec = MultiGen(b, c)
        assert ann_closed_form(R, spec) == ann_generic(R, multigen_generators(R, spec)), (b, c)


@pytest.mark.parametrize("p,m,i", [(p, m, i) for p in (2, 3, 5) for m in (1, 2, 3) for i in (0, 1, 2)])
def test_closed_form_annihilators(p, m, i):
    for k in range(m + 1):
        assert run_kerbasic({"p": p, "m": m, "i": i, "k": k, "j": None})[0] == "pass"
        for j in range(i):
            assert run_kerbasic({"p": p, "m": m, "i": i, "k": k, "j": j})[0] == "pass"
            assert run_separate({"p": p, "m": m, "i": i, "j": j, "k": k})[0] == "pass"
    for d in range(1, p**m):
        if d % p == 1 % p:
            assert run_phidb({"p": p, "m": m, "i": i, "d": d})[0] == "pass"
    for j in range(i):
        assert run_qhomo({"p": p, "m": m, "i": i, "j": j}) == ("pass", {})


@pytest.mark.parametrize("p", [2, 3, 5])
def test_norm_evaluation_congruences(p):
    for i in range(3):
        for j in range(i + 1):
            assert run_phi({"p": p, "i": i, "j": j}) == ("pass", {})


def test_sigma_pow_minus_one_conventions():
    R = ring(3, 2, 2)
    assert sigma_pow_minus_one(R, NEG_INF) == -R.one()
    assert sigma_pow_minus_one(R, 1) == R.sigma_pow(3) - 1


def test_inflate_and_reduce():
    R0, R1 = ring(2, 3, 1), ring(2, 3, 2)
    f = R0.elem([3, 5])
    assert f.inflate(R1) == R1.elem([3, 5, 0, 0])
    assert f.reduce_mod(1).coeffs.tolist() == [1, 1]
    with pytest.raises(ValueError):
        R1.one().inflate(R0)
