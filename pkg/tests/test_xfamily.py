import json

import pytest

from cyclicmod.groupring import build_P
from cyclicmod.indecomp import is_indecomposable
from cyclicmod.module import act, is_cyclic, iso_signature, length, min_generators, scramble
from cyclicmod.residue import NEG_INF
from cyclicmod.verify import SweepConfig, degenerate_tuples, valid_case, valid_tuples
from cyclicmod.xfamily import (
    PaperInconsistency,
    XParams,
    build_x,
    check_conditions,
    decompose_degenerate_n1,
    decompose_iii_failure,
    decompose_iii_smallest,
    guard_holds,
    iii_witnesses,
    quotient_split_check,
    recover_a,
    solve_q,
)

N = NEG_INF


def test_params_validation_and_json():
    P = XParams(3, 2, 2, (0, 2), 13)
    assert P.d == 4
    assert XParams.from_json(json.loads(json.dumps(P.to_json()))) == P
    assert XParams(2, 1, 2, (N, 1), 1).to_json()["a"] == [None, 1]
    with pytest.raises(ValueError):
        XParams(3, 2, 2, (0,), 1)
    with pytest.raises(ValueError):
        XParams(3, 2, 1, (3,), 1)
    with pytest.raises(ValueError):
        XParams(3, 2, 1, (2,), 1)
    with pytest.raises(ValueError):
        XParams(4, 2, 1, (0,), 1)
    with pytest.raises(ValueError):
        XParams.from_json({"p": 3, "n": 2, "m": 1, "a": [1.5], "d": 1})


def test_condition_examples():
    rep = check_conditions(XParams(3, 2, 2, (0, 2), 4))
    assert rep.overall
    assert pow(4, 9, 9) == 1 and 262144 % 9 == 1
    for d in range(4):
        rep = check_conditions(XParams(2, 1, 1, (0,), d))
        assert not rep.IV
    rep = check_conditions(XParams(2, 2, 2, (0, 1), 1))
    assert rep.failed_clauses() == ["III"]
    assert not check_conditions(XParams(3, 2, 1, (0,), 2)).I


def test_condition_three_exception_branch():
    # p=2, d not in U_2, a_0=0: the i=0 inequalities become a_j != 0
    P = XParams(2, 2, 3, (0, N, 1), 3)
    rep = check_conditions(P)
    assert rep.III
    assert not check_conditions(P.replace(a=(0, 0, 1))).III


def test_build_examples():
    X = build_x(XParams(3, 1, 1, (0,), 1))
    assert is_cyclic(X.module) and X.module.order_exponent() == 2
    for p, n, m, d in [(2, 2, 2, 1), (3, 1, 2, 4), (2, 1, 3, 7)]:
        X = build_x(XParams(p, n, m, (N,) * m, d))
        assert X.module.order_exponent() == m
    X = build_x(XParams(2, 4, 4, (1, 2, 3, 4), 1))
    from cyclicmod.module import Submodule

    x0 = Submodule.generated_by(X.module, [X.x(0).coords])
    assert x0.order_exponent() == 4 * 2


def test_relations_and_lengths_hold_on_the_sweep():
    for P in valid_tuples(SweepConfig(p_range=[2, 3], n_range=[1, 2], m_range=[1, 2])):
        X = build_x(P)
        assert X.check_relations()
        assert X.lengths() == X.expected_lengths()


def test_y_length_examples():
    X = build_x(XParams(3, 2, 1, (1,), 1))
    assert length(X.y) == 4
    X = build_x(XParams(3, 2, 2, (N, 2), 1))
    assert length(X.y) == 1 and length(X.x(1)) == 9


def test_min_generators_lower_bound():
    X = build_x(XParams(3, 2, 3, (N, 1, 2), 1))
    assert min_generators(X.module) >= 2


def test_quotient_split_examples():
    assert quotient_split_check(build_x(XParams(2, 2, 2, (N, 1), 1)))
    assert quotient_split_check(build_x(XParams(3, 2, 2, (0, 2), 4)))
    assert quotient_split_check(build_x(XParams(3, 2, 2, (0, N), 4)))
    with pytest.raises(ValueError):
        quotient_split_check(build_x(XParams(3, 2, 1, (0,), 1)))


def test_indecomposable_small_sweep():
    for P in valid_tuples(SweepConfig(p_range=[2, 3], n_range=[1, 2], m_range=[1, 2])):
        res = valid_case(P)
        assert res["indecomposable"], P
        assert res.get("quotient_split", True)


def test_explicit_split_small_example():
    P = XParams(2, 2, 2, (0, 1), 1)
    assert iii_witnesses(P) == [0] and guard_holds(P, 0)
    R = P.ring
    Q = solve_q(P, 0)
    # (sigma - d) Q = p^(m-1) - p^e P(a_1, a_0) with e = 0, so Q = -1 works
    assert (R.sigma - 1) * Q == R.scalar(2) - build_P(R, 1, 0)
    assert (R.sigma - 1) * (-R.one()) == R.scalar(2) - build_P(R, 1, 0)
    res = decompose_iii_failure(P, 0)
    assert res.verified
    assert res.hat_params.a == (0, N)
    assert not is_indecomposable(res.X.module)[0]


def test_explicit_split_with_odd_p():
    P = XParams(3, 2, 2, (1, 2), 1)
    assert not check_conditions(P).III
    res = decompose_iii_smallest(P)
    assert res.verified


def test_explicit_split_preconditions():
    with pytest.raises(ValueError):
        decompose_iii_failure(XParams(3, 2, 2, (0, 2), 4), 0)
    with pytest.raises(ValueError):
        decompose_iii_smallest(XParams(3, 2, 2, (0, 2), 4))


def test_degenerate_split_examples():
    for P in [XParams(2, 1, 2, (0, 1), 3), XParams(2, 1, 3, (0, N, 1), 7)]:
        assert check_conditions(P).failed_clauses() == ["IV"]
        killed, cert = decompose_degenerate_n1(P)
        assert killed and cert.verify()
    with pytest.raises(ValueError):
        decompose_degenerate_n1(XParams(2, 1, 2, (0, 1), 1))


def test_degenerate_complement_fails_when_more_than_four_fails():
    # d = 3 mod 8 also violates (V); <y> then meets <x_2>, yet X still splits
    P = XParams(2, 1, 3, (0, N, 1), 3)
    assert "V" in check_conditions(P).failed_clauses()
    with pytest.raises(PaperInconsistency):
        decompose_degenerate_n1(P)
    assert not is_indecomposable(build_x(P).module)[0]


def test_degenerate_population():
    core, other = degenerate_tuples()
    assert {(P.m, P.a, P.d) for P in core} == {(2, (0, 1), 3), (3, (0, N, 1), 7)}
    assert other


def test_recover_examples():
    assert recover_a(build_x(XParams(3, 1, 1, (0,), 1)).module) == (0,)
    assert recover_a(build_x(XParams(3, 2, 2, (N, N), 1)).module) == (N, N)
    assert recover_a(build_x(XParams(3, 2, 2, (0, 2), 4)).module) == (0, 2)


def test_recover_after_change_of_coordinates():
    import random

    rng = random.Random(3)
    for P in valid_tuples(SweepConfig(p_range=[2, 3], n_range=[2], m_range=[2]))[::3]:
        M = scramble(build_x(P).module, rng)
        assert recover_a(M) == P.a


def test_signature_collision_is_real():
    A = build_x(XParams(2, 2, 3, (N, N, 0), 1)).module
    B = build_x(XParams(2, 2, 3, (N, 0, N), 1)).module
    assert iso_signature(A) == iso_signature(B)
    assert iso_signature(A, extended=True) != iso_signature(B, extended=True)
    assert recover_a(A) != recover_a(B)


def test_x_elements_satisfy_presentation():
    P = XParams(3, 2, 2, (0, 2), 4)
    X = build_x(P)
    R = P.ring
    assert act(R.sigma - 4, X.y) == X.x(0) + 3 * X.x(1)
