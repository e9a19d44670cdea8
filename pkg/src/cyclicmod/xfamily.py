"""The modules X_{a,d,m} and their structural facts.

X_{a,d,m} is generated over R_m G (G cyclic of order p^n) by y, x_0..x_(m-1)
subject to (sigma - d) y = sum_i p^i x_i and sigma^(p^(a_i)) x_i = x_i,
where a_i = -inf forces x_i = 0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .groupring import GroupRingCtx, GroupRingElem, build_P, sigma_pow_minus_one
from .indecomp import (
    DecompositionCertificate,
    _projection_onto,
    certificate_from_idempotent,
    full_decomposition,
)
from .linalg import Solver
from .module import (
    ConcreteModule,
    ModElement,
    ModulePresentation,
    Submodule,
    act,
    cyclic_module,
    direct_sum,
    iso_signature,
    length,
    min_generators,
    quotient_mod_pk,
    realize,
)
from .residue import INF, NEG_INF, Level, Residue, RingCtx, in_U, minus_u_level


def _level_from_json(v) -> Level:
    if v is None:
        return NEG_INF
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"a-entry {v!r} must be an integer or null")
    return v


def _level_to_json(v: Level):
    return None if v == NEG_INF else int(v)


@dataclass(frozen=True)
class XParams:
    p: int
    n: int
    m: int
    a: Tuple[Level, ...]
    d: int

    def __post_init__(self):
        ctx = RingCtx(self.p, self.m, self.n)
        a = tuple(NEG_INF if x == NEG_INF else int(x) for x in self.a)
        if len(a) != self.m:
            raise ValueError(f"a has length {len(a)}, expected m={self.m}")
        for x in a:
            if x != NEG_INF and not 0 <= x <= self.n:
                raise ValueError(f"a-entry {x} outside {{-inf, 0..{self.n}}}")
        if a[0] != NEG_INF and a[0] >= self.n:
            raise ValueError("a_0 must be < n (l(y) = p^a_0 + 1 cannot exceed p^n)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", int(self.d) % ctx.q)

    @property
    def ctx(self) -> RingCtx:
        return RingCtx(self.p, self.m, self.n)

    @property
    def ring(self) -> GroupRingCtx:
        return GroupRingCtx(self.ctx, self.n)

    @property
    def d_res(self) -> Residue:
        return Residue(self.ctx, self.d)

    def replace(self, **kw) -> "XParams":
        data = dict(p=self.p, n=self.n, m=self.m, a=self.a, d=self.d)
        data.update(kw)
        return XParams(**data)

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "m": self.m, "a": [_level_to_json(x) for x in self.a], "d": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> "XParams":
        for key in ("p", "n", "m", "a", "d"):
            if key not in obj:
                raise ValueError(f"missing field {key!r}")
        if not isinstance(obj["a"], list):
            raise ValueError("a must be a list")
        return cls(int(obj["p"]), int(obj["n"]), int(obj["m"]), tuple(_level_from_json(v) for v in obj["a"]), int(obj["d"]))


# --- conditions -------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    I: bool
    II: bool
    III: bool
    IV: bool
    V: bool
    failures: Tuple[str, ...] = ()

    @property
    def overall(self) -> bool:
        return self.I and self.II and self.III and self.IV and self.V

    def failed_clauses(self) -> List[str]:
        return [k for k in ("I", "II", "III", "IV", "V") if not getattr(self, k)]

    def to_json(self) -> dict:
        return {
            "I": self.I,
            "II": self.II,
            "III": self.III,
            "IV": self.IV,
            "V": self.V,
            "overall": self.overall,
            "failed": self.failed_clauses(),
            "details": list(self.failures),
        }


def minus_level(params: XParams) -> Level:
    """v with d in -U_v minus -U_(v+1) (p = 2); INF when d = -1 mod 2^m."""
    return minus_u_level(params.d_res)


def check_conditions(params: XParams) -> ConditionReport:
    p, n, m, a = params.p, params.n, params.m, params.a
    d = params.d_res
    notes = []
    c1 = in_U(d, 1)
    if not c1:
        notes.append("I: d not in U_1")

    c2 = True
    for i, ai in enumerate(a):
        if ai == NEG_INF:
            continue
        if not in_U(d ** (p**ai), i + 1):
            c2 = False
            notes.append(f"II: d^(p^{ai}) not in U_{i + 1} (i={i})")

    exception = p == 2 and c1 and not in_U(d, 2) and a[0] == 0
    c3 = True
    for i in range(m):
        if i == 0 and exception:
            for j in range(1, m):
                if a[j] == 0:
                    c3 = False
                    notes.append(f"III: exception branch needs a_{j} != 0")
            continue
        for j in range(1, m - i):
            if a[i + j] == NEG_INF:
                continue
            if not a[i] + j < a[i + j]:
                c3 = False
                notes.append(f"III: a_{i}+{j} < a_{i + j} fails")

    c4 = not (p == 2 and n == 1 and a[0] != NEG_INF)
    if not c4:
        notes.append("IV: p=2, n=1 needs a_0 = -inf")

    c5 = True
    if p == 2 and m >= 2 and c1 and not in_U(d, 2) and a[0] == 0:
        v = minus_level(params)
        if v != INF and v < m:
            for i in range(int(v), m):
                if a[i] == NEG_INF:
                    continue
                if not a[i] > i - (v - 1):
                    c5 = False
                    notes.append(f"V: a_{i} > {i} - ({int(v)} - 1) fails")
    return ConditionReport(c1, c2, c3, c4, c5, tuple(notes))


# --- construction ---------------------------------------------------------------------


LABELS_PREFIX = "x"


def x_presentation(params: XParams) -> ModulePresentation:
    R = params.ring
    p, m = params.p, params.m
    z = R.zero()
    first = [R.sigma - R.scalar(params.d)] + [R.scalar(-(p**i)) for i in range(m)]
    rels = [first]
    for i, ai in enumerate(params.a):
        row = [z] * (m + 1)
        row[i + 1] = sigma_pow_minus_one(R, ai)
        rels.append(row)
    labels = ["y"] + [f"{LABELS_PREFIX}{i}" for i in range(m)]
    return ModulePresentation(R, m + 1, rels, labels)


@dataclass
class XModule:
    params: XParams
    module: ConcreteModule

    @property
    def y(self) -> ModElement:
        return self.module.gen(0)

    def x(self, i: int) -> ModElement:
        return self.module.gen(i + 1)

    def check_relations(self) -> bool:
        R = self.params.ring
        p = self.params.p
        lhs = act(R.sigma - R.scalar(self.params.d), self.y)
        rhs = self.module.zero()
        for i in range(self.params.m):
            rhs = rhs + (p**i) * self.x(i)
        if lhs != rhs:
            return False
        for i, ai in enumerate(self.params.a):
            if not act(sigma_pow_minus_one(R, ai), self.x(i)).is_zero():
                return False
        return True

    def lengths(self) -> Dict[str, int]:
        out = {"y": length(self.y)}
        for i in range(self.params.m):
            out[f"x{i}"] = length(self.x(i))
        return out

    def expected_lengths(self) -> Dict[str, int]:
        p = self.params.p
        a = self.params.a
        out = {"y": 1 if a[0] == NEG_INF else p ** a[0] + 1}
        for i, ai in enumerate(a):
            out[f"x{i}"] = 0 if ai == NEG_INF else p**ai
        return out


def build_x(params: XParams) -> XModule:
    return XModule(params, realize(x_presentation(params)))


def group_ring_module(ring: GroupRingCtx, level: Level) -> ConcreteModule:
    """R_m G_level viewed as an R_m G-module (zero for level -inf)."""
    return cyclic_module(ring, [sigma_pow_minus_one(ring, level)], "w")


# --- quotient split -------------------------------------------------------------------


def quotient_split_check(X: XModule) -> bool:
    """Signature of X / p^(m-1) X equals that of A (+) B built separately."""
    prm = X.params
    if prm.m < 2:
        raise ValueError("quotient split needs m >= 2")
    Q = quotient_mod_pk(X.module, prm.m - 1)
    A = build_x(XParams(prm.p, prm.n, prm.m - 1, prm.a[:-1], prm.d)).module
    B = group_ring_module(A.ring, prm.a[-1])
    return iso_signature(Q) == iso_signature(direct_sum(A, B))


# --- decompositions --------------------------------------------------------------------


class PaperInconsistency(ArithmeticError):
    """A step the construction guarantees turned out to be impossible."""


@dataclass
class SplitResult:
    params: XParams
    X: XModule
    hat_params: XParams
    certificate: DecompositionCertificate
    hat_relations_hold: bool
    signature_match: bool

    @property
    def verified(self) -> bool:
        return self.certificate.verify() and self.hat_relations_hold and self.signature_match


def iii_witnesses(params: XParams) -> List[int]:
    """Indices i < m-1 with a_i <= a_(m-1) <= a_i + (m-1-i), both finite.

    The upper bound a_i <= a_(m-1) is needed for P(a_(m-1), a_i) to exist.
    """
    a, m = params.a, params.m
    top = a[m - 1]
    if top == NEG_INF:
        return []
    return [i for i in range(m - 1) if a[i] != NEG_INF and a[i] <= top <= a[i] + (m - 1 - i)]


def guard_holds(params: XParams, i: int) -> bool:
    return params.p > 2 or in_U(params.d_res, 2) or i > 0


def _split_certificate(M: ConcreteModule, first: Sequence[np.ndarray], second: Sequence[np.ndarray]):
    K = Submodule.generated_by(M, np.array(first, dtype=np.int64).reshape(-1, M.rank))
    I = Submodule.generated_by(M, np.array(second, dtype=np.int64).reshape(-1, M.rank))
    if not (K & I).is_zero():
        return None
    if K.order_exponent() + I.order_exponent() != M.order_exponent():
        return None
    e = _projection_onto(M, K, I)
    if e is None:
        return None
    return certificate_from_idempotent(M, e)


def solve_q(params: XParams, i: int) -> Optional[GroupRingElem]:
    """Q in R_m G with (sigma - d) Q = p^(m-1) - p^e P(a_(m-1), a_i), e = m-1-(a_(m-1)-a_i)."""
    R = params.ring
    p, m = params.p, params.m
    top, ai = params.a[m - 1], params.a[i]
    e = m - 1 - (top - ai)
    P = build_P(R, top, ai)
    target = R.scalar(p ** (m - 1)) - R.scalar(p**e) * P
    A = (R.sigma - R.scalar(params.d)).mult_matrix()
    x = Solver(A, p, m).solve(target.coeffs)
    if x is None:
        return None
    Q = R.elem(x)
    assert (R.sigma - R.scalar(params.d)) * Q == target
    return Q


def decompose_iii_failure(params: XParams, i: int) -> SplitResult:
    m, p = params.m, params.p
    if not 0 <= i < m - 1 or i not in iii_witnesses(params):
        raise ValueError(f"i={i} is not a witness: need a_i <= a_(m-1) <= a_i + (m-1-i) with both finite")
    if not guard_holds(params, i):
        raise ValueError("construction needs p > 2, d in U_2, or i > 0")
    R = params.ring
    X = build_x(params)
    M = X.module
    Q = solve_q(params, i)
    if Q is None:
        raise PaperInconsistency(f"(sigma - d) Q = target has no solution for {params.to_json()} at i={i}")
    top, ai = params.a[m - 1], params.a[i]
    e = m - 1 - (top - ai)
    P = build_P(R, top, ai)
    xt = X.x(m - 1)
    y_hat = X.y - act(Q, xt)
    x_hat = [X.x(j) for j in range(m)]
    x_hat[i] = X.x(i) + act(R.scalar(p ** (e - i)) * P, xt)
    x_hat[m - 1] = M.zero()

    hat = params.replace(a=params.a[:-1] + (NEG_INF,))
    # the hatted elements satisfy the presentation of X_hat
    ok = act(R.sigma - R.scalar(params.d), y_hat) == sum(
        ((p**j) * x_hat[j] for j in range(1, m)), (p**0) * x_hat[0]
    )
    for j, aj in enumerate(hat.a):
        ok = ok and act(sigma_pow_minus_one(R, aj), x_hat[j]).is_zero()

    cert = _split_certificate(M, [y_hat.coords] + [u.coords for u in x_hat], [xt.coords])
    if cert is None:
        raise PaperInconsistency("hatted generators do not give a direct complement to <x_(m-1)>")
    Xh = build_x(hat).module
    sig_ok = iso_signature(M) == iso_signature(direct_sum(Xh, group_ring_module(R, top)))
    # the two summands, as a multiset, match X_hat and R_m G_top
    got = Counter(iso_signature(S).as_tuple() for S in cert.summands())
    want = Counter([iso_signature(Xh).as_tuple(), iso_signature(group_ring_module(R, top)).as_tuple()])
    sig_ok = sig_ok and got == want
    return SplitResult(params, X, hat, cert, bool(ok), sig_ok)


def decompose_iii_smallest(params: XParams) -> SplitResult:
    for i in iii_witnesses(params):
        if guard_holds(params, i):
            return decompose_iii_failure(params, i)
    raise ValueError("no witness index meeting the guard")


def decompose_degenerate_n1(params: XParams) -> Tuple[bool, DecompositionCertificate]:
    """p=2, n=1, d not in U_2, a_0=0, a_(m-1)=1: X = <y> (+) <x_(m-1)>.

    Returns (whether 2^(m-1)(sigma+1) x_(m-1) = 0 holds, certificate).
    """
    p, n, m, a = params.p, params.n, params.m, params.a
    if not (p == 2 and n == 1 and m >= 2 and not in_U(params.d_res, 2) and a[0] == 0 and a[m - 1] == 1):
        raise ValueError("needs p=2, n=1, d not in U_2, a_0=0, a_(m-1)=1")
    R = params.ring
    X = build_x(params)
    xt = X.x(m - 1)
    killed = act(R.scalar(2 ** (m - 1)) * (R.sigma + R.one()), xt).is_zero()
    cert = _split_certificate(X.module, [X.y.coords], [xt.coords])
    if cert is None:
        raise PaperInconsistency("<y> is not a direct complement to <x_(m-1)>")
    return killed, cert


# --- recovering a ---------------------------------------------------------------------


class Unidentifiable(RuntimeError):
    pass


def _exact_log(p: int, k: int) -> Optional[int]:
    e = 0
    while k > 1 and k % p == 0:
        k //= p
        e += 1
    return e if k == 1 else None


def _mod_p_dim(M: ConcreteModule) -> int:
    return quotient_mod_pk(M, 1).order_exponent() if M.rank else 0


def recover_a(M: ConcreteModule, seed: int = 0) -> Tuple[Level, ...]:
    """Read a off an X-module given only as a ConcreteModule."""
    p, m = M.p, M.m
    if m == 1:
        dim = M.order_exponent()
        if dim == 1:
            return (NEG_INF,)
        a0 = _exact_log(p, dim - 1)
        if a0 is None:
            raise Unidentifiable(f"dimension {dim} is not p^a + 1")
        return (a0,)
    Q = quotient_mod_pk(M, m - 1)
    parts = full_decomposition(Q, seed=seed)
    if len(parts) == 1:
        return recover_a(parts[0], seed) + (NEG_INF,)
    if len(parts) != 2:
        raise Unidentifiable(f"X/p^(m-1)X has {len(parts)} indecomposable summands")
    V, W = parts
    gV, gW = min_generators(V), min_generators(W)
    if gV != gW:
        A, B = (V, W) if gV > gW else (W, V)
    else:
        dV, dW = _mod_p_dim(V), _mod_p_dim(W)
        if dV != dW:
            A, B = (V, W) if dV < dW else (W, V)
        elif dV == 1:
            return (NEG_INF,) * (m - 1) + (0,)
        elif dV == 2 and p == 2:
            return (0,) + (NEG_INF,) * (m - 2) + (1,)
        else:
            raise Unidentifiable(f"equal summand invariants with dimension {dV}")
    top = _exact_log(p, _mod_p_dim(B))
    if top is None:
        raise Unidentifiable("B/pB does not have p-power dimension")
    return recover_a(A, seed) + (top,)
