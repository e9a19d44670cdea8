"""Verification suites: each one enumerates cases and checks them exactly.

A suite is a pair (cases, run): ``cases(config)`` lists JSON-ready case
descriptions in a fixed order and ``run(case)`` returns (verdict, details).
Cases are independent, so they can be fanned out to worker processes
without changing the report.
"""

from __future__ import annotations

import itertools
import random
import time
from collections import Counter
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .groupring import (
    GroupRingCtx,
    IdealHandle,
    MultiGen,
    Pow,
    PowTimes,
    SigmaMinusD,
    ann_closed_form,
    ann_generic,
    ann_spec_generators,
    build_P,
    build_Q,
    chi,
    ideal_intersect,
    multigen_generators,
    phi_d,
)
from .indecomp import find_decomposition, full_decomposition, is_indecomposable, summand_signatures
from .linalg import howell_array, kernel_array
from .module import (
    ConcreteModule,
    ModulePresentation,
    Submodule,
    direct_sum,
    free_module,
    is_cyclic,
    iso_signature,
    quotient_mod_pk,
    realize,
    scramble,
    star,
)
from .residue import NEG_INF, Residue, RingCtx, in_U, minus_u_level, pow_class
from .xfamily import (
    PaperInconsistency,
    XParams,
    build_x,
    check_conditions,
    decompose_degenerate_n1,
    decompose_iii_failure,
    group_ring_module,
    guard_holds,
    iii_witnesses,
    quotient_split_check,
    recover_a,
)

PASS, FAIL, ERROR = "pass", "fail", "error"
DEFAULT_SEED = 20240


@dataclass
class SweepConfig:
    p_range: Optional[List[int]] = None
    n_range: Optional[List[int]] = None
    m_range: Optional[List[int]] = None
    d_policy: str = "all"
    seed: int = DEFAULT_SEED
    jobs: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        for name in ("p_range", "n_range", "m_range"):
            v = getattr(self, name)
            if v is not None and len(v) == 0:
                raise ValueError(f"{name} must be nonempty")

    def ps(self, default):
        return list(self.p_range) if self.p_range is not None else list(default)

    def ns(self, default):
        return list(self.n_range) if self.n_range is not None else list(default)

    def ms(self, default):
        return list(self.m_range) if self.m_range is not None else list(default)

    def d_values(self, p: int, m: int) -> List[int]:
        """Residues d mod p^m allowed by the policy."""
        if self.d_policy == "all":
            return list(range(p**m))
        if self.d_policy == "U1":
            return [d for d in range(p**m) if d % p == 1 % p]
        try:
            vals = [int(x) for x in self.d_policy.split(",")]
        except ValueError:
            raise ValueError(f"unknown d-policy {self.d_policy!r}") from None
        return sorted({v % p**m for v in vals})


# --- shared helpers -------------------------------------------------------------------


def a_vectors(n: int, m: int):
    """All a in {-inf, 0..n}^m with a_0 < n."""
    for a in itertools.product([NEG_INF] + list(range(n + 1)), repeat=m):
        if a[0] != NEG_INF and a[0] >= n:
            continue
        yield a


def x_tuples(config: SweepConfig, ps=(2, 3), ns=(1, 2), ms=(1, 2, 3)):
    for p in config.ps(ps):
        for n in config.ns(ns):
            for m in config.ms(ms):
                for a in a_vectors(n, m):
                    for d in config.d_values(p, m):
                        yield XParams(p, n, m, a, d)


def valid_tuples(config: SweepConfig, **kw) -> List[XParams]:
    return [P for P in x_tuples(config, **kw) if check_conditions(P).overall]


def construction_tuples(config: SweepConfig, **kw) -> List[Tuple[XParams, int]]:
    """(params, smallest witness) for tuples with (I), (II) and a usable witness."""
    out = []
    for P in x_tuples(config, **kw):
        rep = check_conditions(P)
        if not (rep.I and rep.II):
            continue
        ws = [i for i in iii_witnesses(P) if guard_holds(P, i)]
        if ws:
            out.append((P, ws[0]))
    return out


def loose_witnesses(P: XParams) -> List[int]:
    """Indices i < m-1 with finite a_i, a_(m-1), a_i + (m-1-i) >= a_(m-1) and the guard.

    Unlike ``iii_witnesses`` this does not require a_i <= a_(m-1), nor that
    (I) and (II) hold for the tuple.
    """
    a, m = P.a, P.m
    top = a[m - 1]
    if top == NEG_INF:
        return []
    return [
        i
        for i in range(m - 1)
        if a[i] != NEG_INF and a[i] + (m - 1 - i) >= top and guard_holds(P, i)
    ]


def engine_tuples(config: SweepConfig, **kw) -> List[XParams]:
    """Tuples with a loose witness that the explicit construction does not cover."""
    covered = {(P.p, P.n, P.m, P.a, P.d) for P, _ in construction_tuples(config, **kw)}
    return [
        P
        for P in x_tuples(config, **kw)
        if loose_witnesses(P) and (P.p, P.n, P.m, P.a, P.d) not in covered
    ]


def degenerate_tuples(ms=(2, 3)) -> Tuple[List[XParams], List[XParams]]:
    """p=2, n=1, d not in U_2, a_0=0, a_(m-1)=1, split by whether only (IV) fails."""
    core, other = [], []
    for m in ms:
        for mid in itertools.product([NEG_INF, 0, 1], repeat=m - 2):
            for d in range(3, 2**m, 4):
                P = XParams(2, 1, m, (0,) + mid + (1,), d)
                (core if check_conditions(P).failed_clauses() == ["IV"] else other).append(P)
    return core, other


def random_group_ring_elem(rng: random.Random, ctx: GroupRingCtx, density: float = 0.5):
    p, q = ctx.p, ctx.q
    coeffs = [rng.randrange(q) if rng.random() < density else 0 for _ in range(ctx.order)]
    scale = p ** rng.randrange(ctx.m)
    return ctx.elem([c * scale for c in coeffs])


def random_module(rng: random.Random, ctx: GroupRingCtx, max_gens: int = 2, max_rels: int = 3) -> ConcreteModule:
    g = rng.randint(1, max_gens)
    rels = []
    for _ in range(rng.randint(0, max_rels)):
        rels.append([random_group_ring_elem(rng, ctx) for _ in range(g)])
    return realize(ModulePresentation(ctx, g, rels))


def _ring(p, m, i) -> GroupRingCtx:
    return GroupRingCtx(RingCtx(p, m, i), i)


def _identity_grid(config: SweepConfig, ps=(2, 3, 5), ms=(1, 2, 3), is_=(0, 1, 2)):
    for p in config.ps(ps):
        for m in config.ms(ms):
            for i in config.ns(is_):
                yield p, m, i


def _fails(details: Sequence) -> Tuple[str, dict]:
    return (FAIL, {"failures": list(details)[:20], "count": len(details)}) if details else (PASS, {})


# --- residue / groupring identity suites ----------------------------------------------------


def cases_upower(config):
    out = []
    for p in config.ps((2, 3, 5)):
        for m in config.ms((1, 2, 3, 4, 5, 6)):
            for i in range(1, m + 1):
                for j in range(4):
                    out.append({"p": p, "m": m, "i": i, "j": j})
    return out


def run_upower(case):
    p, m, i, j = case["p"], case["m"], case["i"], case["j"]
    ctx = RingCtx(p, m)
    bad = []
    for dv in range(1, p**m):
        d = Residue(ctx, dv)
        if not in_U(d, i):
            continue
        power = d ** (p**j)
        if not pow_class(d, i, j).contains(power):
            bad.append({"d": dv, "check": "class"})
        if p == 2 and i == 1 and j > 0 and not in_U(power, i + j + 1):
            bad.append({"d": dv, "check": "remark"})
    return _fails(bad)


def cases_phi(config):
    out = []
    for p in config.ps((2, 3, 5)):
        for i in config.ns((0, 1, 2)):
            for j in range(i + 1):
                out.append({"p": p, "i": i, "j": j})
    return out


def _phi_int(d: int, p: int, i: int, j: int) -> int:
    step = p**j
    return sum(d ** (k * step) for k in range(p ** (i - j)))


def _v2(x: int) -> int:
    v = 0
    while x % 2 == 0:
        x //= 2
        v += 1
    return v


def run_phi(case):
    """phi_d(P(i, j)) over the integers, d = 1 mod p, |d| <= p^4."""
    p, i, j = case["p"], case["i"], case["j"]
    bad = []
    bound = p**4
    for d in range(-bound, bound + 1):
        if (d - 1) % p:
            continue
        val = _phi_int(d, p, i, j)
        if val % p ** (i - j):
            bad.append({"d": d, "check": "divisible"})
        if j < i and (p > 2 or (d - 1) % 4 == 0 or j > 0):
            if (val - p ** (i - j)) % p ** (i - j + 1):
                bad.append({"d": d, "check": "case1"})
        if p == 2 and d == -1 and j == 0 and i > 0 and val != 0:
            bad.append({"d": d, "check": "case2"})
        if p == 2 and d != -1 and j == 0 and i > 0 and (d - 1) % 4:
            v = _v2(d + 1)
            if v >= 2 and (val - 2 ** (i + v - 1)) % 2 ** (i + v):
                bad.append({"d": d, "check": "case3"})
        # the group ring evaluation agrees with the integer one mod p^3
        ctx = _ring(p, 3, i)
        if int(phi_d(build_P(ctx, i, j), d)) != val % ctx.q:
            bad.append({"d": d, "check": "phi_d"})
    return _fails(bad)


def cases_separate(config):
    return [
        {"p": p, "m": m, "i": i, "j": j, "k": k}
        for p, m, i in _identity_grid(config)
        for j in range(i)
        for k in range(m + 1)
    ]


def run_separate(case):
    p, m, i, j, k = (case[x] for x in ("p", "m", "i", "j", "k"))
    R = _ring(p, m, i)
    P = build_P(R, i, j)
    lhs = ideal_intersect(IdealHandle(R, [P]), IdealHandle(R, [R.scalar(p**k)]))
    rhs = IdealHandle(R, [P * p**k])
    return (PASS, {}) if lhs == rhs else (FAIL, {"case": case})


def cases_kerbasic(config):
    out = []
    for p, m, i in _identity_grid(config):
        for k in range(m + 1):
            out.append({"p": p, "m": m, "i": i, "k": k, "j": None})
            for j in range(i):
                out.append({"p": p, "m": m, "i": i, "k": k, "j": j})
    return out


def _ann_agrees(R, spec) -> bool:
    return ann_closed_form(R, spec) == ann_generic(R, ann_spec_generators(R, spec))


def run_kerbasic(case):
    R = _ring(case["p"], case["m"], case["i"])
    spec = Pow(case["k"]) if case["j"] is None else PowTimes(case["k"], case["j"])
    return (PASS, {}) if _ann_agrees(R, spec) else (FAIL, {"case": case})


def cases_phidb(config):
    return [
        {"p": p, "m": m, "i": i, "d": d}
        for p, m, i in _identity_grid(config)
        for d in range(1, p**m)
        if d % p == 1 % p
    ]


def run_phidb(case):
    R = _ring(case["p"], case["m"], case["i"])
    return (PASS, {}) if _ann_agrees(R, SigmaMinusD(case["d"])) else (FAIL, {"case": case})


def cases_qhomo(config):
    return [
        {"p": p, "m": m, "i": i, "j": j}
        for p, m, i in _identity_grid(config)
        for j in range(i)
    ]


def run_qhomo(case):
    p, m, i, j = (case[x] for x in ("p", "m", "i", "j"))
    R = _ring(p, m, i)
    q = R.q
    bad = []
    for d in range(1, q):
        if d % p != 1 % p:
            continue
        img = chi(build_Q(R, i, 0, d), j)
        c = img.coeffs % q
        if np.any(c % p ** min(i - j, m)):
            bad.append({"d": d, "check": "divisible"})
        dres = Residue(R.base, d)
        if p > 2 or in_U(dres, 2) or j > 0:
            ref = build_Q(R.at_level(j), j, 0, d) * p ** (i - j)
            if np.any((c - ref.coeffs) % p ** min(i - j + 1, m)):
                bad.append({"d": d, "check": "case1"})
        elif j == 0:
            v = minus_u_level(dres)
            if v == float("inf"):
                if np.any(c):
                    bad.append({"d": d, "check": "case2"})
            elif v >= 2:
                mod = 2 ** min(i + int(v), m)
                if (int(c[0]) - 2 ** (i + int(v) - 1)) % mod:
                    bad.append({"d": d, "check": "case3"})
    return _fails(bad)


def kerint_specs(p: int, m: int, i: int, max_t: int = 2):
    """Admissible (b, c): b weakly decreasing in 0..m-1, c strictly increasing."""
    cvals = [NEG_INF] + list(range(i))
    for t in range(max_t + 1):
        for b in itertools.product(range(m), repeat=t + 1):
            if any(v > u for u, v in zip(b, b[1:])):
                continue
            for c in itertools.combinations(cvals, t + 1):
                yield b, c


def cases_kerint(config):
    return [{"p": p, "m": m, "i": i} for p, m, i in _identity_grid(config)]


def run_kerint(case):
    R = _ring(case["p"], case["m"], case["i"])
    bad = []
    for b, c in kerint_specs(case["p"], case["m"], case["i"]):
        spec = MultiGen(b, c)
        if ann_closed_form(R, spec) != ann_generic(R, multigen_generators(R, spec)):
            bad.append({"b": list(b), "c": [None if x == NEG_INF else x for x in c]})
    return _fails(bad)


# --- module-level suites ------------------------------------------------------------------


def cases_star(config):
    out = [{"kind": "closed_form", "p": p, "m": m, "i": i} for p, m, i in _identity_grid(config)]
    for p, m, i in _identity_grid(config, ps=(2, 3), ms=(1, 2, 3), is_=(0, 1, 2)):
        out.append({"kind": "random", "p": p, "m": m, "i": i, "seed": config.seed, "count": 16})
    return out


def star_closed_form_ok(p, m, i) -> bool:
    R = _ring(p, m, i)
    F = free_module(R)
    S = star(F)
    ref1 = Submodule.generated_by(F, [build_P(R, i, 0).coeffs * p ** (m - 1)])
    ref2 = Submodule.generated_by(F, [((R.sigma - R.one()) ** (R.order - 1)).coeffs * p ** (m - 1)])
    # free module coordinates are the group ring coefficients
    return S == ref1 == ref2 and S.order_exponent() == 1


def excl_instance(rng, M: ConcreteModule):
    """Random cyclic submodules M1, M2; returns None unless star(M1) ∩ star(M2) = 0."""
    u = [rng.randrange(int(x)) for x in M.moduli]
    w = [rng.randrange(int(x)) for x in M.moduli]
    M1 = Submodule.generated_by(M, [u])
    M2 = Submodule.generated_by(M, [w])
    S = star(M)
    if not (M1 & M2 & S).is_zero():
        return None
    return (M1 + M2).order_exponent() == M1.order_exponent() + M2.order_exponent()


def run_star(case):
    p, m, i = case["p"], case["m"], case["i"]
    if case["kind"] == "closed_form":
        return (PASS, {}) if star_closed_form_ok(p, m, i) else (FAIL, {"case": case})
    rng = random.Random(f"{case['seed']}-star-{p}-{m}-{i}")
    R = _ring(p, m, i)
    bad, nz, excl = [], 0, 0
    for _ in range(case["count"]):
        M = random_module(rng, R)
        if M.order_exponent() == 0:
            continue
        nz += 1
        if star(M).is_zero():
            bad.append({"check": "starzero", "divisors": list(M.divisors)})
        for _ in range(4):
            res = excl_instance(rng, M)
            if res is None:
                continue
            excl += 1
            if not res:
                bad.append({"check": "excl", "divisors": list(M.divisors)})
    verdict, det = _fails(bad)
    det.update({"nonzero_modules": nz, "excl_instances": excl})
    return verdict, det


def cases_ideal(config):
    return [
        {"p": p, "m": m, "i": i, "seed": config.seed, "count": 25}
        for p, m, i in _identity_grid(config, ps=(2, 3), ms=(1, 2, 3), is_=(0, 1, 2))
    ]


def run_ideal(case):
    p, m, i = case["p"], case["m"], case["i"]
    rng = random.Random(f"{case['seed']}-ideal-{p}-{m}-{i}")
    R = _ring(p, m, i)
    target = ((R.sigma - R.one()) ** (R.order - 1)) * p ** (m - 1)
    bad, used = [], 0
    for _ in range(case["count"]):
        gens = [random_group_ring_elem(rng, R) for _ in range(rng.randint(1, 2))]
        I = IdealHandle(R, gens)
        if I.is_zero():
            continue
        used += 1
        if target not in I:
            bad.append({"generators": [g.coeffs.tolist() for g in gens]})
    verdict, det = _fails(bad)
    det["instances"] = used
    return verdict, det


def cases_cycprop(config):
    return [
        {"p": p, "m": m, "i": i, "seed": config.seed, "count": 40}
        for p, m, i in _identity_grid(config, ps=(2, 3), ms=(2, 3), is_=(0, 1, 2))
    ]


def run_cycprop(case):
    p, m, i = case["p"], case["m"], case["i"]
    rng = random.Random(f"{case['seed']}-cyc-{p}-{m}-{i}")
    R = _ring(p, m, i)
    bad, used = [], 0
    for _ in range(case["count"]):
        M = random_module(rng, R, max_gens=3)
        if is_cyclic(quotient_mod_pk(M, m - 1)):
            used += 1
            if not is_cyclic(M):
                bad.append({"divisors": list(M.divisors)})
    verdict, det = _fails(bad)
    det["instances"] = used
    return verdict, det


# --- x-family suites ----------------------------------------------------------------------


def valid_case(P: XParams) -> dict:
    X = build_x(P)
    ind, rep = is_indecomposable(X.module)
    out = {
        "indecomposable": ind,
        "relations": X.check_relations(),
        "lengths": X.lengths() == X.expected_lengths(),
        "locality": rep.to_json(),
    }
    if P.m >= 2:
        out["quotient_split"] = quotient_split_check(X)
    return out


def cases_theorem1(config):
    return [P.to_json() for P in valid_tuples(config)]


def run_theorem1(case):
    res = valid_case(XParams.from_json(case))
    ok = res["indecomposable"] and res["relations"] and res["lengths"] and res.get("quotient_split", True)
    return (PASS if ok else FAIL), res


DEEP_STRIDE = 20


def split_case(P: XParams, i: int, deep: bool = False) -> dict:
    """Check the explicit split at witness i.

    With deep=True the full Krull-Schmidt multiset of X is also compared
    with that of X_hat (+) R_m G_(a_(m-1)), each decomposed independently.
    """
    res = decompose_iii_failure(P, i)
    ind, _ = is_indecomposable(res.X.module)
    out = {
        "witness": i,
        "certificate": res.certificate.verify(),
        "hat_relations": res.hat_relations_hold,
        "signature_match": res.signature_match,
        "indecomposable": ind,
    }
    if deep:
        hat = build_x(res.hat_params).module
        top = group_ring_module(P.ring, P.a[-1])
        got = summand_signatures(full_decomposition(res.X.module))
        want = summand_signatures(full_decomposition(hat)) + summand_signatures(full_decomposition(top))
        out["summands_match"] = got == want
        out["summand_count"] = sum(got.values())
    return out


def engine_split_case(P: XParams) -> dict:
    """Split X with the generic engine and compare with X_hat (+) R_m G_(a_(m-1))."""
    X = build_x(P).module
    cert = find_decomposition(X)
    hat = build_x(P.replace(a=P.a[:-1] + (NEG_INF,))).module
    top = group_ring_module(P.ring, P.a[-1])
    got = summand_signatures(full_decomposition(X))
    want = summand_signatures(full_decomposition(hat)) + summand_signatures(full_decomposition(top))
    rep = check_conditions(P)
    return {
        "witnesses": loose_witnesses(P),
        "conditions_I_II": [rep.I, rep.II],
        "certificate": cert is not None and cert.verify(),
        "summands_match": got == want,
        "summand_count": sum(got.values()),
    }


def cases_section7(config):
    cases = [
        {"kind": "iii", "params": P.to_json(), "i": i, "deep": k % DEEP_STRIDE == 0}
        for k, (P, i) in enumerate(construction_tuples(config))
    ]
    cases += [{"kind": "engine", "params": P.to_json()} for P in engine_tuples(config)]
    core, _ = degenerate_tuples()
    cases += [{"kind": "degenerate", "params": P.to_json()} for P in core]
    return cases


def run_section7(case):
    P = XParams.from_json(case["params"])
    try:
        if case["kind"] == "degenerate":
            killed, cert = decompose_degenerate_n1(P)
            ok = killed and cert.verify()
            return (PASS if ok else FAIL), {"killed": killed, "certificate": cert.verify()}
        if case["kind"] == "engine":
            res = engine_split_case(P)
            return (PASS if res["certificate"] and res["summands_match"] else FAIL), res
        res = split_case(P, case["i"], deep=case.get("deep", False))
    except PaperInconsistency as exc:
        return FAIL, {"alarm": str(exc)}
    ok = (
        res["certificate"]
        and res["hat_relations"]
        and res["signature_match"]
        and not res["indecomposable"]
        and res.get("summands_match", True)
    )
    return (PASS if ok else FAIL), res


def recover_group(p: int, n: int, m: int, d_policy: str = "all") -> dict:
    cfg = SweepConfig([p], [n], [m], d_policy=d_policy)
    sigs: Dict[tuple, set] = {}
    wrong = []
    for P in valid_tuples(cfg):
        X = build_x(P)
        s = iso_signature(X.module).as_tuple()
        sigs.setdefault(s, set()).add(P.a)
        try:
            got = recover_a(X.module)
        except Exception as exc:  # reported as a failure, not raised
            wrong.append({"params": P.to_json(), "error": str(exc)})
            continue
        if got != P.a:
            wrong.append({"params": P.to_json(), "recovered": [None if x == NEG_INF else x for x in got]})
    collisions = [
        sorted([[None if x == NEG_INF else x for x in a] for a in group], key=str)
        for group in sigs.values()
        if len(group) > 1
    ]
    return {"collisions": collisions, "recover_failures": wrong}


def cases_prop51(config):
    return [
        {"p": p, "n": n, "m": m, "d_policy": config.d_policy}
        for p in config.ps((2, 3))
        for n in config.ns((1, 2))
        for m in config.ms((1, 2, 3))
    ]


def run_prop51(case):
    res = recover_group(case["p"], case["n"], case["m"], case["d_policy"])
    ok = not res["collisions"] and not res["recover_failures"]
    return (PASS if ok else FAIL), res


def random_decomposable(rng: random.Random) -> Tuple[ConcreteModule, List[ConcreteModule]]:
    """A scrambled direct sum of 2-3 small pieces, with the pieces."""
    p = rng.choice([2, 3])
    n = rng.choice([1, 2])
    m = rng.choice([1, 2])
    R = _ring(p, m, n)
    pieces = []
    for _ in range(rng.randint(2, 3)):
        kind = rng.random()
        if kind < 0.4:
            pieces.append(group_ring_module(R, rng.randint(0, n)))
        elif kind < 0.8:
            a = rng.choice(list(a_vectors(n, m)))
            d = rng.choice([d for d in range(p**m) if d % p == 1])
            pieces.append(build_x(XParams(p, n, m, a, d)).module)
        else:
            M = random_module(rng, R, max_gens=1)
            if M.order_exponent() == 0:
                M = group_ring_module(R, 0)
            pieces.append(M)
    total = pieces[0]
    for piece in pieces[1:]:
        total = direct_sum(total, piece)
    return scramble(total, rng), pieces


def krullschmidt_case(index: int, seed: int, seeds=5) -> dict:
    rng = random.Random(f"{seed}-ks-{index}")
    M, pieces = random_decomposable(rng)
    multisets = []
    for s in range(seeds):
        parts = full_decomposition(M, seed=seed + 7919 * s)
        multisets.append(sorted(summand_signatures(parts).items()))
    return {
        "divisors": list(M.divisors),
        "summand_count": sum(c for _, c in multisets[0]),
        "seed_invariant": all(ms == multisets[0] for ms in multisets),
    }


def cases_krullschmidt(config):
    return [{"index": k, "seed": config.seed} for k in range(50)]


def run_krullschmidt(case):
    res = krullschmidt_case(case["index"], case["seed"])
    ok = res["seed_invariant"] and res["summand_count"] >= 2
    return (PASS if ok else FAIL), res


# --- linear algebra --------------------------------------------------------------------------


def random_invertible(rng: random.Random, k: int, p: int, m: int) -> np.ndarray:
    q = p**m
    U = np.eye(k, dtype=np.int64)
    for _ in range(3 * k):
        a, b = rng.randrange(k), rng.randrange(k)
        E = np.eye(k, dtype=np.int64)
        if a == b:
            u = rng.randrange(1, q)
            while u % p == 0:
                u = rng.randrange(1, q)
            E[a, a] = u
        else:
            E[a, b] = rng.randrange(q)
        U = E @ U % q
    perm = list(range(k))
    rng.shuffle(perm)
    return U[perm]


def howell_canonical_trial(rng: random.Random) -> bool:
    p = rng.choice([2, 3])
    m = rng.randint(1, 3)
    rows, cols = rng.randint(1, 6), rng.randint(1, 6)
    q = p**m
    A = np.array([[rng.randrange(q) * p ** rng.randrange(m) for _ in range(cols)] for _ in range(rows)], dtype=np.int64) % q
    U = random_invertible(rng, rows, p, m)
    h1, piv1 = howell_array(A, p, m)
    h2, piv2 = howell_array(U @ A % q, p, m)
    return h1.shape == h2.shape and bool(np.all(h1 == h2)) and piv1 == piv2


def span_set(rows: np.ndarray, p: int, m: int, ncols: int) -> set:
    """Every element of the Z/p^m row span (small spans only)."""
    q = p**m
    seen = {tuple([0] * ncols)}
    frontier = [np.zeros(ncols, dtype=np.int64)]
    while frontier:
        new = []
        for v in frontier:
            for r in rows:
                w = (v + r) % q
                t = tuple(int(x) for x in w)
                if t not in seen:
                    seen.add(t)
                    new.append(w)
        frontier = new
    return seen


def kernel_enumeration_trial(rng: random.Random) -> Optional[bool]:
    """Compare kernel() with brute force; None when the space is too big."""
    p = rng.choice([2, 3])
    m = rng.randint(1, 3)
    q = p**m
    rows, cols = rng.randint(1, 4), rng.randint(1, 3)
    if q**rows > 10**4:
        return None
    A = np.array([[rng.randrange(q) * p ** rng.randrange(m) for _ in range(cols)] for _ in range(rows)], dtype=np.int64) % q
    brute = {
        x for x in itertools.product(range(q), repeat=rows)
        if not np.any(np.array(x, dtype=np.int64) @ A % q)
    }
    K = kernel_array(A, p, m).astype(np.int64).reshape(-1, rows)
    for r in K:
        if np.any(r @ A % q):
            return False
    return span_set(K, p, m, rows) == brute


def cases_howell(config):
    return [{"kind": "canonical", "block": b, "seed": config.seed} for b in range(10)] + [
        {"kind": "kernel", "block": b, "seed": config.seed} for b in range(10)
    ]


def run_howell(case):
    rng = random.Random(f"{case['seed']}-howell-{case['kind']}-{case['block']}")
    bad, used = 0, 0
    if case["kind"] == "canonical":
        for _ in range(100):
            used += 1
            bad += not howell_canonical_trial(rng)
    else:
        while used < 40:
            res = kernel_enumeration_trial(rng)
            if res is None:
                continue
            used += 1
            bad += not res
    return (FAIL if bad else PASS), {"trials": used, "failures": bad}


# --- registry and runner ----------------------------------------------------------------------


SUITES: Dict[str, Tuple[Callable, Callable]] = {
    "upower": (cases_upower, run_upower),
    "phi": (cases_phi, run_phi),
    "separate": (cases_separate, run_separate),
    "kerbasic": (cases_kerbasic, run_kerbasic),
    "phidb": (cases_phidb, run_phidb),
    "qhomo": (cases_qhomo, run_qhomo),
    "kerint": (cases_kerint, run_kerint),
    "star": (cases_star, run_star),
    "ideal": (cases_ideal, run_ideal),
    "cycprop": (cases_cycprop, run_cycprop),
    "theorem1": (cases_theorem1, run_theorem1),
    "section7": (cases_section7, run_section7),
    "prop51": (cases_prop51, run_prop51),
    "krullschmidt": (cases_krullschmidt, run_krullschmidt),
    "howell": (cases_howell, run_howell),
}


def _run_one(job):
    suite, case = job
    try:
        verdict, details = SUITES[suite][1](case)
    except Exception as exc:  # an operational error inside one case
        verdict, details = ERROR, {"error": f"{type(exc).__name__}: {exc}"}
    return {"case": case, "verdict": verdict, "details": details}


def run_suite(name: str, config: SweepConfig) -> dict:
    if name not in SUITES:
        raise KeyError(name)
    start = time.perf_counter()
    cases = SUITES[name][0](config)
    jobs = [(name, c) for c in cases]
    if config.jobs > 1 and len(jobs) > 1:
        with Pool(config.jobs) as pool:
            results = pool.map(_run_one, jobs, chunksize=1)
    else:
        results = [_run_one(j) for j in jobs]
    counts = Counter(r["verdict"] for r in results)
    return {
        "suite": name,
        "version": __version__,
        "seed": config.seed,
        "config": {
            "p_range": config.p_range,
            "n_range": config.n_range,
            "m_range": config.m_range,
            "d_policy": config.d_policy,
        },
        "summary": {k: counts.get(k, 0) for k in (PASS, FAIL, ERROR)},
        "cases": results,
        "timing": {"seconds": round(time.perf_counter() - start, 3)},
    }
