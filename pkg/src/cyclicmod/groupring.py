"""The group rings R_m G_i = (Z/p^m)[sigma]/(sigma^(p^i) - 1).

Norm operators P(i, j), their d-twisted versions Q_d(i, j), the evaluation
map phi_d, the level projections chi_j, and ideals with canonical forms.
The closed-form annihilators live next to a generic linear-algebra
annihilator so the two can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from .linalg import HowellForm, MatrixZpm, howell, intersect_array, kernel_array, span_member
from .residue import NEG_INF, Level, Residue, RingCtx


@dataclass(frozen=True)
class GroupRingCtx:
    base: RingCtx
    i: int

    def __post_init__(self):
        if self.i < 0:
            raise ValueError("group level i must be >= 0")
        n = self.base.n
        if n is not None and self.i > n:
            raise ValueError(f"group level i={self.i} exceeds n={n}")
        if self.i > 30:
            raise ValueError("group level too large")
        if self.base.q >= 2**28:
            # coefficient products are accumulated in int64
            raise ValueError("p^m too large for group ring arithmetic")

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def order(self) -> int:
        """|G_i| = p^i, the length of a coefficient vector."""
        return self.base.p**self.i

    def at_level(self, i: int) -> "GroupRingCtx":
        return GroupRingCtx(self.base, i)

    def zero(self) -> "GroupRingElem":
        return GroupRingElem(self, np.zeros(self.order, dtype=np.int64))

    def one(self) -> "GroupRingElem":
        return self.scalar(1)

    def scalar(self, c: Union[int, Residue]) -> "GroupRingElem":
        v = np.zeros(self.order, dtype=np.int64)
        v[0] = int(c) % self.q
        return GroupRingElem(self, v)

    def sigma_pow(self, t: int) -> "GroupRingElem":
        v = np.zeros(self.order, dtype=np.int64)
        v[t % self.order] = 1
        return GroupRingElem(self, v)

    @property
    def sigma(self) -> "GroupRingElem":
        return self.sigma_pow(1)

    def elem(self, coeffs: Sequence[int]) -> "GroupRingElem":
        v = np.zeros(self.order, dtype=np.int64)
        coeffs = list(coeffs)
        for t, c in enumerate(coeffs):
            v[t % self.order] += c
        return GroupRingElem(self, v)


class GroupRingElem:
    """Element of R_m G_i stored as its coefficient vector on 1, sigma, ..."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: GroupRingCtx, coeffs):
        c = np.asarray(coeffs, dtype=np.int64) % ctx.q
        if c.shape != (ctx.order,):
            raise ValueError(f"expected {ctx.order} coefficients, got {c.shape}")
        c.setflags(write=False)
        self.ctx = ctx
        self.coeffs = c

    def _other(self, other) -> "GroupRingElem":
        if isinstance(other, GroupRingElem):
            if other.ctx != self.ctx:
                raise ValueError("group ring elements from different rings")
            return other
        if isinstance(other, (int, Residue, np.integer)):
            return self.ctx.scalar(int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GroupRingElem(self.ctx, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GroupRingElem(self.ctx, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return GroupRingElem(self.ctx, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, Residue, np.integer)):
            return GroupRingElem(self.ctx, self.coeffs * (int(other) % self.ctx.q))
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GroupRingElem(self.ctx, self.coeffs @ o.mult_matrix() % self.ctx.q)

    def __rmul__(self, other):
        if isinstance(other, (int, Residue, np.integer)):
            return self * other
        return NotImplemented

    def __pow__(self, e: int):
        out = self.ctx.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return False
        return bool(np.all(self.coeffs == o.coeffs))

    def __hash__(self):
        return hash((self.ctx, tuple(int(c) for c in self.coeffs)))

    def __repr__(self):
        terms = [f"{int(c)}*s^{t}" for t, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def mult_matrix(self) -> np.ndarray:
        """Matrix whose row t is sigma^t * self (so x -> x @ M is x*self)."""
        n = self.ctx.order
        return np.stack([np.roll(self.coeffs, t) for t in range(n)]).astype(np.int64)

    def reduce_mod(self, e: int) -> "GroupRingElem":
        """Image in R_e G_i (e <= m)."""
        ctx = GroupRingCtx(RingCtx(self.ctx.p, e, self.ctx.base.n), self.ctx.i)
        return GroupRingElem(ctx, self.coeffs % ctx.q)

    def inflate(self, ctx: GroupRingCtx) -> "GroupRingElem":
        """Same coefficients viewed in a higher level, sigma^t -> sigma^t."""
        if ctx.i < self.ctx.i or ctx.base.p != self.ctx.p:
            raise ValueError("can only inflate to a higher level")
        v = np.zeros(ctx.order, dtype=np.int64)
        v[: self.ctx.order] = self.coeffs
        return GroupRingElem(ctx, v % ctx.q)


def _check_level(i: int, j: Level):
    if j != NEG_INF and not (0 <= j <= i):
        raise ValueError(f"need 0 <= j <= i or j = -inf, got i={i}, j={j}")


def build_P(ctx: GroupRingCtx, i: int, j: Level) -> GroupRingElem:
    """P(i, j) = sum_k sigma^(k p^j), k < p^(i-j), as an element of ctx."""
    _check_level(i, j)
    if i > ctx.i:
        raise ValueError("P(i, j) needs i <= the ring level")
    if j == NEG_INF:
        return ctx.one()
    step = ctx.p**j
    v = np.zeros(ctx.order, dtype=np.int64)
    for k in range(ctx.p ** (i - j)):
        v[(k * step) % ctx.order] += 1
    return GroupRingElem(ctx, v)


def build_Q(ctx: GroupRingCtx, i: int, j: Level, d: Union[int, Residue]) -> GroupRingElem:
    """Q_d(i, j) = sum_k (d^(p^j))^(p^(i-j)-1-k) sigma^(k p^j)."""
    _check_level(i, j)
    if i > ctx.i:
        raise ValueError("Q_d(i, j) needs i <= the ring level")
    dv = int(d) % ctx.q
    if (dv - 1) % ctx.p != 0:
        raise ValueError(f"d={dv} is not in U_1")
    if j == NEG_INF:
        return ctx.one()
    p, q = ctx.p, ctx.q
    step = p**j
    dj = pow(dv, step, q)
    top = p ** (i - j)
    v = np.zeros(ctx.order, dtype=np.int64)
    for k in range(top):
        v[(k * step) % ctx.order] += pow(dj, top - 1 - k, q)
    return GroupRingElem(ctx, v)


def phi_d(f: GroupRingElem, d: Union[int, Residue]) -> Residue:
    """Evaluation sigma^t -> d^t (additive; multiplicative when d^(p^i) = 1)."""
    q = f.ctx.q
    dv = int(d) % q
    total = 0
    pw = 1
    for c in f.coeffs:
        total += int(c) * pw
        pw = pw * dv % q
    return Residue(f.ctx.base, total)


def chi(f: GroupRingElem, j: int) -> GroupRingElem:
    """Projection to level j: sigma^t -> sigma^(t mod p^j)."""
    if j > f.ctx.i or j < 0:
        raise ValueError(f"chi_j needs 0 <= j <= {f.ctx.i}")
    tgt = f.ctx.at_level(j)
    v = f.coeffs.reshape(-1, tgt.order).sum(axis=0)
    return GroupRingElem(tgt, v)


def sigma_pow_minus_one(ctx: GroupRingCtx, c: Level) -> GroupRingElem:
    """sigma^(p^c) - 1, with sigma^(p^-inf) read as 0."""
    if c == NEG_INF:
        return -ctx.one()
    return ctx.sigma_pow(ctx.p ** int(c)) - 1


# --- ideals -----------------------------------------------------------------


class IdealHandle:
    """Ideal of R_m G_i together with its canonical Howell form."""

    def __init__(self, ctx: GroupRingCtx, generators: Iterable[GroupRingElem]):
        gens = list(generators)
        for g in gens:
            if g.ctx != ctx:
                raise ValueError("generator from a different ring")
        self.ctx = ctx
        self.generators = gens
        if gens:
            rows = np.vstack([g.mult_matrix() for g in gens])
        else:
            rows = np.zeros((0, ctx.order), dtype=np.int64)
        self.canonical: HowellForm = howell(MatrixZpm(ctx.base, rows.reshape(-1, ctx.order)))

    @classmethod
    def from_span(cls, ctx: GroupRingCtx, rows: np.ndarray) -> "IdealHandle":
        return cls(ctx, [GroupRingElem(ctx, r) for r in rows])

    def __eq__(self, other):
        return isinstance(other, IdealHandle) and self.ctx == other.ctx and self.canonical == other.canonical

    def __hash__(self):
        return hash((self.ctx, self.canonical))

    def __contains__(self, f: GroupRingElem) -> bool:
        return span_member(self.canonical, f.coeffs)

    def basis(self) -> np.ndarray:
        return self.canonical.matrix.entries

    def order_exponent(self) -> int:
        return self.canonical.order_exponent()

    def is_zero(self) -> bool:
        return self.canonical.matrix.rows == 0

    def __repr__(self):
        return f"IdealHandle(level={self.ctx.i}, |I|=p^{self.order_exponent()})"


def ideal_intersect(I1: IdealHandle, I2: IdealHandle) -> IdealHandle:
    if I1.ctx != I2.ctx:
        raise ValueError("ideals from different rings")
    ctx = I1.ctx
    rows = intersect_array(I1.basis(), I2.basis(), ctx.p, ctx.m)
    return IdealHandle.from_span(ctx, rows)


def ann_generic(ctx: GroupRingCtx, generators: Sequence[GroupRingElem]) -> IdealHandle:
    """{r : r g = 0 for all g}, by a kernel computation."""
    gens = list(generators)
    if not gens:
        return IdealHandle(ctx, [ctx.one()])
    stacked = np.hstack([g.mult_matrix() for g in gens])
    ker = kernel_array(stacked, ctx.p, ctx.m)
    return IdealHandle.from_span(ctx, ker)


# closed-form annihilator specifications


@dataclass(frozen=True)
class Pow:
    k: int


@dataclass(frozen=True)
class PowTimes:
    k: int
    j: int


@dataclass(frozen=True)
class SigmaMinusD:
    d: int


@dataclass(frozen=True)
class MultiGen:
    """Generators p^(b_0) or p^(b_0)(sigma^(p^(c_0)) - 1), then p^(b_j)(sigma^(p^(c_j)) - 1).

    b is decreasing and c increasing.  The closed form holds for weakly
    decreasing b but needs c strictly increasing; the flags relax either
    requirement so the failing readings can still be evaluated.
    """

    b: Tuple[int, ...]
    c: Tuple[Level, ...]
    allow_equal_b: bool = True
    allow_equal_c: bool = False


AnnSpec = Union[Pow, PowTimes, SigmaMinusD, MultiGen]


def twist_exponent(ctx: GroupRingCtx, d: int) -> int:
    """min{v >= 0 : p^v (d^(p^i) - 1) = 0 mod p^m}."""
    p, m, q = ctx.p, ctx.m, ctx.q
    w = (pow(int(d) % q, ctx.order, q) - 1) % q
    for v in range(m + 1):
        if (w * p**v) % q == 0:
            return v
    return m


def multigen_generators(ctx: GroupRingCtx, spec: MultiGen) -> List[GroupRingElem]:
    """The elements whose joint annihilator MultiGen describes."""
    gens = []
    for j, (b, c) in enumerate(zip(spec.b, spec.c)):
        if j == 0 and c == NEG_INF:
            gens.append(ctx.scalar(ctx.p**b))
        else:
            gens.append(sigma_pow_minus_one(ctx, c) * ctx.p**b)
    return gens


def _validate_multigen(ctx: GroupRingCtx, spec: MultiGen):
    b, c = list(spec.b), list(spec.c)
    if len(b) != len(c) or not b:
        raise ValueError("b and c must be nonempty and of equal length")
    for x in b:
        if not (0 <= x <= ctx.m - 1):
            raise ValueError(f"b entries must lie in 0..{ctx.m - 1}")
    for x in c:
        if x != NEG_INF and not (0 <= x <= ctx.i - 1):
            raise ValueError(f"c entries must lie in -inf, 0..{ctx.i - 1}")
    for u, v in zip(b, b[1:]):
        if v > u or (not spec.allow_equal_b and v == u):
            raise ValueError("b must be decreasing")
    for u, v in zip(c, c[1:]):
        if v < u or (not spec.allow_equal_c and v == u):
            raise ValueError("c must be increasing")


def ann_closed_form(ctx: GroupRingCtx, spec: AnnSpec) -> IdealHandle:
    p, m, i = ctx.p, ctx.m, ctx.i
    if isinstance(spec, Pow):
        if not 0 <= spec.k <= m:
            raise ValueError("need 0 <= k <= m")
        return IdealHandle(ctx, [ctx.scalar(p ** (m - spec.k))])
    if isinstance(spec, PowTimes):
        if not 0 <= spec.k <= m or not 0 <= spec.j < i:
            raise ValueError("need 0 <= k <= m and 0 <= j < i")
        return IdealHandle(ctx, [build_P(ctx, i, spec.j), ctx.scalar(p ** (m - spec.k))])
    if isinstance(spec, SigmaMinusD):
        k = twist_exponent(ctx, spec.d)
        return IdealHandle(ctx, [build_Q(ctx, i, 0, spec.d) * p**k])
    if isinstance(spec, MultiGen):
        _validate_multigen(ctx, spec)
        b, c = spec.b, spec.c
        t = len(b) - 1
        gens = []
        if c[0] != NEG_INF:
            gens.append(build_P(ctx, i, c[0]))
        if t == 0:
            gens.append(ctx.scalar(p ** (m - b[0])))
        else:
            for j in range(1, t + 1):
                gens.append(build_P(ctx, i, c[j]) * p ** (m - b[j - 1]))
            gens.append(ctx.scalar(p ** (m - b[t])))
        return IdealHandle(ctx, gens)
    raise TypeError(f"unknown annihilator spec {spec!r}")


def ann_spec_generators(ctx: GroupRingCtx, spec: AnnSpec) -> List[GroupRingElem]:
    """The element(s) being annihilated, for feeding ann_generic."""
    p = ctx.p
    if isinstance(spec, Pow):
        return [ctx.scalar(p**spec.k)]
    if isinstance(spec, PowTimes):
        return [sigma_pow_minus_one(ctx, spec.j) * p**spec.k]
    if isinstance(spec, SigmaMinusD):
        return [ctx.sigma - spec.d]
    if isinstance(spec, MultiGen):
        _validate_multigen(ctx, spec)
        return multigen_generators(ctx, spec)
    raise TypeError(f"unknown annihilator spec {spec!r}")
