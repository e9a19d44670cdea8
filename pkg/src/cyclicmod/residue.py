"""Arithmetic in Z/p^m and the unit filtration U_i = 1 + p^i Z.

Levels that may be infinite (U_inf = {1}, exponents a_i = -inf) use the
float infinities, which compare correctly against ints and absorb integer
offsets.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

INF = math.inf
NEG_INF = -math.inf

Level = Union[int, float]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    k = 3
    while k * k <= p:
        if p % k == 0:
            return False
        k += 2
    return True


def p_pow(p: int, e: Level) -> int:
    """p**e with the convention p^(-inf) = 0."""
    if e == NEG_INF:
        return 0
    if e < 0 or e == INF:
        raise ValueError(f"exponent {e} out of range")
    return p ** int(e)


@dataclass(frozen=True)
class RingCtx:
    """Parameters of R_m = Z/p^m, optionally with a group exponent n."""

    p: int
    m: int
    n: Optional[int] = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.m < 1:
            raise ValueError(f"m={self.m} must be >= 1")
        if self.n is not None and self.n < 0:
            raise ValueError(f"n={self.n} must be >= 0")
        if self.p ** self.m >= 2**63:
            raise ValueError("p^m must fit in 64 bits")

    @property
    def q(self) -> int:
        return self.p ** self.m

    def __call__(self, value: int) -> "Residue":
        return Residue(self, value)

    def val(self, x: int) -> Level:
        """p-adic valuation of an integer read mod p^m (INF for 0)."""
        x %= self.q
        if x == 0:
            return INF
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v


@dataclass(frozen=True)
class Residue:
    ctx: RingCtx
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.ctx.q)

    def _coerce(self, other) -> int:
        if isinstance(other, Residue):
            if other.ctx.p != self.ctx.p or other.ctx.m != self.ctx.m:
                raise ValueError("residues from different rings")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.ctx, self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.ctx, self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.ctx, o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.ctx, self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return Residue(self.ctx, -self.value)

    def __pow__(self, e: int):
        return Residue(self.ctx, pow(self.value, e, self.ctx.q))

    def __int__(self):
        return self.value

    def is_unit(self) -> bool:
        return self.value % self.ctx.p != 0

    def inverse(self) -> "Residue":
        return Residue(self.ctx, pow(self.value, -1, self.ctx.q))


def val_p(x: Residue) -> Level:
    return x.ctx.val(x.value)


def in_U(x: Residue, i: Level) -> bool:
    """x = 1 mod p^min(i, m); in_U(x, INF) means x == 1."""
    if i != INF and i < 1:
        raise ValueError("U_i needs i >= 1")
    ctx = x.ctx
    if i == INF:
        return x.value == 1
    return (x.value - 1) % ctx.p ** min(int(i), ctx.m) == 0


def in_minus_U(x: Residue, v: Level) -> bool:
    """x = -1 mod 2^min(v, m).  Only meaningful for p = 2."""
    ctx = x.ctx
    if ctx.p != 2:
        raise ValueError("-U_v is only defined here for p = 2")
    if v != INF and v < 1:
        raise ValueError("-U_v needs v >= 1")
    if v == INF:
        return x.value == ctx.q - 1
    return (x.value + 1) % 2 ** min(int(v), ctx.m) == 0


def u_level(x: Residue) -> Level:
    """Largest i with x in U_i (INF when x = 1, 0 when x is not in U_1)."""
    if x.value == 1:
        return INF
    v = val_p(x - 1)
    return v


def minus_u_level(x: Residue) -> Level:
    """Largest v with x in -U_v (p = 2); INF when x = -1 mod 2^m."""
    if x.ctx.p != 2:
        raise ValueError("-U_v is only defined here for p = 2")
    if x.value == x.ctx.q - 1:
        return INF
    return val_p(x + 1)


class PowerKind(enum.Enum):
    IN_U_NOT_NEXT = "in_U_not_next"
    EXACTLY_ONE = "exactly_one"
    IN_U = "in_U"


@dataclass(frozen=True)
class PowerClass:
    kind: PowerKind
    level: Level = INF

    def __post_init__(self):
        if self.level != INF and self.level < 1:
            raise ValueError("PowerClass level must be >= 1")

    def contains(self, x: Residue) -> bool:
        """Membership read modulo p^m: claims above level m are vacuous."""
        if self.kind is PowerKind.EXACTLY_ONE:
            return x.value == 1
        if not in_U(x, self.level):
            return False
        if self.kind is PowerKind.IN_U_NOT_NEXT and self.level + 1 <= x.ctx.m:
            return not in_U(x, self.level + 1)
        return True


def pow_class(d: Residue, i: int, j: int) -> PowerClass:
    """Guaranteed class of d^(p^j) for d in U_i.

    Three regimes: the generic one (d^(p^j) in U_(i+j)), p = 2 with d = -1
    (the power is 1), and p = 2 with d in -U_v (the power lands in U_(v+j)).
    The "not in the next level" refinement is returned whenever the
    hypothesis of the sharper statement can be read off d.
    """
    ctx = d.ctx
    if i < 1:
        raise ValueError("level i must be >= 1")
    if j < 0:
        raise ValueError("j must be >= 0")
    if not in_U(d, i):
        raise ValueError(f"d={d.value} is not in U_{i}")
    p = ctx.p
    if p == 2 and i == 1 and j > 0:
        if in_U(d, 2):
            # d already sits in U_2, so the generic regime applies from there
            return pow_class(d, 2, j)
        if in_minus_U(d, INF):
            return PowerClass(PowerKind.EXACTLY_ONE)
        v = int(minus_u_level(d))
        return PowerClass(PowerKind.IN_U_NOT_NEXT, v + j)
    if i + 1 > ctx.m or in_U(d, i + 1):
        return PowerClass(PowerKind.IN_U, i + j)
    return PowerClass(PowerKind.IN_U_NOT_NEXT, i + j)


def pow_expansion_check(d: Residue, i: int, j: int) -> bool:
    """Check the closed-form congruence for d^(p^j), d = 1 + p^i x.

    Holds modulo p^(2i+j); computed on the integer representative of d.
    """
    ctx = d.ctx
    p = ctx.p
    if i < 1:
        raise ValueError("level i must be >= 1")
    if (d.value - 1) % p**i != 0:
        raise ValueError(f"d={d.value} is not in U_{i}")
    x = (d.value - 1) // p**i
    mod = p ** (2 * i + j)
    lhs = pow(d.value, p**j, mod)
    if p > 2:
        rhs = 1 + p ** (i + j) * x
    else:
        rhs = 1 + 2 ** (i + j) * x * (1 + 2 ** (i - 1) * x)
    return (lhs - rhs) % mod == 0
