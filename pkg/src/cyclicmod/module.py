"""Finitely presented R_m G_i-modules in concrete coordinates.

A realized module is a product Z/p^(e_1) x ... x Z/p^(e_r) together with the
matrix of sigma acting on row vectors.  Every module also carries a
presentation over R_m G_i (generators, relation lattice, and an expression
of each coordinate vector in the generators), which is what Hom spaces are
computed from.

Submodules are kept in the "scaled lattice": coordinate k is multiplied by
p^(m - e_k), embedding the module in (Z/p^m)^r so spans are canonical
Howell forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .groupring import GroupRingCtx, GroupRingElem
from .linalg import Solver, as_rows, howell_array, intersect_array, kernel_array, reduce_vector, smith_cols
from .residue import RingCtx


@dataclass
class ModulePresentation:
    """Generators e_0..e_(g-1) with relations sum_k r_k e_k = 0."""

    ring: GroupRingCtx
    gens: int
    relations: List[List[GroupRingElem]]
    labels: Optional[List[str]] = None

    def __post_init__(self):
        for rel in self.relations:
            if len(rel) != self.gens:
                raise ValueError(f"relation has {len(rel)} entries, expected {self.gens}")
            for r in rel:
                if r.ctx != self.ring:
                    raise ValueError("relation entry from a different ring")
        if self.labels is not None and len(self.labels) != self.gens:
            raise ValueError("one label per generator")


@dataclass(frozen=True, eq=False)
class Presentation:
    """Coordinate-level presentation data of a ConcreteModule.

    relations: rows in (Z/p^m)^(g p^i) spanning the relation lattice, the
    entry at k*p^i + t being the coefficient of sigma^t e_k.
    expr: row j is a preimage of coordinate vector j in the same free module.
    """

    gens: np.ndarray
    relations: np.ndarray
    expr: np.ndarray


def _sigma_free(g: int, P: int) -> np.ndarray:
    """sigma on (R_m G_i)^g in the basis sigma^t e_k (index k*P + t)."""
    N = g * P
    S = np.zeros((N, N), dtype=np.int64)
    for k in range(g):
        for t in range(P):
            S[k * P + t, k * P + (t + 1) % P] = 1
    return S


class ConcreteModule:
    def __init__(
        self,
        ring: GroupRingCtx,
        divisors: Sequence[int],
        sigma: np.ndarray,
        gen_images: Optional[np.ndarray] = None,
        labels: Optional[Sequence[str]] = None,
        presentation: Optional[Presentation] = None,
    ):
        self.ring = ring
        self.divisors = tuple(int(e) for e in divisors)
        for e in self.divisors:
            if not 1 <= e <= ring.m:
                raise ValueError(f"divisor exponent {e} outside 1..{ring.m}")
        r = len(self.divisors)
        self.sigma = self.reduce_rows(np.asarray(sigma, dtype=np.int64).reshape(r, r))
        if gen_images is None:
            gen_images = np.zeros((0, r), dtype=np.int64)
        self.gen_images = self.reduce_rows(as_rows(gen_images, r))
        self.labels = tuple(labels) if labels is not None else None
        self._presentation = presentation

    # --- basic data --------------------------------------------------------

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def m(self) -> int:
        return self.ring.m

    @property
    def q(self) -> int:
        return self.ring.q

    @property
    def rank(self) -> int:
        return len(self.divisors)

    @cached_property
    def moduli(self) -> np.ndarray:
        return np.array([self.p**e for e in self.divisors], dtype=np.int64)

    @cached_property
    def scale(self) -> np.ndarray:
        return np.array([self.p ** (self.m - e) for e in self.divisors], dtype=np.int64)

    def order_exponent(self) -> int:
        """log_p |M|."""
        return sum(self.divisors)

    def is_zero(self) -> bool:
        return self.rank == 0

    def reduce_rows(self, a: np.ndarray) -> np.ndarray:
        if self.rank == 0:
            return np.zeros(a.shape[:-1] + (0,), dtype=np.int64)
        return np.asarray(a, dtype=np.int64) % self.moduli

    def to_lattice(self, a: np.ndarray) -> np.ndarray:
        return (np.asarray(a, dtype=np.int64) % self.moduli) * self.scale % self.q

    def from_lattice(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.int64)
        if np.any(s % self.scale):
            raise ValueError("vector is not in the scaled lattice")
        return s // self.scale

    def __repr__(self):
        return f"ConcreteModule(p={self.p}, m={self.m}, i={self.ring.i}, divisors={self.divisors})"

    # --- sigma action --------------------------------------------------------

    @cached_property
    def sigma_powers(self) -> np.ndarray:
        """Array of shape (p^i, r, r) holding sigma^t, t < p^i."""
        P = self.ring.order
        r = self.rank
        out = np.zeros((P, r, r), dtype=np.int64)
        cur = np.eye(r, dtype=np.int64)
        cur = self.reduce_rows(cur)
        for t in range(P):
            out[t] = cur
            cur = self.reduce_rows(cur @ self.sigma)
        return out

    def action_matrix(self, f: GroupRingElem) -> np.ndarray:
        """Matrix of u -> f u on row vectors."""
        if f.ctx != self.ring:
            raise ValueError("group ring element from a different ring")
        A = np.tensordot(f.coeffs, self.sigma_powers, axes=(0, 0)) % self.q
        return self.reduce_rows(A)

    def apply(self, u: np.ndarray, A: np.ndarray) -> np.ndarray:
        return self.reduce_rows(np.asarray(u, dtype=np.int64) @ A)

    def element(self, coords) -> "ModElement":
        return ModElement(self, np.asarray(coords, dtype=np.int64))

    def zero(self) -> "ModElement":
        return self.element(np.zeros(self.rank, dtype=np.int64))

    def gen(self, k) -> "ModElement":
        if isinstance(k, str):
            if self.labels is None:
                raise KeyError(k)
            k = self.labels.index(k)
        return self.element(self.gen_images[k])

    def elements(self) -> Iterator[np.ndarray]:
        for c in itertools.product(*[range(int(x)) for x in self.moduli]):
            yield np.array(c, dtype=np.int64)

    # --- presentation --------------------------------------------------------

    def presentation(self) -> Presentation:
        if self._presentation is None:
            self._presentation = _minimal_presentation(self)
        return self._presentation

    def check_sigma_order(self) -> bool:
        P = self.ring.order
        S = np.eye(self.rank, dtype=np.int64)
        for _ in range(P):
            S = self.reduce_rows(S @ self.sigma)
        return bool(np.all(S == self.reduce_rows(np.eye(self.rank, dtype=np.int64))))


@dataclass(frozen=True, eq=False)
class ModElement:
    module: ConcreteModule
    coords: np.ndarray

    def __post_init__(self):
        c = self.module.reduce_rows(np.asarray(self.coords, dtype=np.int64).reshape(self.module.rank))
        object.__setattr__(self, "coords", c)

    def __add__(self, other: "ModElement") -> "ModElement":
        self._same(other)
        return ModElement(self.module, self.coords + other.coords)

    def __sub__(self, other: "ModElement") -> "ModElement":
        self._same(other)
        return ModElement(self.module, self.coords - other.coords)

    def __neg__(self):
        return ModElement(self.module, -self.coords)

    def __rmul__(self, c: int) -> "ModElement":
        return ModElement(self.module, self.coords * (int(c) % self.module.q))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModElement)
            and other.module is self.module
            and bool(np.all(self.coords == other.coords))
        )

    def __hash__(self):
        return hash(tuple(int(x) for x in self.coords))

    def is_zero(self) -> bool:
        return not np.any(self.coords)

    def _same(self, other):
        if other.module is not self.module:
            raise ValueError("elements of different modules")


def act(f: GroupRingElem, u: ModElement) -> ModElement:
    M = u.module
    return ModElement(M, M.apply(u.coords, M.action_matrix(f)))


# --- realization -------------------------------------------------------------


def _closed_relation_rows(P: ModulePresentation) -> np.ndarray:
    ring = P.ring
    order = ring.order
    N = P.gens * order
    rows = []
    for rel in P.relations:
        base = np.concatenate([r.coeffs for r in rel]) if rel else np.zeros(0, dtype=np.int64)
        blocks = base.reshape(P.gens, order)
        for t in range(order):
            rows.append(np.roll(blocks, t, axis=1).reshape(N))
    if not rows:
        return np.zeros((0, N), dtype=np.int64)
    return np.array(rows, dtype=np.int64) % ring.q


def _quotient_of_free(ring: GroupRingCtx, g: int, rel_rows: np.ndarray, labels=None) -> ConcreteModule:
    p, m, q = ring.p, ring.m, ring.q
    order = ring.order
    N = g * order
    if rel_rows.shape[0]:
        hrel, _ = howell_array(rel_rows, p, m)
    else:
        hrel = np.zeros((0, N), dtype=np.int64)
    exps, V, Vinv = smith_cols(hrel if hrel.shape[0] else np.zeros((1, N), dtype=np.int64), p, m)
    kept = [k for k, e in enumerate(exps) if e > 0]
    divisors = [exps[k] for k in kept]
    proj = V[:, kept] % q
    lift = Vinv[kept] % q
    moduli = np.array([p**e for e in divisors], dtype=np.int64)
    S = _sigma_free(g, order)
    sigma = (lift @ S @ proj) % q % moduli if kept else np.zeros((0, 0), dtype=np.int64)
    gen_images = proj[[k * order for k in range(g)]] % moduli if kept else np.zeros((g, 0), dtype=np.int64)
    pres = Presentation(
        gens=gen_images,
        relations=hrel,
        expr=lift,
    )
    return ConcreteModule(ring, divisors, sigma, gen_images, labels, presentation=pres)


def realize(P: ModulePresentation) -> ConcreteModule:
    """The quotient of (R_m G_i)^g by the relations, in divisor coordinates."""
    return _quotient_of_free(P.ring, P.gens, _closed_relation_rows(P), P.labels)


def free_module(ring: GroupRingCtx, rank: int = 1) -> ConcreteModule:
    return realize(ModulePresentation(ring, rank, []))


def cyclic_module(ring: GroupRingCtx, relations: Sequence[GroupRingElem], label: str = "u") -> ConcreteModule:
    """<u : f u = 0 for f in relations>."""
    return realize(ModulePresentation(ring, 1, [[f] for f in relations], [label]))


def zero_module(ring: GroupRingCtx) -> ConcreteModule:
    return ConcreteModule(ring, [], np.zeros((0, 0), dtype=np.int64))


def _minimal_presentation(M: ConcreteModule) -> Presentation:
    """Generators lifting an F_p-basis of M / I M, with their relations."""
    p, m, q = M.p, M.m, M.q
    r = M.rank
    order = M.ring.order
    if r == 0:
        return Presentation(np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0), dtype=np.int64))
    T = (M.sigma - np.eye(r, dtype=np.int64)) % p
    hT, piv = howell_array(T, p, 1)
    pivcols = {c for c, _ in piv}
    gens_idx = [j for j in range(r) if j not in pivcols]
    G = np.eye(r, dtype=np.int64)[gens_idx]
    g = len(gens_idx)
    # Pi: sigma^t e_k -> gen_k sigma^t
    Pi = np.einsum("ka,tab->ktb", G, M.sigma_powers).reshape(g * order, r) % M.moduli
    Pi_s = Pi * M.scale % q
    rel = kernel_array(Pi_s, p, m)
    solver = Solver(Pi_s, p, m)
    expr = np.zeros((r, g * order), dtype=np.int64)
    for j in range(r):
        x = solver.solve(M.to_lattice(np.eye(r, dtype=np.int64)[j]))
        if x is None:
            raise RuntimeError("chosen generators do not generate the module")
        expr[j] = x
    return Presentation(G, rel.astype(np.int64), expr)


# --- submodules ----------------------------------------------------------------


class Submodule:
    """R_m G_i-submodule stored by its Howell basis in the scaled lattice."""

    def __init__(self, module: ConcreteModule, lattice_rows: np.ndarray, check: bool = True):
        self.module = module
        M = module
        rows = as_rows(lattice_rows, M.rank) % M.q
        h, piv = howell_array(rows, M.p, M.m)
        self.basis = as_rows(h, M.rank)
        self.pivots = piv
        if check and not self._closed():
            raise ValueError("span is not closed under sigma")

    @classmethod
    def generated_by(cls, module: ConcreteModule, vectors) -> "Submodule":
        """R_m G_i-span of the given coordinate vectors."""
        M = module
        v = M.reduce_rows(as_rows(vectors, M.rank))
        orbit = as_rows(np.einsum("ka,tab->ktb", v, M.sigma_powers), M.rank) % M.moduli
        return cls(M, M.to_lattice(orbit), check=False)

    @classmethod
    def whole(cls, module: ConcreteModule) -> "Submodule":
        return cls(module, module.to_lattice(np.eye(module.rank, dtype=np.int64)), check=False)

    def _closed(self) -> bool:
        M = self.module
        for row in self.basis:
            img = M.to_lattice(M.apply(M.from_lattice(row), M.sigma))
            if not self.contains_lattice(img):
                return False
        return True

    def contains_lattice(self, s: np.ndarray) -> bool:
        M = self.module
        rem, _ = reduce_vector(self.basis, self.pivots, np.asarray(s) % M.q, M.p, M.m)
        return not np.any(rem)

    def __contains__(self, u) -> bool:
        coords = u.coords if isinstance(u, ModElement) else u
        return self.contains_lattice(self.module.to_lattice(coords))

    def order_exponent(self) -> int:
        m = self.module.m
        return sum(m - e for _, e in self.pivots)

    def is_zero(self) -> bool:
        return self.basis.shape[0] == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Submodule)
            and other.module is self.module
            and self.basis.shape == other.basis.shape
            and bool(np.all(self.basis == other.basis))
        )

    def __hash__(self):
        return hash(self.basis.tobytes())

    def __add__(self, other: "Submodule") -> "Submodule":
        return Submodule(self.module, np.vstack([self.basis, other.basis]), check=False)

    def __and__(self, other: "Submodule") -> "Submodule":
        M = self.module
        if self.is_zero() or other.is_zero():
            return Submodule(M, np.zeros((0, M.rank), dtype=np.int64), check=False)
        inter = intersect_array(self.basis, other.basis, M.p, M.m)
        return Submodule(M, inter, check=False)

    def coordinate_vectors(self) -> np.ndarray:
        """Basis rows converted back to module coordinates."""
        return self.module.from_lattice(self.basis) if self.basis.size else np.zeros((0, self.module.rank), dtype=np.int64)

    def fp_dimension(self) -> int:
        """F_p-dimension, meaningful when p kills the submodule."""
        return self.order_exponent()

    def as_module(self) -> Tuple[ConcreteModule, np.ndarray]:
        """Realize as its own module; returns (module, embedding matrix).

        The embedding maps new coordinates (row vectors) to coordinates of the
        ambient module.
        """
        M = self.module
        p, m, q = M.p, M.m, M.q
        if self.is_zero():
            return zero_module(M.ring), np.zeros((0, M.rank), dtype=np.int64)
        exps, V, Vinv = smith_cols(self.basis, p, m)
        kept = [k for k, f in enumerate(exps) if f < m]
        divisors = [m - exps[k] for k in kept]
        # basis vector k of the submodule, in lattice coordinates
        B = np.array([(p ** exps[k]) * Vinv[k] % q for k in kept], dtype=np.int64)
        emb = M.from_lattice(B)
        new_moduli = np.array([p**e for e in divisors], dtype=np.int64)
        div_f = np.array([p ** exps[k] for k in kept], dtype=np.int64)

        def coords_of(lattice_vecs):
            w = (lattice_vecs @ V[:, kept]) % q
            if np.any(w % div_f):
                raise RuntimeError("vector outside the submodule")
            return (w // div_f) % new_moduli

        img = M.to_lattice(M.apply(emb, M.sigma))
        sigma = coords_of(img)
        sub = ConcreteModule(M.ring, divisors, sigma)
        return sub, emb


# --- kernels of maps out of a module ------------------------------------------


def module_kernel(M: ConcreteModule, A: np.ndarray, target_divisors: Sequence[int]) -> Submodule:
    """{u in M : u A = 0}, A an r x t matrix into a product of Z/p^(f_l)."""
    scale = np.array([M.p ** (M.m - f) for f in target_divisors], dtype=np.int64)
    ker = kernel_array(np.asarray(A, dtype=np.int64) % M.q * scale % M.q, M.p, M.m)
    if ker.shape[0] == 0:
        return Submodule(M, np.zeros((0, M.rank), dtype=np.int64), check=False)
    return Submodule(M, M.to_lattice(ker), check=False)


def fixed_points(M: ConcreteModule) -> Submodule:
    r = M.rank
    if r == 0:
        return Submodule(M, np.zeros((0, 0), dtype=np.int64), check=False)
    return module_kernel(M, M.sigma - np.eye(r, dtype=np.int64), M.divisors)


def star(M: ConcreteModule) -> Submodule:
    """ann_M of (p, sigma - 1)."""
    r = M.rank
    if r == 0:
        return Submodule(M, np.zeros((0, 0), dtype=np.int64), check=False)
    I = np.eye(r, dtype=np.int64)
    A = np.hstack([M.sigma - I, M.p * I])
    return module_kernel(M, A, M.divisors + M.divisors)


def _fp_rank(a: np.ndarray, p: int) -> int:
    if a.size == 0:
        return 0
    _, piv = howell_array(np.asarray(a) % p, p, 1)
    return len(piv)


def length(u: ModElement) -> int:
    """F_p-dimension of the F_p G-span of the image of u in M/pM."""
    M = u.module
    p = M.p
    T = (M.sigma - np.eye(M.rank, dtype=np.int64)) % p
    w = u.coords % p
    count = 0
    while np.any(w):
        count += 1
        w = (w @ T) % p
        if count > M.rank:
            raise RuntimeError("sigma - 1 is not nilpotent mod p")
    return count


def min_generators(M: ConcreteModule) -> int:
    """dim_Fp M / (p, sigma - 1) M."""
    if M.rank == 0:
        return 0
    T = M.sigma - np.eye(M.rank, dtype=np.int64)
    return M.rank - _fp_rank(T, M.p)


def is_cyclic(M: ConcreteModule) -> bool:
    return min_generators(M) <= 1


def quotient_mod_pk(M: ConcreteModule, k: int) -> ConcreteModule:
    """M / p^k M as a module over R_k G_i."""
    if not 1 <= k <= M.m:
        raise ValueError(f"need 1 <= k <= {M.m}")
    if k == M.m:
        return M
    base = RingCtx(M.p, k, M.ring.base.n)
    ring = GroupRingCtx(base, M.ring.i)
    qk = base.q
    divisors = [min(e, k) for e in M.divisors]
    pres = M.presentation()
    new_pres = Presentation(
        gens=pres.gens % qk,
        relations=pres.relations % qk,
        expr=pres.expr % qk,
    )
    return ConcreteModule(ring, divisors, M.sigma % qk, M.gen_images % qk, M.labels, presentation=new_pres)


def direct_sum(M: ConcreteModule, N: ConcreteModule) -> ConcreteModule:
    if M.ring != N.ring:
        raise ValueError("modules over different rings")
    r1, r2 = M.rank, N.rank
    sigma = np.zeros((r1 + r2, r1 + r2), dtype=np.int64)
    sigma[:r1, :r1] = M.sigma
    sigma[r1:, r1:] = N.sigma
    gens = np.zeros((M.gen_images.shape[0] + N.gen_images.shape[0], r1 + r2), dtype=np.int64)
    gens[: M.gen_images.shape[0], :r1] = M.gen_images
    gens[M.gen_images.shape[0] :, r1:] = N.gen_images
    labels = None
    if M.labels is not None and N.labels is not None:
        labels = list(M.labels) + list(N.labels)
        if len(labels) != gens.shape[0]:
            labels = None
    pm, pn = M.presentation(), N.presentation()
    order = M.ring.order
    g1, g2 = pm.gens.shape[0], pn.gens.shape[0]
    G = np.zeros((g1 + g2, r1 + r2), dtype=np.int64)
    G[:g1, :r1] = pm.gens
    G[g1:, r1:] = pn.gens
    R = np.zeros((pm.relations.shape[0] + pn.relations.shape[0], (g1 + g2) * order), dtype=np.int64)
    R[: pm.relations.shape[0], : g1 * order] = pm.relations
    R[pm.relations.shape[0] :, g1 * order :] = pn.relations
    E = np.zeros((r1 + r2, (g1 + g2) * order), dtype=np.int64)
    E[:r1, : g1 * order] = pm.expr
    E[r1:, g1 * order :] = pn.expr
    return ConcreteModule(
        M.ring, M.divisors + N.divisors, sigma, gens, labels, presentation=Presentation(G, R, E)
    )


# --- Hom -----------------------------------------------------------------------


def hom_space(M: ConcreteModule, N: ConcreteModule) -> List[np.ndarray]:
    """Generating set of Hom_{R_m G_i}(M, N) as r_M x r_N matrices.

    A homomorphism is fixed by the images n_k of the presentation generators
    of M; the relations of M give linear conditions on (n_k) in N^g.
    """
    if M.ring != N.ring:
        raise ValueError("modules over different rings")
    p, m, q = M.p, M.m, M.q
    rM, rN = M.rank, N.rank
    if rM == 0 or rN == 0:
        return []
    pres = M.presentation()
    g = pres.gens.shape[0]
    order = M.ring.order
    Spow = N.sigma_powers
    R = pres.relations
    s = R.shape[0]
    if s:
        A = np.einsum("skt,tab->skab", R.reshape(s, g, order), Spow) % q
        A = A * N.scale % q
        C = A.transpose(1, 2, 0, 3).reshape(g * rN, s * rN)
    else:
        C = np.zeros((g * rN, 1), dtype=np.int64)
    Z = kernel_array(C, p, m)
    if Z.shape[0] == 0:
        return []
    Z = Z.reshape(-1, g, rN)
    W = np.einsum("Kka,tab->Kktb", Z, Spow).reshape(Z.shape[0], g * order, rN) % q
    H = np.einsum("jx,Kxb->Kjb", pres.expr, W) % q
    H = H % N.moduli
    flat = (H * N.scale % q).reshape(H.shape[0], rM * rN)
    hb, _ = howell_array(flat, p, m)
    if hb.shape[0] == 0:
        return []
    out = (hb.reshape(-1, rM, rN) // N.scale).astype(np.int64)
    return [h for h in out]


def is_homomorphism(M: ConcreteModule, N: ConcreteModule, H: np.ndarray) -> bool:
    """sigma-equivariance and compatibility with the divisors of M."""
    H = np.asarray(H, dtype=np.int64) % N.moduli
    lhs = N.reduce_rows(M.sigma @ H)
    rhs = N.reduce_rows(H @ N.sigma)
    if not np.all(lhs == rhs):
        return False
    tors = N.reduce_rows(M.moduli[:, None] * H)
    return not np.any(tors)


# --- invariants ------------------------------------------------------------------


@dataclass(frozen=True)
class IsoSignature:
    order_exponent: int
    generators: int
    star_dim: int
    ker_profile: Tuple[int, ...]
    layer_dims: Tuple[int, ...]
    image_profile: Tuple[int, ...] = ()

    def as_tuple(self) -> Tuple[int, ...]:
        return (
            (self.order_exponent, self.generators, self.star_dim)
            + self.ker_profile
            + self.layer_dims
            + self.image_profile
        )

    def to_json(self) -> dict:
        out = {
            "order_exponent": self.order_exponent,
            "generators": self.generators,
            "star_dim": self.star_dim,
            "ker_profile": list(self.ker_profile),
            "layer_dims": list(self.layer_dims),
        }
        if self.image_profile:
            out["image_profile"] = list(self.image_profile)
        return out


def iso_signature(M: ConcreteModule, extended: bool = False) -> IsoSignature:
    """Isomorphism invariants of M (necessary, not sufficient, for M = N).

    extended=True appends log_p |(sigma - 1)^j M| for j = 1..p^i.
    """
    p, r = M.p, M.rank
    order = M.ring.order
    I = np.eye(r, dtype=np.int64)
    T = (M.sigma - I) % p
    prof = []
    Tj = I
    for _ in range(order):
        Tj = (Tj @ T) % p
        prof.append(r - _fp_rank(Tj, p))
    layers = tuple(sum(1 for e in M.divisors if e > k) for k in range(M.m))
    images: Tuple[int, ...] = ()
    if extended:
        S = M.reduce_rows(M.sigma - I)
        cur = M.reduce_rows(I)
        out = []
        for _ in range(order):
            cur = M.reduce_rows(cur @ S)
            out.append(Submodule(M, M.to_lattice(cur), check=False).order_exponent() if r else 0)
        images = tuple(out)
    return IsoSignature(
        M.order_exponent(),
        min_generators(M),
        star(M).order_exponent(),
        tuple(prof),
        layers,
        images,
    )


def scramble(M: ConcreteModule, rng, steps: int = 0) -> ConcreteModule:
    """An isomorphic copy of M in randomly changed coordinates.

    The change of basis is a product of elementary automorphisms of
    Z/p^(e_1) x ... x Z/p^(e_r): unit scalings and u_k += c p^s u_j with s
    large enough for the map to be well defined.
    """
    r = M.rank
    if r == 0:
        return M
    p, q = M.p, M.q
    U = np.eye(r, dtype=np.int64)
    Uinv = np.eye(r, dtype=np.int64)
    for _ in range(steps or 3 * r):
        j, k = rng.randrange(r), rng.randrange(r)
        if j == k:
            u = rng.randrange(1, q)
            while u % p == 0:
                u = rng.randrange(1, q)
            E = np.eye(r, dtype=np.int64)
            E[j, j] = u
            Ei = np.eye(r, dtype=np.int64)
            Ei[j, j] = pow(u, -1, q)
        else:
            s = max(0, M.divisors[k] - M.divisors[j])
            c = rng.randrange(q) * p**s % q
            E = np.eye(r, dtype=np.int64)
            E[j, k] = c
            Ei = np.eye(r, dtype=np.int64)
            Ei[j, k] = -c % q
        U = U @ E % q
        Uinv = Ei @ Uinv % q
    # new coordinates: u' = u U, so sigma' = U^-1 sigma U and images map by U
    sigma = M.reduce_rows(Uinv @ M.sigma % q @ U)
    gens = M.reduce_rows(M.gen_images @ U)
    return ConcreteModule(M.ring, M.divisors, sigma, gens, M.labels)


def inflate_module(M: ConcreteModule, ring: GroupRingCtx) -> ConcreteModule:
    """View an R_m G_i-module as an R_m G_j-module for j >= i."""
    if ring.p != M.p or ring.m != M.m or ring.i < M.ring.i:
        raise ValueError("can only inflate to a larger group level over the same R_m")
    return ConcreteModule(ring, M.divisors, M.sigma, M.gen_images, M.labels)
