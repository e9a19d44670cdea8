"""Indecomposability through the endomorphism ring.

End(M) is computed as a Z/p^m-lattice, reduced to the F_p-algebra
A = End/p End, and A is tested for locality: A/rad(A) must be a field.
When M splits, a verified idempotent endomorphism is produced instead.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor, gf_gcdex, gf_mul, gf_pow, gf_rem

from .linalg import smith_cols
from .module import ConcreteModule, Submodule, hom_space, is_homomorphism, iso_signature, module_kernel

MAX_ALGEBRA_DIM = 400
BRUTE_FORCE_LIMIT = 2**14
DEFAULT_BUDGET = 512
DEFAULT_SEED = 20240


# --- linear algebra over F_p --------------------------------------------------


def fp_rref(a: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form over F_p (zero rows dropped) and pivot columns."""
    a = np.array(a, dtype=np.int64) % p
    rows, cols = a.shape
    piv: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        f = a[:, c].copy()
        f[r] = 0
        hit = np.nonzero(f)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(f[hit], a[r])) % p
        piv.append(c)
        r += 1
    return a[:r], piv


def fp_nullspace(a: np.ndarray, p: int) -> np.ndarray:
    """Rows spanning {x : x a = 0} over F_p."""
    a = np.asarray(a, dtype=np.int64) % p
    n, k = a.shape
    if k == 0:
        return np.eye(n, dtype=np.int64)
    h, piv = fp_rref(np.hstack([a, np.eye(n, dtype=np.int64)]), p)
    keep = [t for t, c in enumerate(piv) if c >= k]
    return h[keep, k:] % p


def fp_rank(a: np.ndarray, p: int) -> int:
    return len(fp_rref(a, p)[1])


def fp_coords(basis: np.ndarray, piv: List[int], v: np.ndarray, p: int) -> Optional[np.ndarray]:
    """Coordinates of v in an RREF basis, or None when v is outside the span."""
    v = np.asarray(v, dtype=np.int64) % p
    c = v[piv] % p
    if np.any((c @ basis - v) % p):
        return None
    return c


# --- finite-dimensional algebras over F_p ---------------------------------------


class FpAlgebra:
    """Associative F_p-algebra with structure constants mult[a, b] = b_a b_b."""

    def __init__(self, p: int, mult: np.ndarray, one: np.ndarray):
        self.p = p
        self.mult = np.asarray(mult, dtype=np.int64) % p
        self.one = np.asarray(one, dtype=np.int64) % p
        self.dim = self.mult.shape[0]
        if self.dim > MAX_ALGEBRA_DIM:
            raise OverflowError(f"algebra dimension {self.dim} exceeds {MAX_ALGEBRA_DIM}")

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("a,b,abc->c", x, y, self.mult) % self.p

    def mul_many(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Row-wise products X[s] * Y[s]."""
        left = self._left_many(X)
        return np.einsum("sb,sbc->sc", Y % self.p, left) % self.p

    def _left_many(self, X: np.ndarray) -> np.ndarray:
        """Stack of left multiplication matrices, one per row of X."""
        D = self.dim
        X = np.asarray(X, dtype=np.int64) % self.p
        return ((X @ self.mult.reshape(D, D * D)) % self.p).reshape(-1, D, D)

    def power(self, x: np.ndarray, e: int) -> np.ndarray:
        out = self.one.copy()
        base = np.asarray(x, dtype=np.int64) % self.p
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def left_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of y -> x y on row vectors."""
        return np.einsum("a,abc->bc", x, self.mult) % self.p

    def is_commutative(self) -> bool:
        return bool(np.all(self.mult == self.mult.transpose(1, 0, 2)))

    def ideal_product(self, U: np.ndarray, W: np.ndarray) -> np.ndarray:
        if U.shape[0] == 0 or W.shape[0] == 0:
            return np.zeros((0, self.dim), dtype=np.int64)
        left = self._left_many(U)
        prods = np.matmul(np.asarray(W, dtype=np.int64) % self.p, left).reshape(-1, self.dim) % self.p
        return fp_rref(prods, self.p)[0]

    def is_nilpotent_subspace(self, U: np.ndarray) -> bool:
        cur = fp_rref(U, self.p)[0]
        for _ in range(self.dim + 1):
            if cur.shape[0] == 0:
                return True
            cur = self.ideal_product(cur, U)
        return cur.shape[0] == 0

    def quotient(self, ideal_basis: np.ndarray) -> "FpAlgebra":
        """A / ideal, in the coordinates of the non-pivot standard vectors."""
        p = self.p
        h, piv = fp_rref(ideal_basis, p)
        comp = [k for k in range(self.dim) if k not in set(piv)]

        def proj(v):
            v = np.asarray(v, dtype=np.int64) % p
            if len(piv):
                v = (v - v[..., piv] @ h) % p
            return v[..., comp]

        d = len(comp)
        E = np.eye(self.dim, dtype=np.int64)[comp]
        mult = np.zeros((d, d, d), dtype=np.int64)
        for a in range(d):
            mult[a] = proj(self.mul_many(np.repeat(E[a][None], d, axis=0), E))
        return FpAlgebra(p, mult, proj(self.one))

    def frobenius_fixed_dim(self) -> int:
        """dim ker(x -> x^p - x); only meaningful for commutative algebras."""
        p = self.p
        F = np.array([self.power(e, p) for e in np.eye(self.dim, dtype=np.int64)]).reshape(self.dim, self.dim)
        return self.dim - fp_rank((F - np.eye(self.dim, dtype=np.int64)) % p, p)


def _trace_power_digit(L: np.ndarray, p: int, i: int) -> int:
    """(Tr(L^(p^i)) / p^i) mod p for an integer lift of L."""
    mod = p ** (i + 1)
    X = np.asarray(L, dtype=np.int64) % mod
    for _ in range(i):
        Y = np.eye(X.shape[0], dtype=np.int64)
        for _ in range(p):
            Y = (Y @ X) % mod
        X = Y
    tr = int(np.trace(X)) % mod
    if tr % p**i:
        raise ArithmeticError("trace congruence failed; algebra is inconsistent")
    return (tr // p**i) % p


def radical(A: FpAlgebra) -> np.ndarray:
    """RREF basis of the Jacobson radical.

    Trace chain over the left regular representation: I_(-1) = A and
    I_k = {x in I_(k-1) : g_k(x y) = 0 for all y}, g_k(z) = Tr(L_z^(p^k))/p^k
    mod p.  g_k is additive on I_(k-1), so it is tabulated on a basis of
    I_(k-1) and extended linearly.  rad(A) = I_l with p^l <= dim A.
    """
    p, D = A.p, A.dim
    if D == 0:
        return np.zeros((0, 0), dtype=np.int64)
    Ik = np.eye(D, dtype=np.int64)
    k = 0
    while True:
        basis, piv = fp_rref(Ik, p)
        if basis.shape[0] == 0 or A.is_nilpotent_subspace(basis):
            return basis
        if p**k > D:
            break
        g = np.array([_trace_power_digit(A.left_matrix(x), p, k) for x in basis], dtype=np.int64)
        nb = basis.shape[0]
        # G[s, j] = g_k(x_s b_j) via coordinates of x_s b_j in I_(k-1)
        G = np.zeros((nb, D), dtype=np.int64)
        for s in range(nb):
            prods = np.einsum("a,abc->bc", basis[s], A.mult) % p  # row j: x_s b_j
            coords = prods[:, piv] % p
            G[s] = coords @ g % p
        c = fp_nullspace(G, p)
        Ik = (c @ basis) % p if c.shape[0] else np.zeros((0, D), dtype=np.int64)
        k += 1
    raise ArithmeticError("radical chain ended on a non-nilpotent ideal")


def radical_bruteforce(A: FpAlgebra) -> np.ndarray:
    """rad A = {x : A x A nilpotent}, by enumerating every x (p^dim small)."""
    p, D = A.p, A.dim
    if p**D > BRUTE_FORCE_LIMIT:
        raise OverflowError("algebra too large for enumeration")
    members = []
    for coeffs in np.ndindex(*([p] * D)):
        x = np.array(coeffs, dtype=np.int64)
        if not np.any(x):
            continue
        left = np.einsum("b,abk->ak", x, A.mult) % p  # row a: b_a x
        both = np.einsum("ak,kcl->acl", left, A.mult).reshape(-1, D) % p  # b_a x b_c
        if A.is_nilpotent_subspace(both):
            members.append(x)
    if not members:
        return np.zeros((0, D), dtype=np.int64)
    return fp_rref(np.array(members), p)[0]


def idempotents_bruteforce(A: FpAlgebra) -> np.ndarray:
    """All idempotents of A by enumeration."""
    p, D = A.p, A.dim
    if p**D > BRUTE_FORCE_LIMIT:
        raise OverflowError("algebra too large for enumeration")
    X = np.array(list(np.ndindex(*([p] * D))), dtype=np.int64).reshape(-1, D)
    sq = A.mul_many(X, X)
    return X[np.all(sq == X, axis=1)]


# --- End(M) ------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalityReport:
    is_local: bool
    radical_dim: int
    residue_field_degree: Optional[int]
    algebra_dim: int

    def to_json(self) -> dict:
        return {
            "is_local": self.is_local,
            "radical_dim": self.radical_dim,
            "residue_field_degree": self.residue_field_degree,
            "algebra_dim": self.algebra_dim,
        }


class EndAlgebra:
    """End(M) as a Z/p^m-lattice with the induced F_p-algebra End/p End."""

    def __init__(self, module: ConcreteModule, generators: Optional[List[np.ndarray]] = None):
        M = module
        self.module = M
        p, m, q = M.p, M.m, M.q
        r = M.rank
        gens = hom_space(M, M) if generators is None else list(generators)
        for h in gens:
            if not is_homomorphism(M, M, h):
                raise ValueError("generator is not an endomorphism")
        self._colscale = np.tile(M.scale, r)
        if gens:
            flat = np.array([(np.asarray(h) % M.moduli * M.scale % q).reshape(-1) for h in gens])
        else:
            flat = np.zeros((1, r * r), dtype=np.int64)
        exps, V, Vinv = smith_cols(flat, p, m)
        kept = [k for k, e in enumerate(exps) if e < m]
        self._exps = np.array([exps[k] for k in kept], dtype=np.int64)
        self._V = V.astype(np.int64)
        self._kept = kept
        self._rest = [k for k in range(len(exps)) if exps[k] == m]
        lattice = np.array([(p ** exps[k]) * Vinv[k] % q for k in kept], dtype=np.int64).reshape(-1, r * r)
        self.basis = [(row // self._colscale).reshape(r, r) for row in lattice]
        D = len(self.basis)
        if D:
            Bs = np.array(self.basis)
            prods = np.einsum("aij,bjk->abik", Bs, Bs) % q
            mult = self.coords(prods.reshape(D * D, r, r)).reshape(D, D, D)
        else:
            mult = np.zeros((0, 0, 0), dtype=np.int64)
        one = self.coords(np.eye(r, dtype=np.int64)[None])[0] if D else np.zeros(0, dtype=np.int64)
        self.algebra = FpAlgebra(p, mult, one)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def lattice_coords(self, H: np.ndarray) -> np.ndarray:
        """Exact coordinates (mod p^(m - exps)) of endomorphisms in the basis."""
        M = self.module
        q = M.q
        H = np.asarray(H, dtype=np.int64).reshape(-1, M.rank, M.rank) % M.moduli
        flat = (H * M.scale % q).reshape(H.shape[0], -1)
        w = flat @ self._V % q
        if self._rest and np.any(w[:, self._rest]):
            raise ValueError("matrix is not in the span of End(M)")
        w = w[:, self._kept]
        pe = M.p**self._exps
        if np.any(w % pe):
            raise ValueError("matrix is not in the span of End(M)")
        return w // pe

    def coords(self, H: np.ndarray) -> np.ndarray:
        """Coordinates in End/p End."""
        return self.lattice_coords(H) % self.module.p

    def lift(self, c: np.ndarray) -> np.ndarray:
        """An endomorphism whose class in End/p End is c."""
        M = self.module
        c = np.asarray(c, dtype=np.int64)
        if self.dim == 0:
            return np.zeros((M.rank, M.rank), dtype=np.int64)
        return np.tensordot(c, np.array(self.basis), axes=(0, 0)) % M.q % M.moduli


def end_ring(M: ConcreteModule) -> EndAlgebra:
    return EndAlgebra(M)


def locality(E: EndAlgebra) -> LocalityReport:
    A = E.algebra
    rad = radical(A)
    B = A.quotient(rad)
    local = B.dim > 0 and B.is_commutative() and B.frobenius_fixed_dim() == 1
    return LocalityReport(local, rad.shape[0], B.dim if local else None, A.dim)


is_local = locality


def is_indecomposable(M: ConcreteModule) -> Tuple[bool, LocalityReport]:
    if M.order_exponent() == 0:
        raise ValueError("the zero module is neither decomposable nor indecomposable")
    rep = locality(end_ring(M))
    return rep.is_local, rep


# --- decomposition certificates ---------------------------------------------------


@dataclass
class DecompositionCertificate:
    module: ConcreteModule
    idempotent: np.ndarray
    image: Submodule
    complement: Submodule

    def verify(self) -> bool:
        M = self.module
        e = np.asarray(self.idempotent, dtype=np.int64) % M.moduli
        if not is_homomorphism(M, M, e):
            return False
        if not np.all(M.reduce_rows(e @ e) == e):
            return False
        I = M.reduce_rows(np.eye(M.rank, dtype=np.int64))
        if not np.any(e) or np.all(e == I):
            return False
        if not (self.image & self.complement).is_zero():
            return False
        return self.image.order_exponent() + self.complement.order_exponent() == M.order_exponent()

    def summands(self) -> Tuple[ConcreteModule, ConcreteModule]:
        return self.image.as_module()[0], self.complement.as_module()[0]

    def to_json(self) -> dict:
        M = self.module
        return {
            "idempotent": np.asarray(self.idempotent).tolist(),
            "image_order_exponent": self.image.order_exponent(),
            "complement_order_exponent": self.complement.order_exponent(),
            "image_basis": self.image.coordinate_vectors().tolist(),
            "complement_basis": self.complement.coordinate_vectors().tolist(),
            "divisors": list(M.divisors),
        }


def certificate_from_idempotent(M: ConcreteModule, e: np.ndarray) -> DecompositionCertificate:
    e = np.asarray(e, dtype=np.int64) % M.moduli
    f = M.reduce_rows(np.eye(M.rank, dtype=np.int64) - e)
    img = Submodule(M, M.to_lattice(e), check=False)
    comp = Submodule(M, M.to_lattice(f), check=False)
    return DecompositionCertificate(M, e, img, comp)


def _projection_onto(M: ConcreteModule, K: Submodule, I: Submodule) -> Optional[np.ndarray]:
    """Idempotent with image I and kernel K, given M = K (+) I."""
    from .linalg import Solver

    stack = np.vstack([K.basis, I.basis])
    solver = Solver(stack, M.p, M.m)
    rows = []
    nk = K.basis.shape[0]
    for j in range(M.rank):
        target = M.to_lattice(np.eye(M.rank, dtype=np.int64)[j])
        x = solver.solve(target)
        if x is None:
            return None
        rows.append(M.from_lattice((x[nk:] @ I.basis) % M.q))
    return M.reduce_rows(np.array(rows, dtype=np.int64))


def fitting_split(M: ConcreteModule, phi: np.ndarray) -> Optional[DecompositionCertificate]:
    """M = ker(phi^N) (+) im(phi^N); None when the split is trivial."""
    r = M.rank
    phi = np.asarray(phi, dtype=np.int64) % M.moduli
    N = max(r, 1)

    def power(e):
        out = M.reduce_rows(np.eye(r, dtype=np.int64))
        b = phi
        while e:
            if e & 1:
                out = M.reduce_rows(out @ b)
            b = M.reduce_rows(b @ b)
            e >>= 1
        return out

    PN = power(N)
    K = module_kernel(M, PN, M.divisors)
    while True:
        P2 = M.reduce_rows(PN @ PN)
        K2 = module_kernel(M, P2, M.divisors)
        if K2 == K:
            break
        PN, K = P2, K2
    if K.is_zero() or K.order_exponent() == M.order_exponent():
        return None
    I = Submodule(M, M.to_lattice(PN), check=False)
    e = _projection_onto(M, K, I)
    if e is None:
        return None
    cert = certificate_from_idempotent(M, e)
    return cert if cert.verify() else None


def _poly_eval(A: FpAlgebra, coeffs: List[int], x: np.ndarray) -> np.ndarray:
    """Horner evaluation of a polynomial (highest degree first) at x."""
    out = np.zeros(A.dim, dtype=np.int64)
    for c in coeffs:
        out = (A.mul(out, x) + int(c) * A.one) % A.p
    return out


def _min_poly(A: FpAlgebra, x: np.ndarray) -> List[int]:
    """Minimal polynomial of x over F_p, highest degree first."""
    p = A.p
    powers = [A.one % p]
    while True:
        cur = A.mul(powers[-1], x)
        rows = np.array(powers, dtype=np.int64)
        h, piv = fp_rref(rows, p)
        if fp_coords(h, piv, cur, p) is not None:
            # cur = sum c_k x^k; solve via nullspace of [powers; cur]
            ns = fp_nullspace(np.vstack([rows, cur[None]]), p)
            v = ns[np.nonzero(ns[:, -1])[0][0]]
            v = v * pow(int(v[-1]), -1, p) % p
            return [int(c) for c in v[::-1]]
        powers.append(cur)


def _lift_idempotent(A: FpAlgebra, e: np.ndarray) -> np.ndarray:
    for _ in range(64):
        sq = A.mul(e, e)
        if np.all(sq == e):
            return e
        e = (3 * sq - 2 * A.mul(sq, e)) % A.p
    raise ArithmeticError("idempotent lifting did not converge")


def _lift_to_end(M: ConcreteModule, E: np.ndarray) -> np.ndarray:
    for _ in range(64):
        sq = M.reduce_rows(E @ E)
        if np.all(sq == E):
            return E
        E = M.reduce_rows(3 * sq - 2 * (sq @ E))
    raise ArithmeticError("idempotent lifting did not converge")


def _idempotent_from_element(End: EndAlgebra, rad: np.ndarray, B: FpAlgebra, comp_of_quot, x: np.ndarray):
    """Split x in B along coprime factors of its minimal polynomial."""
    p = B.p
    f = _min_poly(B, x)
    _, factors = gf_factor(f, p, ZZ)
    if len(factors) < 2:
        return None
    g = gf_pow(factors[0][0], factors[0][1], p, ZZ)
    h = [1]
    for fac, k in factors[1:]:
        h = gf_mul(h, gf_pow(fac, k, p, ZZ), p, ZZ)
    s, t, _ = gf_gcdex(g, h, p, ZZ)
    poly = gf_mul(t, h, p, ZZ)  # 1 mod g, 0 mod h
    poly = gf_rem(poly, f, p, ZZ)
    eB = _poly_eval(B, poly, x)
    eA = np.zeros(End.dim, dtype=np.int64)
    eA[comp_of_quot] = eB
    eA = _lift_idempotent(End.algebra, eA)
    return _lift_to_end(End.module, End.lift(eA))


def find_decomposition(
    M: ConcreteModule,
    seed: int = DEFAULT_SEED,
    budget: int = DEFAULT_BUDGET,
    end: Optional[EndAlgebra] = None,
) -> Optional[DecompositionCertificate]:
    """Nontrivial idempotent of End(M), or None when the budget runs out."""
    rng = random.Random(seed)
    E = end if end is not None else end_ring(M)
    if E.dim == 0:
        return None
    tried = 0
    for b in E.basis:
        if tried >= budget:
            return None
        tried += 1
        cert = fitting_split(M, b)
        if cert is not None:
            return cert
    A = E.algebra
    rad = radical(A)
    _, piv = fp_rref(rad, A.p)
    comp = [k for k in range(A.dim) if k not in set(piv)]
    B = A.quotient(rad)
    while tried < budget:
        tried += 1
        c = np.array([rng.randrange(M.q) for _ in range(E.dim)], dtype=np.int64)
        phi = M.reduce_rows(np.tensordot(c, np.array(E.basis), axes=(0, 0)) % M.q)
        cert = fitting_split(M, phi)
        if cert is not None:
            return cert
        if B.dim > 1:
            xb = np.array([rng.randrange(A.p) for _ in range(B.dim)], dtype=np.int64)
            e = _idempotent_from_element(E, rad, B, comp, xb)
            if e is not None:
                cert = certificate_from_idempotent(M, e)
                if cert.verify():
                    return cert
    return None


class BudgetExhausted(RuntimeError):
    pass


def full_decomposition(M: ConcreteModule, seed: int = DEFAULT_SEED, budget: int = DEFAULT_BUDGET) -> List[ConcreteModule]:
    """Indecomposable summands of M (Krull-Schmidt), recursively."""
    if M.order_exponent() == 0:
        return []
    E = end_ring(M)
    if locality(E).is_local:
        return [M]
    cert = find_decomposition(M, seed=seed, budget=budget, end=E)
    if cert is None:
        raise BudgetExhausted("no idempotent found within budget")
    left, right = cert.summands()
    rng = random.Random(seed)
    return full_decomposition(left, rng.randrange(2**31), budget) + full_decomposition(
        right, rng.randrange(2**31), budget
    )


def summand_signatures(modules: List[ConcreteModule]) -> Counter:
    return Counter(iso_signature(S).as_tuple() for S in modules)
