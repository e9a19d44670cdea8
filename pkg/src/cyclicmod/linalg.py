"""Exact linear algebra over Z/p^m.

Row-vector convention throughout: a matrix acts on the right of row vectors
and submodules of (Z/p^m)^k are row spans.  Canonical spans use the Howell
normal form: echelon, pivots equal to powers of p, entries above each pivot
reduced below it, and saturated so that p^(m-e) times a pivot row of
exponent e lies in the span of the rows beneath it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .residue import RingCtx


def _dtype(q: int):
    # products of two reduced entries must not overflow int64
    return np.int64 if q < 2**31 else object


def as_array(rows, q: int, ncols: Optional[int] = None) -> np.ndarray:
    a = np.array(rows, dtype=_dtype(q))
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else np.zeros((0, ncols or 0), dtype=_dtype(q))
    if a.size == 0 and ncols is not None:
        a = a.reshape(a.shape[0], ncols)
    return a % q


def as_rows(a, ncols: int) -> np.ndarray:
    """Reshape to (k, ncols) int64, also when ncols == 0."""
    arr = np.asarray(a, dtype=np.int64)
    if ncols == 0:
        k = arr.shape[0] if arr.ndim > 1 else (1 if arr.ndim == 1 and arr.size else 0)
        return np.zeros((k, 0), dtype=np.int64)
    return arr.reshape(-1, ncols)


def valuations(col: np.ndarray, p: int, m: int) -> np.ndarray:
    """Elementwise p-adic valuation; zero entries get m."""
    out = np.full(col.shape, m, dtype=np.int64)
    pk = 1
    for k in range(m):
        pk_next = pk * p
        hit = (col % pk == 0) & (col % pk_next != 0)
        out[hit] = k
        pk = pk_next
    return out


@dataclass(frozen=True, eq=False)
class MatrixZpm:
    ctx: RingCtx
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2:
            raise ValueError("MatrixZpm needs a 2-D array")
        object.__setattr__(self, "entries", a.astype(_dtype(self.ctx.q)) % self.ctx.q)

    @classmethod
    def from_rows(cls, ctx: RingCtx, rows, ncols: Optional[int] = None) -> "MatrixZpm":
        return cls(ctx, as_array(rows, ctx.q, ncols))

    @classmethod
    def identity(cls, ctx: RingCtx, n: int) -> "MatrixZpm":
        return cls(ctx, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __matmul__(self, other: "MatrixZpm") -> "MatrixZpm":
        return MatrixZpm(self.ctx, self.entries @ other.entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatrixZpm)
            and self.entries.shape == other.entries.shape
            and bool(np.all(self.entries == other.entries))
        )

    def tolist(self) -> List[List[int]]:
        return [[int(x) for x in row] for row in self.entries]


@dataclass(frozen=True, eq=False)
class HowellForm:
    matrix: MatrixZpm
    pivots: Tuple[Tuple[int, int, int], ...]  # (row, col, exponent)

    @property
    def ctx(self) -> RingCtx:
        return self.matrix.ctx

    def order_exponent(self) -> int:
        """log_p of the number of elements in the span."""
        m = self.ctx.m
        return sum(m - e for _, _, e in self.pivots)

    def __eq__(self, other) -> bool:
        return isinstance(other, HowellForm) and span_equal(self, other)

    def __hash__(self):
        return hash((self.matrix.cols, tuple(map(tuple, self.matrix.tolist()))))


def howell_array(a: np.ndarray, p: int, m: int) -> Tuple[np.ndarray, List[Tuple[int, int]]]:
    """Howell form of the row span of ``a``.  Returns (rows, [(col, exp)])."""
    q = p**m
    dt = _dtype(q)
    ncols = a.shape[1]
    pool = np.asarray(a, dtype=dt) % q
    pool = pool[np.any(pool != 0, axis=1)]
    out_rows = []
    piv = []
    for c in range(ncols):
        if pool.shape[0] == 0:
            break
        col = pool[:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        vals = valuations(col[nz], p, m)
        k = int(nz[int(np.argmin(vals))])
        e = int(vals.min())
        pe = p**e
        row = pool[k].copy()
        unit = int(row[c]) // pe
        row = (row * pow(unit, -1, q)) % q
        pool = np.delete(pool, k, axis=0)
        if pool.shape[0]:
            f = pool[:, c] // pe
            pool = (pool - np.outer(f, row).astype(dt)) % q
        if e > 0:
            sat = (row * p ** (m - e)) % q
            if np.any(sat != 0):
                pool = np.vstack([pool, sat[None, :]])
        pool = pool[np.any(pool != 0, axis=1)]
        out_rows.append(row)
        piv.append((c, e))
    if not out_rows:
        return np.zeros((0, ncols), dtype=dt), []
    h = np.array(out_rows, dtype=dt)
    for k, (c, e) in enumerate(piv):
        pe = p**e
        if k:
            f = h[:k, c] // pe
            if np.any(f != 0):
                h[:k] = (h[:k] - np.outer(f, h[k]).astype(dt)) % q
    return h, piv


def howell(A: MatrixZpm) -> HowellForm:
    ctx = A.ctx
    h, piv = howell_array(A.entries, ctx.p, ctx.m)
    return HowellForm(
        MatrixZpm(ctx, h.reshape(len(piv), A.cols)),
        tuple((r, c, e) for r, (c, e) in enumerate(piv)),
    )


def reduce_vector(h: np.ndarray, piv: Sequence[Tuple[int, int]], v: np.ndarray, p: int, m: int):
    """Reduce v against a Howell basis; returns (remainder, coefficients)."""
    q = p**m
    v = np.array(v, dtype=h.dtype if h.size else _dtype(q)) % q
    coeffs = np.zeros(len(piv), dtype=v.dtype)
    for k, (c, e) in enumerate(piv):
        x = int(v[c])
        if x == 0:
            continue
        f = x // p**e
        if f:
            coeffs[k] = f
            v = (v - f * h[k]) % q
    return v, coeffs


def span_member(H: HowellForm, v) -> bool:
    ctx = H.ctx
    piv = [(c, e) for _, c, e in H.pivots]
    rem, _ = reduce_vector(H.matrix.entries, piv, np.asarray(v), ctx.p, ctx.m)
    return not np.any(rem != 0)


def span_equal(H1: HowellForm, H2: HowellForm) -> bool:
    if H1.matrix.cols != H2.matrix.cols:
        raise ValueError("shape mismatch")
    if H1.ctx.p != H2.ctx.p or H1.ctx.m != H2.ctx.m:
        raise ValueError("ring mismatch")
    return H1.matrix.entries.shape == H2.matrix.entries.shape and bool(
        np.all(H1.matrix.entries == H2.matrix.entries)
    )


def kernel_array(a: np.ndarray, p: int, m: int) -> np.ndarray:
    """Rows generating the left kernel {x : x a = 0} (Howell-canonical)."""
    q = p**m
    n, k = a.shape
    aug = np.hstack([np.asarray(a, dtype=_dtype(q)) % q, np.eye(n, dtype=_dtype(q))])
    h, piv = howell_array(aug, p, m)
    rows = [h[r, k:] for r, (c, _) in enumerate(piv) if c >= k]
    if not rows:
        return np.zeros((0, n), dtype=_dtype(q))
    hk, _ = howell_array(np.array(rows), p, m)
    return hk


def kernel(A: MatrixZpm) -> MatrixZpm:
    ctx = A.ctx
    return MatrixZpm(ctx, kernel_array(A.entries, ctx.p, ctx.m).reshape(-1, A.rows))


class Solver:
    """Reusable solver for x a = b with a fixed coefficient matrix."""

    def __init__(self, a: np.ndarray, p: int, m: int):
        self.p, self.m, self.q = p, m, p**m
        a = np.asarray(a, dtype=_dtype(self.q)) % self.q
        self.n, self.k = a.shape
        aug = np.hstack([a, np.eye(self.n, dtype=a.dtype)])
        h, piv = howell_array(aug, p, m)
        keep = [r for r, (c, _) in enumerate(piv) if c < self.k]
        self.h = h[keep]
        self.piv = [piv[r] for r in keep]

    def solve(self, b) -> Optional[np.ndarray]:
        b = np.asarray(b) % self.q
        w = np.concatenate([b, np.zeros(self.n, dtype=b.dtype)]).astype(self.h.dtype if self.h.size else _dtype(self.q))
        rem, _ = reduce_vector(self.h, self.piv, w, self.p, self.m)
        if np.any(rem[: self.k] != 0):
            return None
        return (-rem[self.k :]) % self.q


def solve(A: MatrixZpm, b) -> Optional[np.ndarray]:
    """Some x with x A = b, or None when b is outside the row span of A."""
    ctx = A.ctx
    x = Solver(A.entries, ctx.p, ctx.m).solve(np.asarray(b))
    return x


def intersect_array(l1: np.ndarray, l2: np.ndarray, p: int, m: int) -> np.ndarray:
    """Howell basis of rowspan(l1) ∩ rowspan(l2)."""
    q = p**m
    dt = _dtype(q)
    ncols = l1.shape[1] if l1.ndim == 2 else l2.shape[1]
    if l1.shape[0] == 0 or l2.shape[0] == 0:
        return np.zeros((0, ncols), dtype=dt)
    stacked = np.vstack([np.asarray(l1, dtype=dt), (-np.asarray(l2, dtype=dt)) % q])
    ker = kernel_array(stacked, p, m)
    if ker.shape[0] == 0:
        return np.zeros((0, ncols), dtype=dt)
    inter = (ker[:, : l1.shape[0]] @ np.asarray(l1, dtype=dt)) % q
    h, _ = howell_array(inter, p, m)
    return h


def smith_cols(a: np.ndarray, p: int, m: int):
    """Column-transformed diagonalisation of a row span.

    Returns (exps, V, Vinv) with V invertible, such that rowspan(a) V is the
    row span of diag(p^exps[0], ..., p^exps[k-1]) padded with zeros; columns
    beyond the rank get exponent m.
    """
    q = p**m
    dt = _dtype(q)
    a = np.array(a, dtype=dt) % q
    nr, nc = a.shape
    V = np.eye(nc, dtype=dt)
    Vinv = np.eye(nc, dtype=dt)
    exps = []
    k = 0
    while k < min(nr, nc):
        sub = a[k:, k:]
        nzr, nzc = np.nonzero(sub)
        if nzr.size == 0:
            break
        vals = valuations(sub[nzr, nzc], p, m)
        t = int(np.argmin(vals))
        e = int(vals[t])
        r, c = k + int(nzr[t]), k + int(nzc[t])
        if r != k:
            a[[k, r]] = a[[r, k]]
        if c != k:
            a[:, [k, c]] = a[:, [c, k]]
            V[:, [k, c]] = V[:, [c, k]]
            Vinv[[k, c]] = Vinv[[c, k]]
        pe = p**e
        unit = int(a[k, k]) // pe
        a[k] = (a[k] * pow(unit, -1, q)) % q
        # clear the pivot column below
        f = a[k + 1 :, k] // pe
        if np.any(f != 0):
            a[k + 1 :] = (a[k + 1 :] - np.outer(f, a[k]).astype(dt)) % q
        # clear the pivot row to the right with column operations
        g = a[k, k + 1 :] // pe
        if np.any(g != 0):
            a[:, k + 1 :] = (a[:, k + 1 :] - np.outer(a[:, k], g).astype(dt)) % q
            V[:, k + 1 :] = (V[:, k + 1 :] - np.outer(V[:, k], g).astype(dt)) % q
            Vinv[k] = (Vinv[k] + g @ Vinv[k + 1 :]) % q
        exps.append(e)
        k += 1
    exps += [m] * (nc - len(exps))
    return exps, V, Vinv
