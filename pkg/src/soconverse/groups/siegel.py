"""Siegel parabolic Q_n = L_n V_n of SO_{2n+1}: cell classification without
enumerating the group, and the coset space Q_n \\ SO_{2n+1}.

Blocks are (n, 1, n). g lies in Q_n iff its blocks (2,1) and (3,1) vanish;
g lies in Q_n w_n V_n iff its (3,1) block is invertible. The coset Q_n g is
determined by the row space of the bottom n rows of g.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..core import ConsistencyError, DomainError, FormError
from .elements import l_n, w_n
from .kinds import SO_odd, chevalley_generators
from .matrices import INT, check_orthogonal, ident, keys, minv, mmul, mrank, orth_inv, rref
from .parabolic import unipotent_exp


@dataclass(frozen=True)
class QPart:
    a: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class OpenCell:
    a: np.ndarray
    v1: np.ndarray
    v2: np.ndarray


@dataclass(frozen=True)
class Other:
    pass


def _blocks(g, n):
    s = [slice(0, n), slice(n, n + 1), slice(n + 1, 2 * n + 1)]
    return [[g[r, c] for c in s] for r in s]


def _v_from_block12(x: np.ndarray, n: int, q: int) -> np.ndarray:
    """The element of V_n with block (1,2) = x and zero Lie (1,3) part."""
    m = 2 * n + 1
    X = np.zeros((m, m), dtype=INT)
    X[:n, n] = x
    # partner entries X[n, j'] = -X[j, n]
    X[n, n + 1:] = (-x[::-1]) % q
    return unipotent_exp(X, q)


def siegel_decompose(n: int, g: np.ndarray, q: int, check: bool = True):
    g = np.asarray(g, dtype=INT) % q
    if g.shape != (2 * n + 1, 2 * n + 1):
        raise DomainError("argument is not a (2n+1)-square matrix")
    if check:
        check_orthogonal(g, q, "siegel_decompose argument")
    b = _blocks(g, n)
    if not b[1][0].any() and not b[2][0].any():
        a = b[0][0]
        v = mmul(l_n(minv(a, q), q), g, q=q)
        return QPart(a=a, v=v)
    if mrank(b[2][0], q) < n:
        return Other()
    x = mmul(-minv(b[2][0], q), b[2][1], q=q).ravel()
    vx = _v_from_block12(x, n, q)
    h = mmul(g, vx, q=q)
    hb = _blocks(h, n)
    z = mmul(-minv(hb[2][0], q), hb[2][2], q=q)
    vz = ident(2 * n + 1)
    vz[:n, n + 1:] = z
    wn = w_n(n, q)
    p = mmul(h, vz, wn, q=q)
    pb = _blocks(p, n)
    if pb[1][0].any() or pb[2][0].any():
        raise ConsistencyError("open-cell reduction did not land in Q_n")
    a = pb[0][0]
    v1 = mmul(l_n(minv(a, q), q), p, q=q)
    v2 = orth_inv(mmul(vx, vz, q=q), q)
    if check:
        check_orthogonal(v2, q, "V_n factor")
        if not np.array_equal(mmul(l_n(a, q), v1, wn, v2, q=q), g):
            raise ConsistencyError("open-cell decomposition does not reproduce g")
    return OpenCell(a=a, v1=v1, v2=v2)


def in_open_cell(n: int, g: np.ndarray, q: int) -> np.ndarray:
    """Batched test for Q_n w_n V_n: the (3,1) block is invertible."""
    g = np.asarray(g, dtype=INT) % q
    blk = g[..., n + 1:, :n].astype(np.float64)
    d = np.rint(np.linalg.det(blk)).astype(INT) % q
    return d != 0


def in_Q(n: int, g: np.ndarray) -> np.ndarray:
    g = np.asarray(g)
    return ~np.any(g[..., n:, :n] != 0, axis=(-1, -2))


# ------------------------------------------------------------------ cosets


def batched_rref(a: np.ndarray, q: int) -> np.ndarray:
    """Reduced row echelon forms of a batch (B, r, c) over F_q."""
    m = np.array(a, dtype=INT) % q
    B, r, c = m.shape
    invt = np.array([0] + [pow(x, q - 2, q) for x in range(1, q)], dtype=INT)
    row = np.zeros(B, dtype=INT)
    ar = np.arange(B)
    for col in range(c):
        active = row < r
        if not active.any():
            break
        cand = (m[:, :, col] != 0) & (np.arange(r)[None, :] >= row[:, None])
        has = cand.any(axis=1) & active
        if not has.any():
            continue
        p = np.argmax(cand, axis=1)
        idx = ar[has]
        rr, pp = row[has], p[has]
        tmp = m[idx, rr].copy()
        m[idx, rr] = m[idx, pp]
        m[idx, pp] = tmp
        m[idx, rr] = m[idx, rr] * invt[m[idx, rr, col]][:, None] % q
        f = m[idx, :, col].copy()
        f[np.arange(len(idx)), rr] = 0
        m[idx] = (m[idx] - f[:, :, None] * m[idx, rr][:, None, :]) % q
        row[has] += 1
    return m


class SiegelCosets:
    """The finite set Q_n \\ SO_{2n+1}, reached by BFS over row spaces."""

    def __init__(self, n: int, q: int):
        self.n, self.q = n, q
        self.m = 2 * n + 1
        gens = chevalley_generators(SO_odd(n), q)
        start = ident(self.m)
        key0 = self._key(start[None])[0]
        reps = {key0: start}
        order = [key0]
        todo = deque([start])
        while todo:
            g = todo.popleft()
            prods = np.array([mmul(g, s, q=q) for s in gens])
            for k, h in zip(self._key(prods), prods):
                if k not in reps:
                    reps[k] = h
                    order.append(k)
                    todo.append(h)
        order.sort()
        self.keys = np.array(order, dtype=INT)
        self.reps = np.array([reps[k] for k in order])
        self.reps_inv = orth_inv(self.reps, q)
        self.identity = int(np.searchsorted(self.keys, key0))

    def __len__(self):
        return len(self.keys)

    def _key(self, g: np.ndarray) -> np.ndarray:
        bottom = np.asarray(g)[..., self.n + 1:, :]
        return keys_rect(batched_rref(bottom.reshape(-1, self.n, self.m), self.q), self.q)

    def locate(self, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coset index and Levi part a with g = l_n(a) v rep for each g in the batch."""
        g = np.asarray(g, dtype=INT) % self.q
        flat = g.reshape(-1, self.m, self.m)
        k = self._key(flat)
        pos = np.searchsorted(self.keys, k)
        pos = np.minimum(pos, len(self.keys) - 1)
        if np.any(self.keys[pos] != k):
            raise FormError("element outside SO_{2n+1}")
        qpart = np.matmul(flat, self.reps_inv[pos]) % self.q
        a = qpart[:, :self.n, :self.n]
        return pos.reshape(g.shape[:-2]), a.reshape(g.shape[:-2] + (self.n, self.n))

    @cached_property
    def levi_check(self) -> bool:
        _, a = self.locate(self.reps)
        return bool(np.all(a == ident(self.n)))


def keys_rect(m: np.ndarray, q: int) -> np.ndarray:
    flat = m.reshape(m.shape[0], -1).astype(INT)
    powers = q ** np.arange(flat.shape[1] - 1, -1, -1, dtype=INT)
    return flat @ powers
