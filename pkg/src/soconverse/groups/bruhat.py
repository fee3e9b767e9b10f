"""Bruhat decomposition g = u1 t w u2 for GL_n and split SO_m.

The monomial part comes from elimination by upper unitriangular row and
column operations. Uniqueness is then enforced by taking u2 in
U ∩ w^{-1} U^- w, found by solving a linear system mod q. Because the
normalized decomposition in GL_m is unique, for orthogonal g it coincides with
the one inside SO_m, so u1 and u2 land in U_SO automatically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConsistencyError, inv
from .kinds import GroupKind
from .matrices import INT, ident, minv, mmul, msolve


@dataclass(frozen=True)
class Bruhat:
    u1: np.ndarray
    t: np.ndarray
    wdot: np.ndarray
    u2: np.ndarray
    perm: tuple[int, ...]  # column j of wdot is nonzero in row perm[j]

    def product(self, q: int) -> np.ndarray:
        return mmul(self.u1, self.t, self.wdot, self.u2, q=q)


def monomial_part(g: np.ndarray, q: int) -> np.ndarray:
    """The monomial m with g in U m U."""
    m = np.array(g, dtype=INT) % q
    n = m.shape[0]
    used = np.zeros(n, dtype=bool)
    for r in range(n - 1, -1, -1):
        nz = np.nonzero((m[r] != 0) & ~used)[0]
        c = int(nz[0])
        used[c] = True
        p = inv(int(m[r, c]), q)
        for j in range(c + 1, n):
            if m[r, j]:
                m[:, j] = (m[:, j] - m[r, j] * p * m[:, c]) % q
        for i in range(r):
            if m[i, c]:
                m[i] = (m[i] - m[i, c] * p * m[r]) % q
    return m


def weyl_rep(kind: GroupKind, perm, q: int) -> np.ndarray:
    """Canonical 0/1 representative of a permutation pattern.

    In SO_{2l} an admissible pattern's 0/1 matrix already has determinant 1.
    In SO_{2n+1} the middle entry carries the sign needed for determinant 1.
    """
    n = len(perm)
    w = np.zeros((n, n), dtype=INT)
    w[list(perm), np.arange(n)] = 1
    if kind.name == "SO_odd":
        sign = int(round(np.linalg.det(w.astype(float))))
        mid = kind.rank
        w[mid, mid] = sign % q
    return w


def bruhat_decompose(kind: GroupKind, g: np.ndarray, q: int) -> Bruhat:
    g = np.asarray(g, dtype=INT) % q
    n = g.shape[0]
    m = monomial_part(g, q)
    perm = tuple(int(np.nonzero(m[:, j])[0][0]) for j in range(n))
    wdot = weyl_rep(kind, perm, q)
    t = _torus_from(m, wdot, q)
    # unknown y in U ∩ m^{-1} U^- m, then Z = g y m^{-1} must be unitriangular
    inversions = [(r, s) for r in range(n) for s in range(r + 1, n) if perm[r] > perm[s]]
    minv_m = minv(m, q)
    base = mmul(g, minv_m, q=q)
    k = len(inversions)
    if k == 0:
        y = ident(n)
    else:
        rows, rhs = [], []
        basis = []
        for r, s in inversions:
            E = np.zeros((n, n), dtype=INT)
            E[r, s] = 1
            basis.append(mmul(g, E, minv_m, q=q))
        for i in range(n):
            for j in range(i + 1):
                rows.append([b[i, j] for b in basis])
                rhs.append(((1 if i == j else 0) - base[i, j]) % q)
        sol = msolve(np.array(rows, dtype=INT), np.array(rhs, dtype=INT), q)
        y = ident(n)
        for (r, s), v in zip(inversions, sol):
            y[r, s] = v
    u1 = mmul(g, y, minv_m, q=q)
    u2 = minv(y, q)
    out = Bruhat(u1=u1, t=t, wdot=wdot, u2=u2, perm=perm)
    if not np.array_equal(out.product(q), g) or not _unitri(u1) or not _unitri(u2):
        raise ConsistencyError("Bruhat decomposition failed to reproduce g")
    return out


def _torus_from(m: np.ndarray, wdot: np.ndarray, q: int) -> np.ndarray:
    t = mmul(m, minv(wdot, q), q=q)
    if np.count_nonzero(t - np.diag(np.diag(t))):
        raise ConsistencyError("monomial part is not torus times representative")
    return t


def _unitri(u: np.ndarray) -> bool:
    return bool(np.all(np.tril(u, -1) == 0) and np.all(np.diag(u) == 1))


def bruhat_cell(kind: GroupKind, g: np.ndarray, q: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Only the torus part and the permutation pattern (no normalization)."""
    m = monomial_part(g, q)
    n = m.shape[0]
    perm = tuple(int(np.nonzero(m[:, j])[0][0]) for j in range(n))
    return _torus_from(m, weyl_rep(kind, perm, q), q), perm
