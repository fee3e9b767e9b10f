"""Dense matrices over F_q stored as integer numpy arrays.

Most helpers accept either a single (n, n) matrix or a batch (..., n, n).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..core import BudgetError, DomainError, FormError, inv

INT = np.int64


@lru_cache(maxsize=None)
def _J(n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=INT)
    m[np.arange(n), n - 1 - np.arange(n)] = 1
    m.setflags(write=False)
    return m


def J(n: int) -> np.ndarray:
    """The antidiagonal all-ones matrix; J_1 = 1 and J_n = (0 J_{n-1}; 1 0)."""
    return _J(n).copy()


def ident(n: int) -> np.ndarray:
    return np.eye(n, dtype=INT)


def as_mat(a, q: int) -> np.ndarray:
    return np.asarray(a, dtype=INT) % q


def mmul(*mats, q: int) -> np.ndarray:
    """Product of matrices (or broadcastable batches) mod q."""
    out = np.asarray(mats[0], dtype=INT) % q
    for m in mats[1:]:
        out = np.matmul(out, np.asarray(m, dtype=INT)) % q
    return out


def blockdiag(*blocks) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b, dtype=INT)) for b in blocks if np.size(b) > 0]
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=INT)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def block_matrix(rows: list[list], row_sizes: list[int], col_sizes: list[int]) -> np.ndarray:
    """Assemble a matrix from blocks; None (or 0) entries are zero blocks."""
    out = np.zeros((sum(row_sizes), sum(col_sizes)), dtype=INT)
    r0 = 0
    for bi, rs in enumerate(row_sizes):
        c0 = 0
        for bj, cs in enumerate(col_sizes):
            blk = rows[bi][bj]
            if blk is not None and rs and cs:
                out[r0:r0 + rs, c0:c0 + cs] = np.asarray(blk, dtype=INT).reshape(rs, cs)
            c0 += cs
        r0 += rs
    return out


def rref(a: np.ndarray, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod q and the pivot columns."""
    m = np.array(a, dtype=INT) % q
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if len(nz) == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = (m[r] * inv(int(m[r, c]), q)) % q
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % q
        pivots.append(c)
        r += 1
    return m, pivots


def mrank(a: np.ndarray, q: int) -> int:
    return len(rref(a, q)[1])


def minv(a: np.ndarray, q: int) -> np.ndarray:
    """Inverse of a single matrix mod q (Gauss-Jordan)."""
    a = np.asarray(a, dtype=INT) % q
    n = a.shape[0]
    aug = np.concatenate([a, ident(n)], axis=1)
    red, piv = rref(aug, q)
    if piv[:n] != list(range(n)):
        raise DomainError("matrix is singular mod q")
    return red[:, n:]


def mdet(a: np.ndarray, q: int) -> np.ndarray | int:
    """Determinant mod q; batched via exact small-integer float arithmetic."""
    a = np.asarray(a, dtype=INT) % q
    n = a.shape[-1]
    if n > 8:  # float determinants stop being exact; eliminate mod q instead
        flat = a.reshape(-1, n, n)
        d = np.array([_det_exact(m, q) for m in flat], dtype=INT).reshape(a.shape[:-2])
    else:
        d = np.rint(np.linalg.det(a.astype(np.float64))).astype(INT) % q
    return int(d) if d.ndim == 0 else d


def _det_exact(m: np.ndarray, q: int) -> int:
    m = m.copy()
    n = m.shape[0]
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r, c]), None)
        if piv is None:
            return 0
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
            det = -det
        det = det * int(m[c, c]) % q
        m[c + 1:] = (m[c + 1:] - np.outer(m[c + 1:, c] * inv(int(m[c, c]), q), m[c])) % q
    return det % q


def batch_inv(a: np.ndarray, q: int) -> np.ndarray:
    """Inverses of a batch of invertible matrices mod q via the adjugate."""
    a = np.asarray(a, dtype=INT) % q
    if a.ndim == 2:
        return minv(a, q)
    n = a.shape[-1]
    af = a.astype(np.float64)
    det = np.linalg.det(af)
    adj = np.rint(np.linalg.inv(af) * det[:, None, None]).astype(INT)
    d = np.rint(det).astype(INT) % q
    if np.any(d == 0):
        raise DomainError("singular matrix in batch")
    dinv = np.array([0] + [inv(x, q) for x in range(1, q)], dtype=INT)
    out = (adj % q) * dinv[d][:, None, None] % q
    check = np.matmul(a, out) % q
    bad = np.nonzero(~np.all(check == ident(n), axis=(1, 2)))[0]
    for i in bad:  # float adjugate not exact; fall back
        out[i] = minv(a[i], q)
    return out


def msolve(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Unique solution x of a x = b mod q; raises if none or not unique."""
    a = np.asarray(a, dtype=INT) % q
    b = np.asarray(b, dtype=INT).reshape(-1, 1) % q
    k = a.shape[1]
    red, piv = rref(np.concatenate([a, b], axis=1), q)
    if k in piv:
        raise DomainError("inconsistent linear system mod q")
    if len(piv) != k:
        raise DomainError("linear system mod q has no unique solution")
    return red[:k, k].copy()


def star(a: np.ndarray, q: int) -> np.ndarray:
    """a* = J ^t a^{-1} J."""
    n = a.shape[-1]
    return mmul(J(n), minv(a, q).T, J(n), q=q)


def orth_inv(g: np.ndarray, q: int) -> np.ndarray:
    """Inverse of an element (or batch) preserving J: g^{-1} = J ^t g J."""
    n = g.shape[-1]
    return mmul(J(n), np.swapaxes(g, -1, -2), J(n), q=q)


def preserves_form(g: np.ndarray, q: int) -> np.ndarray | bool:
    n = g.shape[-1]
    lhs = mmul(np.swapaxes(g, -1, -2), J(n), g, q=q)
    res = np.all(lhs == J(n), axis=(-1, -2))
    return bool(res) if np.ndim(res) == 0 else res


def check_orthogonal(g: np.ndarray, q: int, what: str = "element") -> np.ndarray:
    g = as_mat(g, q)
    if not preserves_form(g, q) or mdet(g, q) != 1:
        raise FormError(f"{what} is not in SO_{g.shape[0]}(F_{q})")
    return g


# ------------------------------------------------------------------ encodings


def key_dtype_ok(n: int, q: int) -> bool:
    return q ** (n * n) < 2**63


def keys(mats: np.ndarray, q: int) -> np.ndarray:
    """Integer keys of matrices; numeric order equals row-major lexicographic order."""
    mats = np.asarray(mats, dtype=INT)
    n = mats.shape[-1]
    if not key_dtype_ok(n, q):
        raise BudgetError(f"{n}x{n} matrices over F_{q} do not fit a 64-bit key")
    flat = mats.reshape(mats.shape[:-2] + (n * n,))
    powers = q ** np.arange(n * n - 1, -1, -1, dtype=INT)
    return flat @ powers


def decode(ks: np.ndarray, n: int, q: int) -> np.ndarray:
    ks = np.asarray(ks, dtype=INT)
    digits = np.empty(ks.shape + (n * n,), dtype=INT)
    rest = ks.copy()
    for i in range(n * n - 1, -1, -1):
        digits[..., i] = rest % q
        rest //= q
    return digits.reshape(ks.shape + (n, n))
