"""The embeddings SO_{2n+1} -> SO_{2l} (n < l) and SO_{2l} -> SO_{2l+1}.

Both accept a single matrix or a batch (..., m, m) and skip form checks unless
`check=True`.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..core import DomainError, FormError, frac, inv
from .elements import embed_low_matrix, embed_top_matrix
from .matrices import INT, blockdiag, minv, preserves_form, mdet


def _insert_one(g: np.ndarray, pos: int) -> np.ndarray:
    """Insert a row and column at pos carrying a 1 on the diagonal."""
    m = g.shape[-1]
    idx = np.r_[0:pos, pos + 1:m + 1]
    out = np.zeros(g.shape[:-2] + (m + 1, m + 1), dtype=INT)
    out[..., idx[:, None], idx[None, :]] = g
    out[..., pos, pos] = 1
    return out


@lru_cache(maxsize=None)
def _low(n: int, q: int):
    M = embed_low_matrix(n, q)
    return minv(M, q), M


@lru_cache(maxsize=None)
def _top(l: int, q: int):
    M = embed_top_matrix(l, q)
    return minv(M, q), M


def _check(img: np.ndarray, q: int, what: str):
    if not np.all(preserves_form(img, q)) or not np.all(mdet(img, q) == 1):
        raise FormError(f"{what}: image fails the form or determinant check")


def embed_odd_in_even(l: int, n: int, g: np.ndarray, q: int, check: bool = False) -> np.ndarray:
    g = np.asarray(g, dtype=INT) % q
    if not 1 <= n < l:
        raise DomainError(f"need 1 <= n < l, got n={n}, l={l}")
    if g.shape[-1] != 2 * n + 1:
        raise DomainError("argument is not a (2n+1)-square matrix")
    if check:
        _check(g, q, "embedding argument")
    Minv, M = _low(n, q)
    inner = np.matmul(np.matmul(Minv, _insert_one(g, n)) % q, M) % q
    k = l - n - 1
    out = np.zeros(g.shape[:-2] + (2 * l, 2 * l), dtype=INT)
    idx = np.arange(2 * l)
    out[..., idx, idx] = 1
    out[..., k:k + 2 * n + 2, k:k + 2 * n + 2] = inner
    if check:
        _check(out, q, "SO_{2n+1} -> SO_{2l}")
    return out


def embed_even_in_odd(l: int, g: np.ndarray, q: int, check: bool = False) -> np.ndarray:
    g = np.asarray(g, dtype=INT) % q
    if g.shape[-1] != 2 * l:
        raise DomainError("argument is not a 2l-square matrix")
    if check:
        _check(g, q, "embedding argument")
    Minv, M = _top(l, q)
    out = np.matmul(np.matmul(Minv, _insert_one(g, l)) % q, M) % q
    if check:
        _check(out, q, "SO_{2l} -> SO_{2l+1}")
    return out


def torus_image_closed_form(l: int, ts, q: int) -> np.ndarray:
    """Closed-form image of diag(t_1..t_l, t_l^{-1}..t_1^{-1}) in SO_{2l+1}."""
    ts = [int(x) % q for x in ts]
    t = ts[-1]
    ti = inv(t, q)
    h, f = frac(1, 2, q), frac(1, 4, q)
    p, m = (t + ti) % q, (t - ti) % q
    mid = np.array(
        [
            [h + f * p, h * m, 2 * (h - f * p)],
            [f * m, h * p, -h * m],
            [h * (h - f * p), -f * m, h + f * p],
        ],
        dtype=INT,
    ) % q
    s = np.diag(ts[:-1]).astype(INT)
    s_star = np.diag([inv(x, q) for x in ts[-2::-1]]).astype(INT) if l > 1 else s
    return blockdiag(s, mid, s_star) % q
