"""Named matrices: the outer element c, torus twists, Weyl representatives,
Levi embeddings of GL_n and the two conjugating matrices of the embeddings.

Functions returning 0/1 Weyl representatives do not depend on q; the others
take q and return entries reduced mod q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import DomainError, frac
from .matrices import INT, J, block_matrix, blockdiag, check_orthogonal, ident, star


def _check_l(l: int, least: int = 2) -> None:
    if l < least:
        raise DomainError(f"need l >= {least}, got {l}")


def _check_n(l: int, n: int, top: int) -> None:
    if not 1 <= n <= top:
        raise DomainError(f"n = {n} out of range [1, {top}] for l = {l}")


# ------------------------------------------------------------- Levi pieces


def l_n(a: np.ndarray, q: int) -> np.ndarray:
    """diag(a, 1, a*) in SO_{2n+1}."""
    a = np.asarray(a, dtype=INT) % q
    return blockdiag(a, [[1]], star(a, q))


def t_n(x: np.ndarray, l: int, q: int) -> np.ndarray:
    """diag(x, I_{2l-2n}, x*) in SO_{2l}."""
    x = np.asarray(x, dtype=INT) % q
    n = x.shape[0]
    _check_n(l, n, l)
    return blockdiag(x, ident(2 * l - 2 * n), star(x, q))


def q_n(a: np.ndarray, l: int, q: int) -> np.ndarray:
    """Image of l_n(a) under SO_{2n+1} -> SO_{2l}: diag(I, a, I_2, a*, I)."""
    a = np.asarray(a, dtype=INT) % q
    n = a.shape[0]
    _check_n(l, n, l - 1)
    k = l - n - 1
    return blockdiag(ident(k), a, ident(2), star(a, q), ident(k))


def d_n(n: int, q: int) -> np.ndarray:
    """diag(-1, 1, -1, ..., (-1)^n) in GL_n."""
    return np.diag([(-1) ** i % q for i in range(1, n + 1)]).astype(INT)


# ------------------------------------------------------------ fixed elements


def c_elem(l: int) -> np.ndarray:
    """The permutation swapping coordinates l and l+1; normalizes SO_{2l}."""
    _check_l(l, 1)
    return blockdiag(ident(l - 1), J(2), ident(l - 1))


def t_tilde(l: int, q: int) -> np.ndarray:
    """diag(I_{l-1}, -1/2, -2, I_{l-1})."""
    _check_l(l)
    mid = [frac(-1, 2, q), (-2) % q]
    return blockdiag(ident(l - 1), np.diag(mid), ident(l - 1))


def w_ll(l: int, q: int) -> np.ndarray:
    """diag(I_l / 2, 1, 2 I_l) in SO_{2l+1}."""
    half = frac(1, 2, q)
    return np.diag([half] * l + [1] + [2] * l).astype(INT) % q


def w_n(n: int, q: int) -> np.ndarray:
    """The long Siegel Weyl element (0 0 I_n; 0 (-1)^n 0; I_n 0 0) of SO_{2n+1}."""
    if n < 1:
        raise DomainError("n must be positive")
    mid = [[(-1) ** n % q]]
    return block_matrix(
        [[None, None, ident(n)], [None, mid, None], [ident(n), None, None]],
        [n, 1, n],
        [n, 1, n],
    )


def w_ln(l: int, n: int) -> np.ndarray:
    """The block permutation moving the GL_n block of the embedded SO_{2n+1} to the corner."""
    _check_n(l, n, l - 1)
    k = l - n - 1
    I_n, I_k = ident(n), ident(k)
    return block_matrix(
        [
            [None, I_n, None, None, None],
            [I_k, None, None, None, None],
            [None, None, ident(2), None, None],
            [None, None, None, None, I_k],
            [None, None, None, I_n, None],
        ],
        [n, k, 2, k, n],
        [k, n, 2, n, k],
    )


def w_hat(l: int, n: int) -> np.ndarray:
    """Image of w_n in SO_{2l} up to the torus factor t'_n."""
    _check_n(l, n, l - 1)
    k = l - n - 1
    mid = J(2) if n % 2 else ident(2)
    I_n, I_k = ident(n), ident(k)
    return block_matrix(
        [
            [I_k, None, None, None, None],
            [None, None, None, I_n, None],
            [None, None, mid, None, None],
            [None, I_n, None, None, None],
            [None, None, None, None, I_k],
        ],
        [k, n, 2, n, k],
        [k, n, 2, n, k],
    )


def t_prime(l: int, n: int, q: int) -> np.ndarray:
    """t~ when n is odd, the identity when n is even."""
    return t_tilde(l, q) if n % 2 else ident(2 * l)


def w_tilde(l: int, n: int) -> np.ndarray:
    """(0 0 0 0 I_n; 0 I 0 0 0; 0 0 X 0 0; 0 0 0 I 0; I_n 0 0 0 0), X = J_2 for n odd."""
    _check_n(l, n, l - 1)
    k = l - n - 1
    mid = J(2) if n % 2 else ident(2)
    I_n, I_k = ident(n), ident(k)
    return block_matrix(
        [
            [None, None, None, None, I_n],
            [None, I_k, None, None, None],
            [None, None, mid, None, None],
            [None, None, None, I_k, None],
            [I_n, None, None, None, None],
        ],
        [n, k, 2, k, n],
        [n, k, 2, k, n],
    )


def w_tilde_prime_top(l: int) -> np.ndarray:
    """The GL_l-type representative before the parity twist by c."""
    _check_l(l)
    if l % 2 == 0:
        return block_matrix([[None, ident(l)], [ident(l), None]], [l, l], [l, l])
    m = l - 1
    return block_matrix(
        [
            [None, None, ident(m), None],
            [[[1]], None, None, None],
            [None, None, None, [[1]]],
            [None, ident(m), None, None],
        ],
        [m, 1, 1, m],
        [1, m, m, 1],
    )


def w_tilde_top(l: int) -> np.ndarray:
    """The representative whose simple-root set omits alpha_l."""
    w = w_tilde_prime_top(l)
    if l % 2:
        c = c_elem(l)
        w = c @ w @ c
    return w


def w_tilde_top_c(l: int) -> np.ndarray:
    c = c_elem(l)
    return c @ w_tilde_top(l) @ c


def w_long(l: int) -> np.ndarray:
    _check_l(l)
    if l % 2 == 0:
        return J(2 * l)
    m = l - 1
    return block_matrix(
        [[None, None, J(m)], [None, ident(2), None], [J(m), None, None]],
        [m, 2, m],
        [m, 2, m],
    )


# ----------------------------------------------------------------- embeddings


def embed_low_matrix(n: int, q: int) -> np.ndarray:
    """diag(I_n, (2 -1; 1 1/2), I_n), size 2n+2."""
    mid = np.array([[2, -1], [1, frac(1, 2, q)]], dtype=INT) % q
    return blockdiag(ident(n), mid, ident(n))


def M_tilde(q: int) -> np.ndarray:
    h, f = frac(1, 2, q), frac(1, 4, q)
    return np.array([[f, h, -h], [h, 0, 1], [-h, 1, 1]], dtype=INT) % q


def embed_top_matrix(l: int, q: int) -> np.ndarray:
    """diag(I_{l-1}, M~, I_{l-1}), size 2l+1."""
    return blockdiag(ident(l - 1), M_tilde(q), ident(l - 1))


def A_rational() -> list[list[Fraction]]:
    """Middle 3x3 block of the image of J_2 under SO_{2l} -> SO_{2l+1}."""
    F = Fraction
    return [
        [F(-1, 8), F(3, 4), F(9, 4)],
        [F(-3, 8), F(5, 4), F(3, 4)],
        [F(9, 16), F(-3, 8), F(-1, 8)],
    ]


def fraction_matmul(a, b):
    n, m, k = len(a), len(b), len(b[0])
    return [[sum((a[i][t] * b[t][j] for t in range(m)), Fraction(0)) for j in range(k)] for i in range(n)]


def fraction_mod(a, q: int) -> np.ndarray:
    """Reduce a rational matrix with denominators prime to q."""
    return np.array(
        [[x.numerator * pow(x.denominator, -1, q) % q for x in row] for row in a], dtype=INT
    )


# ------------------------------------------------------------------- bundle


@dataclass(frozen=True)
class SpecialElements:
    """All named elements for a given (l, q); built and membership-checked at once."""

    l: int
    q: int
    c: np.ndarray
    t_tilde: np.ndarray
    w_ll: np.ndarray
    w_long: np.ndarray
    w_tilde_prime_top: np.ndarray
    w_tilde_top: np.ndarray
    w_tilde_top_c: np.ndarray
    w_n: dict
    d_n: dict
    w_ln: dict
    w_hat: dict
    t_prime: dict
    w_tilde: dict


def special_elements(l: int, q: int) -> SpecialElements:
    _check_l(l)
    low = range(1, l)
    se = SpecialElements(
        l=l,
        q=q,
        c=c_elem(l),
        t_tilde=t_tilde(l, q),
        w_ll=w_ll(l, q),
        w_long=w_long(l),
        w_tilde_prime_top=w_tilde_prime_top(l),
        w_tilde_top=w_tilde_top(l),
        w_tilde_top_c=w_tilde_top_c(l),
        w_n={n: w_n(n, q) for n in range(1, l + 1)},
        d_n={n: d_n(n, q) for n in range(1, l + 1)},
        w_ln={n: w_ln(l, n) for n in low},
        w_hat={n: w_hat(l, n) for n in low},
        t_prime={n: t_prime(l, n, q) for n in low},
        w_tilde={n: w_tilde(l, n) for n in low},
    )
    members = [se.t_tilde, se.w_long, se.w_tilde_prime_top, se.w_tilde_top, se.w_tilde_top_c]
    members += [*se.w_ln.values(), *se.w_hat.values(), *se.w_tilde.values()]
    for g in members:
        check_orthogonal(g, q)
    check_orthogonal(se.w_ll, q, "w_{l,l}")
    for g in se.w_n.values():
        check_orthogonal(g, q, "w_n")
    return se
