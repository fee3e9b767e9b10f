"""Parabolic data: the Siegel unipotent V_n of SO_{2n+1}, the groups
R^{l,n} and N^{l-n} of SO_{2l}, and the character psi' on N^{l-n}.

Unipotent groups are produced from their Lie algebras with exp(X) = I + X + X^2/2,
which is a bijection here because X^3 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..core import DomainError, frac
from .kinds import SO_odd, root_vector
from .matrices import INT, ident


def unipotent_exp(X: np.ndarray, q: int) -> np.ndarray:
    X = np.asarray(X, dtype=INT) % q
    X2 = np.matmul(X, X) % q
    n = X.shape[-1]
    return (ident(n) + X + frac(1, 2, q) * X2) % q


def v_lie_basis(n: int) -> list[np.ndarray]:
    """Root vectors spanning Lie(V_n): roots e_i and e_i + e_j."""
    kind = SO_odd(n)
    out = []
    for i in range(n):
        a = [0] * n
        a[i] = 1
        out.append(root_vector(kind, a))
    for i in range(n):
        for j in range(i + 1, n):
            a = [0] * n
            a[i] = a[j] = 1
            out.append(root_vector(kind, a))
    return out


def v_element(n: int, x, q: int, y=None) -> np.ndarray:
    """exp of the Lie element with first-row-block column x (and optional e_i+e_j part y)."""
    basis = v_lie_basis(n)
    coeffs = list(x) + list(y if y is not None else [0] * (len(basis) - n))
    X = sum(int(c) * b for c, b in zip(coeffs, basis))
    return unipotent_exp(X, q)


def enumerate_V(n: int, q: int) -> np.ndarray:
    """All of V_n, size q^{n(n+1)/2}, as a batch of (2n+1)-square matrices."""
    basis = np.array(v_lie_basis(n))
    k = len(basis)
    coeffs = np.array(list(product(range(q), repeat=k)), dtype=INT).reshape(-1, k)
    X = np.tensordot(coeffs, basis, axes=1) % q
    return unipotent_exp(X, q)


def enumerate_R(l: int, n: int, q: int) -> np.ndarray:
    """R^{l,n}: identity plus x in block (2,1) and its partner x' in block (5,4)."""
    if not 1 <= n < l:
        raise DomainError("R^{l,n} needs 1 <= n < l")
    k = l - n - 1
    m = 2 * l
    if k == 0:
        return ident(m)[None]
    gens = []
    for i in range(k):
        for j in range(n):
            X = np.zeros((m, m), dtype=INT)
            r, c = n + i, j
            X[r, c] = 1
            X[m - 1 - c, m - 1 - r] = -1
            gens.append(X)
    gens = np.array(gens)
    coeffs = np.array(list(product(range(q), repeat=len(gens))), dtype=INT)
    return (ident(m) + np.tensordot(coeffs, gens, axes=1)) % q


def n_radical_mask(l: int, n: int) -> np.ndarray:
    """Boolean mask of entries that may be nonzero above the diagonal in N^{l-n}."""
    k = l - n - 1
    m = 2 * l
    mask = np.zeros((m, m), dtype=bool)
    mask[:k, :] = True
    mask[:, m - k:] = True
    mask &= np.triu(np.ones((m, m), dtype=bool), 1)
    # the GL_k block is upper unitriangular and its partner u1* likewise
    return mask


def psi_prime_coeffs(l: int, n: int, q: int) -> np.ndarray:
    """Coefficient matrix C with psi'(v) = psi(sum C * v); zero when n = l-1."""
    if not 1 <= n < l:
        raise DomainError("psi' needs 1 <= n < l")
    k = l - n - 1
    C = np.zeros((2 * l, 2 * l), dtype=INT)
    if k == 0:
        return C
    for i in range(k - 1):
        C[i, i + 1] = 1
    C[k - 1, l - 1] = frac(1, 4, q)
    C[k - 1, l] = frac(-1, 2, q)
    return C


def so_even_psi_coeffs(l: int, q: int) -> np.ndarray:
    """Coefficients of the generic character of U_SO_{2l}."""
    C = np.zeros((2 * l, 2 * l), dtype=INT)
    for i in range(l - 2):
        C[i, i + 1] = 1
    C[l - 2, l - 1] = frac(1, 4, q)
    C[l - 2, l] = frac(-1, 2, q)
    return C


def gl_psi_coeffs(n: int, q: int, sign: int = 1) -> np.ndarray:
    C = np.zeros((n, n), dtype=INT)
    for i in range(n - 1):
        C[i, i + 1] = sign % q
    return C


@dataclass(frozen=True)
class ParabolicPack:
    l: int
    n: int
    q: int
    V: np.ndarray  # in SO_{2n+1}
    R: np.ndarray  # in SO_{2l}, trivial when n >= l-1 or n = l
    N_mask: np.ndarray | None
    psi_prime: np.ndarray | None


def parabolic_pack(l: int, n: int, q: int) -> ParabolicPack:
    if not 1 <= n <= l:
        raise DomainError(f"n = {n} out of range for l = {l}")
    V = enumerate_V(n, q)
    if n == l:
        return ParabolicPack(l, n, q, V, ident(2 * l)[None], None, None)
    return ParabolicPack(
        l, n, q, V, enumerate_R(l, n, q), n_radical_mask(l, n), psi_prime_coeffs(l, n, q)
    )
