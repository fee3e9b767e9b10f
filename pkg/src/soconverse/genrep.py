"""Generic representations through the Gelfand-Graev module Ind_U^G psi.

A vector of the module is a function f on G with f(ug) = psi(u) f(g), stored by
its values on the canonical coset representatives x_i of U \\ G. Right
translation is monomial: if x_i g = u x_j then (rho(g) f)(x_i) = psi(u) f(x_j).

The module is split by a random self-adjoint operator from its commutant. Each
commutant operator is convolution with a bi-(U, psi)-equivariant function h,
whose matrix in the coset basis is K_ij = h(x_i x_j^{-1}). Because the module
is multiplicity free, a generic such K has one eigenvalue per irreducible
summand; clusters that still hold several summands are detected by the rank of
the psi-averaging projector on them and split again.
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .core import (
    DEFAULT_TOL,
    ConsistencyError,
    DegenerateSplitError,
    DomainError,
    NotGenericError,
    Tolerance,
    eigenspaces,
    rank,
    root_table,
)
from .groups.bruhat import bruhat_cell
from .groups.elements import c_elem, t_tilde
from .groups.finite import FiniteGroup
from .groups.kinds import positive_roots, root_element, simple_roots
from .groups.matrices import INT, ident, minv, mmul
from .groups.parabolic import gl_psi_coeffs, so_even_psi_coeffs

log = logging.getLogger(__name__)

DEFAULT_SEED = 0xC0FFEE
MAX_RETRIES = 8


# --------------------------------------------------------------- characters


@dataclass(frozen=True)
class CharacterFn:
    """u -> psi(sum C * u) for a coefficient matrix C over F_q."""

    coeffs: np.ndarray
    q: int
    label: str

    def exponent(self, mats) -> np.ndarray:
        m = np.asarray(mats, dtype=INT)
        return np.tensordot(m, self.coeffs, axes=([-2, -1], [0, 1])) % self.q

    def __call__(self, mats):
        return root_table(self.q)[self.exponent(mats)]

    def inverse(self) -> "CharacterFn":
        return CharacterFn((-self.coeffs) % self.q, self.q, self.label + "^-1")


def generic_character(G: FiniteGroup, inverse: bool = False) -> CharacterFn:
    kind, q = G.kind, G.q
    if kind.name == "SO_even":
        chi = CharacterFn(so_even_psi_coeffs(kind.rank, q), q, "psi_SO")
    elif kind.name == "GL":
        chi = CharacterFn(gl_psi_coeffs(kind.rank, q), q, "psi_GL")
    else:
        raise DomainError("generic characters are only needed for SO_even and GL")
    return chi.inverse() if inverse else chi


def conjugated_character(chi: CharacterFn, l: int) -> CharacterFn:
    """psi_c(u) = psi(c u c)."""
    c = c_elem(l)
    return CharacterFn(c @ chi.coeffs @ c, chi.q, chi.label + "_c")


# ------------------------------------------------------------------ module


class GGModule:
    """Ind_U^G psi in the basis of canonical coset representatives."""

    def __init__(self, G: FiniteGroup, psi: CharacterFn):
        self.G, self.psi, self.q = G, psi, G.q
        self.reps = G.coset_reps
        self.dim = len(self.reps)
        self.i0 = int(G.coset_of[G.identity])
        self.U = G.U
        self.zeta = root_table(self.q)

    @cached_property
    def u_exp(self) -> np.ndarray:
        """psi-exponent of the U-part of every group element (int8)."""
        out = np.empty(self.G.order, dtype=np.int8)
        uexp = self.psi.exponent(self.G.mats(self.U))
        out[:] = uexp[self.G.u_of]
        return out

    def locate(self, idx) -> tuple[np.ndarray, np.ndarray]:
        """(coset index, psi-exponent of the U-part) of group elements."""
        idx = np.asarray(idx)
        return self.G.coset_of[idx], self.u_exp[idx].astype(INT)

    def evaluate(self, f: np.ndarray, idx) -> np.ndarray:
        """Values of module vectors f (..., dim) at group elements."""
        c, e = self.locate(idx)
        return self.zeta[e] * f[..., c]

    def action(self, g_idx: int) -> tuple[np.ndarray, np.ndarray]:
        """rho(g): row i has psi^e[i] in column j[i]."""
        prod = self.G.mul(self.reps, g_idx)
        return self.locate(prod)

    def apply(self, g_idx: int, f: np.ndarray) -> np.ndarray:
        j, e = self.action(g_idx)
        return self.zeta[e][:, None] * f[j] if f.ndim == 2 else self.zeta[e] * f[j]

    def action_matrix(self, g_idx: int) -> np.ndarray:
        j, e = self.action(g_idx)
        m = np.zeros((self.dim, self.dim), dtype=complex)
        m[np.arange(self.dim), j] = self.zeta[e]
        return m

    @cached_property
    def psi_projector(self) -> np.ndarray:
        """rho(E_psi) with E_psi = |U|^{-1} sum psi(u)^{-1} u."""
        E = np.zeros((self.dim, self.dim), dtype=complex)
        uexp = self.psi.exponent(self.G.mats(self.U))
        for u, e in zip(self.U, uexp):
            E += self.zeta[(-e) % self.q] * self.action_matrix(u)
        return E / len(self.U)

    @cached_property
    def _hecke_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Coset index and phase exponent of x_i x_j^{-1} for all i, j."""
        inv = self.G.inverse[self.reps]
        cos = np.empty((self.dim, self.dim), dtype=INT)
        ph = np.empty((self.dim, self.dim), dtype=INT)
        for i, r in enumerate(self.reps):
            prod = self.G.mul(np.full(self.dim, r), inv)
            cos[i], ph[i] = self.locate(prod)
        return cos, ph

    def hecke_matrix(self, h: np.ndarray) -> np.ndarray:
        cos, ph = self._hecke_tables
        return self.zeta[ph] * h[cos]

    def bi_average(self, r: np.ndarray) -> np.ndarray:
        """Project a module vector onto the right-(U, psi)-equivariant ones."""
        return self.psi_projector @ r

    def adjoint(self, h: np.ndarray) -> np.ndarray:
        """h*(g) = conj h(g^{-1}) as a coset vector."""
        return np.conj(self.evaluate(h, self.G.inverse[self.reps]))

    def random_hermitian_hecke(self, rng: np.random.Generator) -> np.ndarray:
        r = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        h = self.bi_average(r)
        return self.hecke_matrix(h + self.adjoint(h))


# ------------------------------------------------------------ representations


@dataclass(eq=False)
class GenericRep:
    module: GGModule
    basis: np.ndarray  # orthonormal columns spanning the summand
    bessel: np.ndarray  # coset vector with bessel[i0] = 1
    index: int = -1
    partner: int | None = None
    cuspidal: bool | None = None
    fingerprint: str = field(default="")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def bessel_at(self, idx) -> np.ndarray:
        return self.module.evaluate(self.bessel, idx)

    def character(self, g_idx) -> complex:
        """Trace of rho(g) on the summand."""
        j, e = self.module.action(g_idx)
        P = self.projector
        return complex(np.sum(self.module.zeta[e] * P[j, np.arange(self.module.dim)]))

    def character_from_bessel(self, g_idx) -> complex:
        """dim / |U\\G| * sum_i B(x_i g x_i^{-1}): the matrix-coefficient route."""
        G = self.module.G
        reps = self.module.reps
        conj = G.mul(G.mul(reps, g_idx), G.inverse[reps])
        return complex(self.dim / self.module.dim * np.sum(self.bessel_at(conj)))

    def dim_from_bessel(self) -> float:
        """|G| / sum_g |B(g)|^2, from Schur orthogonality."""
        U = len(self.module.U)
        return self.module.G.order / (U * float(np.sum(np.abs(self.bessel) ** 2)))


def _fingerprint(b: np.ndarray) -> str:
    r = np.round(np.concatenate([b.real, b.imag]), 6) + 0.0
    return hashlib.sha1(r.tobytes()).hexdigest()[:10]


def gelfand_graev_decompose(
    module: GGModule, seed: int = DEFAULT_SEED, tol: Tolerance = DEFAULT_TOL
) -> list[GenericRep]:
    rng = np.random.default_rng(seed)
    E = module.psi_projector
    pending = [np.eye(module.dim, dtype=complex)]
    done: list[np.ndarray] = []
    for attempt in range(MAX_RETRIES):
        K = module.random_hermitian_hecke(rng)
        nxt = []
        for Q in pending:
            for _, sub in eigenspaces(Q.conj().T @ K @ Q, tol):
                V = Q @ sub
                k = rank(V.conj().T @ E @ V, tol)
                if k == 0:
                    raise NotGenericError("eigenspace without a Whittaker vector")
                (done if k == 1 else nxt).append(V)
        pending = nxt
        if not pending:
            break
        log.info("retrying split of %d clusters (attempt %d)", len(pending), attempt + 1)
    if pending:
        raise DegenerateSplitError("could not separate summands of the Gelfand-Graev module")
    reps = []
    for V in done:
        P = V @ V.conj().T
        v0 = P[:, module.i0]
        if abs(v0[module.i0]) < tol.eq_abs:
            raise NotGenericError("psi-average vanishes at the identity coset")
        b = v0 / v0[module.i0]
        reps.append(GenericRep(module=module, basis=V, bessel=b))
    if sum(r.dim for r in reps) != module.dim:
        raise ConsistencyError("summand dimensions do not add up")
    reps.sort(key=lambda r: (r.dim, tuple(np.round(r.bessel.real, 6)), tuple(np.round(r.bessel.imag, 6))))
    for k, r in enumerate(reps):
        r.index = k
        r.fingerprint = _fingerprint(r.bessel)
    return reps


def bessel_function(rep: GenericRep) -> np.ndarray:
    return rep.bessel


# ------------------------------------------------------------ derived data


def central_elements(G: FiniteGroup) -> list[int]:
    """Indices of the scalar matrices in G."""
    out = []
    for s in range(1, G.q):
        m = (s * ident(G.n)) % G.q
        if G.contains(m):
            out.append(int(G.index_of(m)))
    return out


def central_character(rep: GenericRep, z_idx: int) -> complex:
    G = rep.module.G
    if z_idx not in central_elements(G):
        raise DomainError("element is not central")
    return complex(rep.bessel_at(z_idx))


def simple_coefficients(kind, beta) -> np.ndarray:
    """Coordinates of a root in the basis of simple roots."""
    S = np.array(simple_roots(kind), dtype=float).T
    x, *_ = np.linalg.lstsq(S, np.array(beta, dtype=float), rcond=None)
    return np.rint(x).astype(int)


def subgroup_closure(G: FiniteGroup, gens: list[int]) -> np.ndarray:
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        prods = G.mul(np.repeat(frontier, len(gens)), np.tile(gens, len(frontier)))
        new = [int(p) for p in np.unique(prods) if int(p) not in seen]
        seen.update(new)
        frontier = new
    return np.array(sorted(seen))


def maximal_radicals(G: FiniteGroup) -> list[np.ndarray]:
    """Unipotent radicals of the maximal standard parabolics, as index arrays."""
    kind, q = G.kind, G.q
    pos = positive_roots(kind)
    out = []
    for k in range(len(simple_roots(kind))):
        roots = [b for b in pos if simple_coefficients(kind, b)[k] > 0]
        gens = [int(G.index_of(root_element(kind, q, b, 1))) for b in roots]
        out.append(subgroup_closure(G, gens))
    return out


def is_cuspidal(rep: GenericRep, radicals=None, tol: Tolerance = DEFAULT_TOL) -> bool:
    """No nonzero vector fixed by the radical of any maximal standard parabolic."""
    G = rep.module.G
    radicals = maximal_radicals(G) if radicals is None else radicals
    for N in radicals:
        fixed = sum(rep.character(int(n)) for n in N) / len(N)
        if abs(fixed) > tol.eq_abs * rep.dim:
            return False
    return True


def conjugate_bessel(rep: GenericRep) -> np.ndarray:
    """B(c t~^{-1} g t~ c) as a coset vector: the Bessel function of c.pi."""
    G = rep.module.G
    l, q = G.kind.rank, G.q
    c, t = c_elem(l), t_tilde(l, q)
    left = mmul(c, minv(t, q), q=q)
    right = mmul(t, c, q=q)
    mats = np.matmul(np.matmul(left, G.mats(rep.module.reps)), right) % q
    return rep.bessel_at(G.index_of(mats))


def conjugate_rep(rep: GenericRep, reps: list[GenericRep], tol: Tolerance = DEFAULT_TOL):
    bc = conjugate_bessel(rep)
    for other in reps:
        if other.dim == rep.dim and np.max(np.abs(other.bessel - bc)) < tol.eq_abs:
            return other, bc
    raise ConsistencyError("conjugate Bessel function matches no summand")


def rep_character(rep: GenericRep):
    return rep.character


def annotate(reps: list[GenericRep], tol: Tolerance = DEFAULT_TOL) -> None:
    """Fill cuspidality and (for SO_even) the conjugate partner of every summand."""
    if not reps:
        return
    G = reps[0].module.G
    radicals = maximal_radicals(G)
    for r in reps:
        r.cuspidal = is_cuspidal(r, radicals, tol)
        if G.kind.name == "SO_even":
            r.partner = conjugate_rep(r, reps, tol)[0].index


# ------------------------------------------------------------------ export


def export_bessel_csv(rep: GenericRep, path) -> Path:
    """Rows (element index, Bruhat pattern, re, im) over the coset representatives."""
    path = Path(path)
    G = rep.module.G
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element_index", "bruhat_w", "re", "im"])
        for i, g in enumerate(rep.module.reps):
            _, perm = bruhat_cell(G.kind, G.mats(int(g)), G.q)
            b = rep.bessel[i]
            w.writerow([int(g), "-".join(map(str, perm)), f"{b.real:.12g}", f"{b.imag:.12g}"])
    return path
