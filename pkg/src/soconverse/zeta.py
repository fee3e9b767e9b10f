"""Sections of I(tau, psi^{-1}), the intertwining operator, the zeta sums
for n < l and n = l, gamma factors and numeric multiplicity-one checks.

A section f is stored by one vector per coset Q_n g of SO_{2n+1}: X[k] is the
Whittaker function b -> f(rep_k, b), written in the coset basis of the
Gelfand-Graev module of GL_n for psi^{-1}. If g = l_n(a) v rep_k then
f(g, b) = X[k](b a), so every value is recovered from the coset table.

Whittaker functions W on SO_{2l} are passed as full arrays indexed by the
canonical element order of the enumerated group.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .core import (
    DEFAULT_TOL,
    DegenerateZetaError,
    DomainError,
    NumericsError,
    ProportionalityError,
    Tolerance,
    frac,
    root_table,
)
from .genrep import (
    DEFAULT_SEED,
    GenericRep,
    GGModule,
    annotate,
    gelfand_graev_decompose,
    generic_character,
)
from .groups.bruhat import bruhat_cell
from .groups.elements import d_n, t_n, t_prime, w_ll, w_ln, w_n
from .groups.elements import w_tilde as w_tilde_matrix
from .groups.embed import embed_even_in_odd, embed_odd_in_even
from .groups.finite import FiniteGroup, enumerate_group
from .groups.kinds import GL, SO_odd
from .groups.matrices import INT, J, batch_inv, ident
from .groups.parabolic import enumerate_R, enumerate_V, n_radical_mask, psi_prime_coeffs
from .groups.siegel import SiegelCosets, in_open_cell
from .weyl import CellClass, WeylElement, bessel_support, classify_cell

log = logging.getLogger(__name__)

DEFAULT_PROBES = 5
LOOKUP_BUDGET = 5 * 10**7


def batch_star(a: np.ndarray, q: int) -> np.ndarray:
    """a* = J ^t a^{-1} J for a batch of invertible matrices."""
    n = a.shape[-1]
    Jn = J(n)
    return np.matmul(np.matmul(Jn, np.swapaxes(batch_inv(a, q), -1, -2)), Jn) % q


# ------------------------------------------------------------------ context


class TwistContext:
    """Everything about GL_n and Q_n \\ SO_{2n+1} that sections need."""

    def __init__(self, n: int, q: int, cache_dir=None):
        self.n, self.q = n, q
        self.GL = enumerate_group(GL(n), q, cache_dir=cache_dir)
        self.module = GGModule(self.GL, generic_character(self.GL, inverse=True))
        self.cosets = SiegelCosets(n, q)
        self.V = enumerate_V(n, q)
        self.zeta = root_table(q)

    @property
    def n_cosets(self) -> int:
        return len(self.cosets)

    def gl_index(self, a: np.ndarray) -> np.ndarray:
        return self.GL.index_of(a)

    def values(self, X: np.ndarray, k: np.ndarray, b_idx: np.ndarray) -> np.ndarray:
        """X[k](b) elementwise over broadcast arrays k and b_idx."""
        c, e = self.module.locate(b_idx)
        return self.zeta[e] * X[k, c]

    @cached_property
    def _intertwining_table(self) -> tuple[np.ndarray, np.ndarray]:
        """For every coset k and u in V_n: coset and Levi index of w_n u rep_k."""
        q = self.q
        wn = w_n(self.n, q)
        wu = np.matmul(wn, self.V) % q
        prods = np.matmul(wu[None, :], self.cosets.reps[:, None]) % q
        k, a = self.cosets.locate(prods)
        return k, self.gl_index(a)

    def intertwining_entries(self, r: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Module coset and phase of d_n y_j* a for the (coset, u) pairs (r, c)."""
        _, aa = self._intertwining_table
        a = self.GL.mats(aa[r, c])
        prod = np.matmul(self._dn_ystar[None], a[:, None]) % self.q
        return self.module.locate(self.gl_index(prod))

    @cached_property
    def intertwining_lookup(self) -> tuple[np.ndarray, np.ndarray] | None:
        """intertwining_entries for every pair, or None when the table is too large."""
        kk, _ = self._intertwining_table
        if kk.size * self.module.dim > LOOKUP_BUDGET:
            return None
        cc = np.empty(kk.shape + (self.module.dim,), dtype=np.int32)
        ee = np.empty(kk.shape + (self.module.dim,), dtype=np.int8)
        for k in range(kk.shape[0]):
            r = np.full(kk.shape[1], k)
            c, e = self.intertwining_entries(r, np.arange(kk.shape[1]))
            cc[k], ee[k] = c, e
        return cc, ee

    @cached_property
    def _dn_ystar(self) -> np.ndarray:
        """Matrices d_n y_j* for the GL coset representatives y_j."""
        y = self.GL.mats(self.module.reps)
        return np.matmul(d_n(self.n, self.q), batch_star(y, self.q)) % self.q


@lru_cache(maxsize=8)
def twist_context(n: int, q: int) -> TwistContext:
    return TwistContext(n, q)


def gl_generic_reps(n: int, q: int, seed: int = DEFAULT_SEED) -> tuple[TwistContext, list[GenericRep]]:
    """Every generic irreducible of GL_n(F_q) in its psi^{-1} Whittaker model."""
    ctx = twist_context(n, q)
    reps = gelfand_graev_decompose(ctx.module, seed=seed)
    annotate(reps)
    return ctx, reps


# ------------------------------------------------------------------ sections


@dataclass(frozen=True, eq=False)
class Section:
    l: int
    n: int
    ctx: TwistContext = field(repr=False)
    X: np.ndarray = field(repr=False)
    star: bool = False
    tau: GenericRep | None = field(default=None, repr=False)

    def __call__(self, g: np.ndarray, b_idx) -> np.ndarray:
        """f(g, b) for a batch of SO_{2n+1} matrices and GL_n element indices."""
        k, a = self.ctx.cosets.locate(g)
        ba = np.matmul(self.ctx.GL.mats(np.asarray(b_idx)), a) % self.ctx.q
        return self.ctx.values(self.X, k, self.ctx.gl_index(ba))

    def at_identity(self, g: np.ndarray) -> np.ndarray:
        """f(g, I_n)."""
        k, a = self.ctx.cosets.locate(g)
        return self.ctx.values(self.X, k, self.ctx.gl_index(a))

    @property
    def support(self) -> np.ndarray:
        """Indices of cosets Q_n rep_k on which the section is nonzero."""
        return np.nonzero(np.any(np.abs(self.X) > 1e-12, axis=1))[0]


def zero_section(ctx: TwistContext, l: int) -> Section:
    return Section(l, ctx.n, ctx, np.zeros((ctx.n_cosets, ctx.module.dim), dtype=complex))


def section_fv(tau: GenericRep, v: np.ndarray, l: int, n: int, ctx: TwistContext | None = None) -> Section:
    """f_v: supported on Q_n with f_v(l_n(a)u, b) = W_v(b a)."""
    if not 1 <= n <= l:
        raise DomainError(f"n = {n} out of range for l = {l}")
    ctx = ctx or twist_context(n, tau.module.q)
    if tau.module.G is not ctx.GL:
        raise DomainError("tau does not live on the context's GL_n")
    X = np.zeros((ctx.n_cosets, ctx.module.dim), dtype=complex)
    X[ctx.cosets.identity] = v
    return Section(l, n, ctx, X, tau=tau)


def random_section(tau: GenericRep, l: int, ctx: TwistContext, rng: np.random.Generator, terms: int = 2) -> Section:
    """Each coset value is a random combination of right translates of B_tau."""
    X = np.zeros((ctx.n_cosets, ctx.module.dim), dtype=complex)
    for k in range(ctx.n_cosets):
        for _ in range(terms):
            b = int(rng.integers(ctx.GL.order))
            c = rng.standard_normal() + 1j * rng.standard_normal()
            X[k] += c * ctx.module.apply(b, tau.bessel)
    return Section(l, ctx.n, ctx, X, tau=tau)


def intertwining_apply(f: Section) -> Section:
    """M f(h, b) = sum over u in V_n of f(w_n u h, d_n b*)."""
    ctx = f.ctx
    kk, _ = ctx._intertwining_table
    live = np.any(np.abs(f.X) > 0, axis=1)
    out = np.zeros_like(f.X)
    rows, cols = np.nonzero(live[kk])
    if len(rows) == 0:
        return replace(f, X=out, star=not f.star)
    table = ctx.intertwining_lookup
    if table is not None and len(rows) == kk.size:
        out = np.sum(ctx.zeta[table[1]] * f.X[kk[:, :, None], table[0]], axis=1)
        return replace(f, X=out, star=not f.star)
    step = max(1, (1 << 20) // ctx.module.dim)
    for lo in range(0, len(rows), step):
        r, c = rows[lo:lo + step], cols[lo:lo + step]
        if table is not None:
            cc, ee = table[0][r, c], table[1][r, c]
        else:
            cc, ee = ctx.intertwining_entries(r, c)
        vals = ctx.zeta[ee] * f.X[kk[r, c][:, None], cc]
        np.add.at(out, r, vals)
    return replace(f, X=out, star=not f.star)


def translate_section(f: Section, h: np.ndarray) -> Section:
    """(h . f)(g, b) = f(g h, b) for h in SO_{2n+1}."""
    ctx = f.ctx
    k, a = ctx.cosets.locate(np.matmul(ctx.cosets.reps, h) % ctx.q)
    ai = ctx.gl_index(a)
    X = np.stack([ctx.module.apply(int(ai[j]), f.X[k[j]]) for j in range(len(k))])
    return replace(f, X=X)


def translate_whittaker(W: np.ndarray, G: FiniteGroup, x: np.ndarray) -> np.ndarray:
    """(x . W)(g) = W(g x) on the full element array."""
    return W[G.mul(np.arange(G.order), int(G.index_of(x)))]


def whittaker(tau: GenericRep, v: np.ndarray, a: np.ndarray) -> np.ndarray:
    """W_v(a) for a batch of GL_n matrices."""
    return tau.module.evaluate(v, tau.module.G.index_of(a))


def whittaker_star(tau: GenericRep, v: np.ndarray, a: np.ndarray) -> np.ndarray:
    """W*_v(a) = W_v(d_n a*)."""
    q = tau.module.q
    n = a.shape[-1]
    return whittaker(tau, v, np.matmul(d_n(n, q), batch_star(a, q)) % q)


# ------------------------------------------------------------------ zeta sums


class ZetaKernel:
    """Precomputed index data turning Psi(W, f) into one weighted sum.

    For n < l each term is a pair (coset rep g of U \\ SO_{2n+1}, r in R^{l,n}),
    for n = l a coset rep x of U \\ SO_{2l}. Terms store the element index fed
    to W and the (coset, GL index) pair fed to f(., I_n).
    """

    def __init__(self, G: FiniteGroup, l: int, n: int, ctx: TwistContext,
                 odd: FiniteGroup | None = None, reps: np.ndarray | None = None):
        if G.kind.name != "SO_even" or G.kind.rank != l:
            raise DomainError("kernel needs the enumerated SO_{2l}")
        if not 1 <= n <= l or ctx.n != n:
            raise DomainError("context rank does not match n")
        self.G, self.l, self.n, self.ctx, self.q = G, l, n, ctx, G.q
        q = self.q
        if n == l:
            self.reps = G.coset_reps if reps is None else np.asarray(reps)
            x = G.mats(self.reps)
            self.w_idx = self.reps[:, None]
            g_odd = np.matmul(w_ll(l, q), embed_even_in_odd(l, x, q)) % q
        else:
            if odd is None:
                odd = enumerate_group(SO_odd(n), q)
            self.odd = odd
            self.reps = odd.coset_reps if reps is None else np.asarray(reps)
            g_odd = odd.mats(self.reps)
            w = w_ln(l, n)
            emb = embed_odd_in_even(l, n, g_odd, q)
            conj = np.matmul(np.matmul(w, emb), w.T) % q
            R = enumerate_R(l, n, q)
            self.w_idx = G.index_of(np.matmul(R[None], conj[:, None]) % q)
        k, a = ctx.cosets.locate(g_odd)
        self.f_coset = k
        self.f_b = ctx.gl_index(a)
        c, e = ctx.module.locate(self.f_b)
        self._fc, self._fphase = c, ctx.zeta[e]

    def __len__(self):
        return len(self.reps)

    def terms(self, W: np.ndarray, f: Section) -> np.ndarray:
        """Per coset rep contribution (sum over r already taken)."""
        if f.ctx is not self.ctx:
            raise DomainError("section built over a different context")
        w = W[self.w_idx].sum(axis=1)
        return w * self._fphase * f.X[self.f_coset, self._fc]

    def __call__(self, W: np.ndarray, f: Section) -> complex:
        return complex(np.sum(self.terms(W, f)))

    @cached_property
    def cells(self) -> tuple[list[WeylElement | None], np.ndarray]:
        """Bruhat Weyl part and torus coordinates of each coset rep (n = l only)."""
        if self.n != self.l:
            raise DomainError("cell data is only used for n = l")
        ws, ts = [], []
        for x in self.G.mats(self.reps):
            t, perm = bruhat_cell(self.G.kind, x, self.q)
            ws.append(WeylElement.from_matrix((np.asarray(perm)[None, :] == np.arange(len(perm))[:, None]).astype(INT)))
            ts.append(np.diag(t)[: self.l])
        return ws, np.array(ts, dtype=INT)


def zeta_low(W: np.ndarray, f: Section, kernel: ZetaKernel) -> complex:
    if kernel.n >= kernel.l:
        raise DomainError("zeta_low is for n < l")
    return kernel(W, f)


def zeta_top(W: np.ndarray, f: Section, kernel: ZetaKernel) -> complex:
    if kernel.n != kernel.l:
        raise DomainError("zeta_top is for n = l")
    return kernel(W, f)


def zeta(W: np.ndarray, f: Section, kernel: ZetaKernel) -> complex:
    return kernel(W, f)


def zeta_cells(W: np.ndarray, f: Section, kernel: ZetaKernel, cells, torus_predicate=None) -> complex:
    """The n = l integrand summed over coset reps whose Bruhat cell is in `cells`
    and whose torus coordinates (t_1..t_l) pass the predicate."""
    ws, ts = kernel.cells
    cells = set(cells)
    keep = np.array([
        w is not None and w in cells and (torus_predicate is None or bool(torus_predicate(t)))
        for w, t in zip(ws, ts)
    ], dtype=bool)
    if not keep.any():
        return 0j
    return complex(np.sum(kernel.terms(W, f)[keep]))


def cells_of_class(l: int, cls: CellClass) -> set[WeylElement]:
    return {w for w in bessel_support(l).elements if classify_cell(w) == cls}


def top_torus_excluded(l: int, q: int) -> tuple[int, int]:
    """The two values +-c_l removed from t_l: c_l = 1 (l odd) or 1/2 (l even)."""
    c = 1 if l % 2 else frac(1, 2, q)
    return c, (-c) % q


def embedded_open_cell_condition(l: int, q: int) -> int:
    """The single t_l for which embedded t w with w in B_{l-1} leaves Q_l w_l V_l."""
    return 1 if l % 2 else frac(-1, 2, q)


def top_torus_involution(l: int, q: int, t: int) -> int:
    """t_l -> 1/(4 t_l) for l even, t_l -> 1/t_l for l odd."""
    return pow(t, q - 2, q) if l % 2 else frac(1, 4 * t, q)


def open_cell_membership(l: int, q: int, t_coords: np.ndarray, w: WeylElement) -> np.ndarray:
    """Whether embedded t w lies in Q_l w_l V_l, for a batch of torus coordinates."""
    t_coords = np.asarray(t_coords, dtype=INT) % q
    inv = np.array([0] + [pow(x, q - 2, q) for x in range(1, q)], dtype=INT)
    full = np.concatenate([t_coords, inv[t_coords[:, ::-1]]], axis=1)
    tw = full[:, :, None] * w.matrix()[None] % q
    return in_open_cell(l, embed_even_in_odd(l, tw, q), q)


# ------------------------------------------------------------------ gamma


@dataclass(frozen=True)
class GammaRow:
    gamma: complex
    magnitude: float
    spread: float
    probes: int


@dataclass
class GammaTable:
    rows: dict[tuple[str, int, str], GammaRow] = field(default_factory=dict)

    def add(self, pi_id: str, n: int, tau_id: str, row: GammaRow) -> None:
        self.rows[(pi_id, n, tau_id)] = row

    def vector(self, pi_id: str) -> dict[tuple[int, str], complex]:
        return {(n, t): r.gamma for (p, n, t), r in self.rows.items() if p == pi_id}

    def export_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pi_id", "n", "tau_id", "re_gamma", "im_gamma", "abs_psi", "spread"])
            for (p, n, t), r in sorted(self.rows.items()):
                w.writerow([p, n, t, f"{r.gamma.real:.12g}", f"{r.gamma.imag:.12g}",
                            f"{r.magnitude:.6g}", f"{r.spread:.3g}"])
        return path


def fv_vector(tau: GenericRep, l: int, n: int) -> np.ndarray:
    """The v used for the guaranteed nonzero integral: B_tau itself.

    For n < l this gives Psi(B_pi, f_v) = W_v(I) = 1; for n = l it gives
    W_v(I_l / 2), the central character of tau at 1/2.
    """
    return tau.bessel


def expected_fv_value(tau: GenericRep, v: np.ndarray, l: int, n: int) -> complex:
    q = tau.module.q
    a = ident(n) if n < l else (frac(1, 2, q) * ident(n)) % q
    return complex(whittaker(tau, v, a[None])[0])


def random_whittaker(B: np.ndarray, G: FiniteGroup, rng: np.random.Generator, terms: int = 3) -> np.ndarray:
    """A random element of the model: sum of right translates of B."""
    W = np.zeros_like(B)
    idx = np.arange(G.order)
    for _ in range(terms):
        g = int(rng.integers(G.order))
        c = rng.standard_normal() + 1j * rng.standard_normal()
        W += c * B[G.mul(idx, g)]
    return W


def gamma_factor(
    pi: GenericRep,
    tau: GenericRep,
    kernel: ZetaKernel,
    probes: int = DEFAULT_PROBES,
    seed: int = DEFAULT_SEED,
    tol: Tolerance = DEFAULT_TOL,
    allow_noncuspidal: bool = False,
    B_full: np.ndarray | None = None,
) -> GammaRow:
    """gamma = Psi(B_pi, M f_v) / Psi(B_pi, f_v), re-checked on random (W, f)."""
    if pi.cuspidal is False and not allow_noncuspidal:
        raise DomainError("gamma factors are defined for cuspidal pi only")
    G, l, n = kernel.G, kernel.l, kernel.n
    B = pi.bessel_at(np.arange(G.order)) if B_full is None else B_full
    fv = section_fv(tau, fv_vector(tau, l, n), l, n, kernel.ctx)
    den = kernel(B, fv)
    if abs(den) < tol.eq_abs:
        raise DegenerateZetaError("Psi(B_pi, f_v) vanished")
    gamma = kernel(B, intertwining_apply(fv)) / den
    rng = np.random.default_rng([seed, pi.index, n, tau.index])
    spread, used, attempts = 0.0, 0, 0
    while used < probes:
        attempts += 1
        if attempts > 4 * probes + 4:
            raise DegenerateZetaError("every probed zeta integral vanished")
        W = random_whittaker(B, G, rng)
        f = random_section(tau, l, kernel.ctx, rng)
        d = kernel(W, f)
        if abs(d) < tol.eq_abs * max(1.0, float(np.abs(W).max())):
            continue
        g = kernel(W, intertwining_apply(f)) / d
        spread = max(spread, abs(g - gamma) / max(abs(gamma), tol.eq_abs))
        used += 1
    if spread >= tol.gamma_rel:
        raise ProportionalityError(f"gamma ratios disagree: relative spread {spread:.3e}")
    return GammaRow(gamma=complex(gamma), magnitude=float(abs(den)), spread=float(spread), probes=used)


# ------------------------------------------------------------- hom dimension


def character_table(rep: GenericRep) -> np.ndarray:
    """chi_rep on every element of its group."""
    return character_tables([rep])[0]


def character_tables(reps: list[GenericRep]) -> np.ndarray:
    """Characters of several summands of one module, shape (len(reps), |G|)."""
    module = reps[0].module
    P = np.stack([r.projector for r in reps])
    cols = np.arange(module.dim)
    out = np.empty((len(reps), module.G.order), dtype=complex)
    for g in range(module.G.order):
        j, e = module.action(g)
        out[:, g] = P[:, j, cols] @ module.zeta[e]
    return out


def induced_character(ctx: TwistContext, sigma_chi: np.ndarray, g: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Character of Ind_{Q_n}^{SO_{2n+1}} sigma at a batch of matrices."""
    cos = ctx.cosets
    out = np.zeros(len(g), dtype=complex)
    for lo in range(0, len(g), chunk):
        part = g[lo:lo + chunk]
        prods = np.matmul(cos.reps[None], part[:, None]) % ctx.q
        k, a = cos.locate(prods)
        fixed = k == np.arange(len(cos))[None]
        vals = np.zeros(fixed.shape, dtype=complex)
        if fixed.any():
            vals[fixed] = sigma_chi[ctx.gl_index(a[fixed])]
        out[lo:lo + chunk] = vals.sum(axis=1)
    return out


def hom_dimension(
    pi_chi: np.ndarray,
    sigma_chi: np.ndarray,
    G: FiniteGroup,
    l: int,
    n: int,
    ctx: TwistContext,
    odd: FiniteGroup | None = None,
    tol: float = 1e-6,
) -> tuple[int, float]:
    """dim Hom_H(pi, Ind sigma (x) psi') by the character inner product over H.

    n = l: H = SO_{2l} inside SO_{2l+1}. n < l: H = SO_{2n+1} N^{l-n}.
    Returns the rounded value and its residual.
    """
    q = G.q
    if n == l:
        mats = G.mats()
        chi_ind = induced_character(ctx, sigma_chi, embed_even_in_odd(l, mats, q))
        val = np.sum(pi_chi * np.conj(chi_ind)) / G.order
    else:
        odd = odd if odd is not None else enumerate_group(SO_odd(n), q)
        g = odd.mats()
        chi_ind = induced_character(ctx, sigma_chi, g)
        emb = embed_odd_in_even(l, n, g, q)
        N = unipotent_N(G, l, n)
        C = psi_prime_coeffs(l, n, q)
        Nm = G.mats(N)
        psi_n = root_table(q)[np.tensordot(Nm, C, axes=([-2, -1], [0, 1])) % q]
        total = 0j
        for m, pn in zip(Nm, psi_n):
            idx = G.index_of(np.matmul(emb, m) % q)
            total += np.sum(pi_chi[idx] * np.conj(chi_ind * pn))
        val = total / (odd.order * len(N))
    r = int(round(val.real))
    resid = float(abs(val - r))
    if resid >= tol:
        raise NumericsError(f"hom dimension {val} is not an integer (residual {resid:.2e})")
    return r, resid


def induced_fixed_points(ctx: TwistContext, g: np.ndarray, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """(row, gl index) pairs: coset k fixed by g[row] with Levi part a.

    The induced character of any sigma is then bincount(rows, sigma[cols]).
    """
    cos = ctx.cosets
    rows, cols = [], []
    for lo in range(0, len(g), chunk):
        part = g[lo:lo + chunk]
        prods = np.matmul(cos.reps[None], part[:, None]) % ctx.q
        k, a = cos.locate(prods)
        fixed = k == np.arange(len(cos))[None]
        r, _ = np.nonzero(fixed)
        rows.append(r + lo)
        cols.append(ctx.gl_index(a[fixed]))
    return np.concatenate(rows), np.concatenate(cols)


def hom_dimensions(
    pi_chis: np.ndarray,
    sigma_chis: np.ndarray,
    G: FiniteGroup,
    l: int,
    n: int,
    ctx: TwistContext,
    odd: FiniteGroup | None = None,
    tol: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """hom_dimension for every pair of rows of pi_chis and sigma_chis at once."""
    q = G.q
    sigma_chis = np.atleast_2d(sigma_chis)
    if n == l:
        g = embed_even_in_odd(l, G.mats(), q)
        S = np.asarray(pi_chis)
        order = G.order
    else:
        odd = odd if odd is not None else enumerate_group(SO_odd(n), q)
        g = odd.mats()
        emb = embed_odd_in_even(l, n, g, q)
        N = unipotent_N(G, l, n)
        C = psi_prime_coeffs(l, n, q)
        Nm = G.mats(N)
        psi_n = root_table(q)[np.tensordot(Nm, C, axes=([-2, -1], [0, 1])) % q]
        S = np.zeros((len(pi_chis), len(g)), dtype=complex)
        for m, pn in zip(Nm, psi_n):
            S += pi_chis[:, G.index_of(np.matmul(emb, m) % q)] * np.conj(pn)
        order = odd.order * len(N)
    rows, cols = induced_fixed_points(ctx, g)
    ind = np.stack([
        np.bincount(rows, weights=s[cols].real, minlength=len(g))
        + 1j * np.bincount(rows, weights=s[cols].imag, minlength=len(g))
        for s in sigma_chis
    ])
    vals = S @ ind.conj().T / order
    r = np.rint(vals.real).astype(int)
    resid = float(np.max(np.abs(vals - r))) if vals.size else 0.0
    if resid >= tol:
        raise NumericsError(f"hom dimensions are not integers (residual {resid:.2e})")
    return r, resid


def corank_points(l: int, n: int, q: int, GLn: FiniteGroup) -> np.ndarray:
    """t_n(a) t'_n w~_n for every a in GL_n, as SO_{2l} matrices (n <= l - 1)."""
    tail = np.matmul(t_prime(l, n, q), w_tilde_matrix(l, n)) % q
    heads = np.stack([t_n(a, l, q) for a in GLn.mats()])
    return np.matmul(heads, tail) % q


def intertwined_reduction(B: np.ndarray, tau: GenericRep, v: np.ndarray, kernel: ZetaKernel) -> complex:
    """|V_n| |R^{l,n}| sum over U \\ GL_n of B(t_n(a) t'_n w~_n) W*_v(a)."""
    G, l, n, q = kernel.G, kernel.l, kernel.n, kernel.q
    GLn = kernel.ctx.GL
    reps = kernel.ctx.module.reps
    pts = corank_points(l, n, q, GLn)[reps]
    vals = B[G.index_of(pts)] * whittaker_star(tau, v, GLn.mats(reps))
    scale = len(kernel.ctx.V) * len(enumerate_R(l, n, q))
    return complex(scale * np.sum(vals))


def unipotent_N(G: FiniteGroup, l: int, n: int) -> np.ndarray:
    """Indices of N^{l-n}: elements of U supported on the radical pattern."""
    mask = n_radical_mask(l, n)
    m = G.mats(G.U)
    off = np.triu(np.ones(mask.shape, dtype=bool), 1) & ~mask
    ok = ~np.any(m[:, off] != 0, axis=1)
    return G.U[ok]
