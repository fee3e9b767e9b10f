"""Root system D_l: Weyl group as signed permutations, the sets theta_w, the
Bessel support and its partition into the classes B_0, ..., B_l, B_l^c.

Everything here is q-independent. A signed permutation sigma of {1..l} is
stored as the tuple of signed images (sigma(1), ..., sigma(l)); its 0/1 matrix
sends e_i to e_{sigma(i)} when sigma(i) > 0 and to e_{|sigma(i)|'} otherwise,
where k' = 2l + 1 - k.

Weyl elements act on characters of the torus by (w.alpha)(t) = alpha(w t w^{-1}),
which in coordinates is the standard signed-permutation action of sigma^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations, product

import numpy as np

from .core import BudgetError, ConsistencyError, DomainError
from .groups import elements as el
from .groups.matrices import INT

MAX_RANK = 7


@dataclass(frozen=True, order=True)
class WeylElement:
    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(abs(x) for x in self.images) != list(range(1, len(self.images) + 1)):
            raise DomainError(f"{self.images} is not a signed permutation")

    @property
    def l(self) -> int:
        return len(self.images)

    @property
    def parity(self) -> int:
        return -1 if sum(x < 0 for x in self.images) % 2 else 1

    @property
    def in_D(self) -> bool:
        return self.parity == 1

    @classmethod
    def identity(cls, l: int) -> "WeylElement":
        return cls(tuple(range(1, l + 1)))

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(
            tuple((1 if t > 0 else -1) * self.images[abs(t) - 1] for t in other.images)
        )

    def inverse(self) -> "WeylElement":
        out = [0] * self.l
        for i, s in enumerate(self.images, start=1):
            out[abs(s) - 1] = i if s > 0 else -i
        return WeylElement(tuple(out))

    def act(self, alpha) -> tuple[int, ...]:
        """Coordinates of w.alpha, where (w.alpha)(t) = alpha(w t w^-1) for the matrix of w."""
        out = [0] * self.l
        for j, s in enumerate(self.inverse().images):
            out[abs(s) - 1] += (1 if s > 0 else -1) * int(alpha[j])
        return tuple(out)

    def conj_c(self) -> "WeylElement":
        return c_signed(self.l) * self * c_signed(self.l)

    def matrix(self) -> np.ndarray:
        l = self.l
        m = np.zeros((2 * l, 2 * l), dtype=INT)
        for i, s in enumerate(self.images):
            tgt = s - 1 if s > 0 else 2 * l + s
            m[tgt, i] = 1
            m[2 * l - 1 - tgt, 2 * l - 1 - i] = 1
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "WeylElement":
        m = np.asarray(m)
        l = m.shape[0] // 2
        out = []
        for i in range(l):
            r = int(np.nonzero(m[:, i])[0][0])
            out.append(r + 1 if r < l else -(2 * l - r))
        w = cls(tuple(out))
        if not np.array_equal(w.matrix(), (np.asarray(m) != 0).astype(INT)):
            raise DomainError("matrix is not a signed-permutation pattern")
        return w

    @classmethod
    def from_perm(cls, perm) -> "WeylElement":
        """t_n(w') for a permutation w' of {0..n-1} (w' e_j = e_perm[j]), inside rank l = len."""
        return cls(tuple(p + 1 for p in perm))


def c_signed(l: int) -> WeylElement:
    return WeylElement(tuple(range(1, l)) + (-l,))


# ------------------------------------------------------------------- roots


def simple_roots(l: int) -> list[tuple[int, ...]]:
    out = []
    for i in range(l - 1):
        a = [0] * l
        a[i], a[i + 1] = 1, -1
        out.append(tuple(a))
    a = [0] * l
    a[l - 2] = a[l - 1] = 1
    out.append(tuple(a))
    return out


def positive_roots(l: int) -> list[tuple[int, ...]]:
    out = []
    for i, j in combinations(range(l), 2):
        for s in (-1, 1):
            a = [0] * l
            a[i], a[j] = 1, s
            out.append(tuple(a))
    return out


def is_positive(alpha) -> bool:
    return next(x for x in alpha if x) > 0


def simple_index(alpha) -> int | None:
    """1-based index of alpha among the simple roots, or None."""
    l = len(alpha)
    for k, s in enumerate(simple_roots(l), start=1):
        if tuple(alpha) == s:
            return k
    return None


def theta_of(w: WeylElement) -> tuple[frozenset[int], bool]:
    """(theta_w as 1-based simple-root indices, whether w supports Bessel functions)."""
    theta = set()
    supports = True
    for k, a in enumerate(simple_roots(w.l), start=1):
        b = w.act(a)
        if is_positive(b):
            theta.add(k)
            if simple_index(b) is None:
                supports = False
    return frozenset(theta), supports


# --------------------------------------------------- vectorized enumeration


@lru_cache(maxsize=None)
def weyl_group_array(l: int) -> np.ndarray:
    """All of W(D_l) as an (N, l) int8 array of signed images, sorted."""
    if l > MAX_RANK:
        raise BudgetError(f"W(D_l) enumeration limited to l <= {MAX_RANK}")
    perms = np.array(list(permutations(range(1, l + 1))), dtype=np.int8)
    signs = np.array([s for s in product((1, -1), repeat=l) if np.prod(s) == 1], dtype=np.int8)
    out = (perms[:, None, :] * signs[None, :, :]).reshape(-1, l)
    order = np.lexsort(out.T[::-1])
    return out[order]


def _inverse_array(S: np.ndarray) -> np.ndarray:
    N, l = S.shape
    T = np.zeros_like(S)
    rows = np.repeat(np.arange(N), l)
    cols = np.abs(S).ravel().astype(np.int64) - 1
    vals = np.sign(S).ravel() * np.tile(np.arange(1, l + 1, dtype=np.int8), N)
    T[rows, cols] = vals
    return T


def _theta_arrays(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """theta bitmasks (bit k-1 for alpha_k) and support flags for a batch."""
    N, l = S.shape
    T = _inverse_array(S)
    idx = np.abs(T).astype(np.int64)  # 1-based image of e_j under sigma^{-1}
    sg = np.sign(T).astype(np.int64)
    mask = np.zeros(N, dtype=np.int64)
    supp = np.ones(N, dtype=bool)
    pairs = [(i, i + 1, -1) for i in range(l - 1)] + [(l - 2, l - 1, 1)]
    for k, (i, j, cj) in enumerate(pairs):
        a, ca = idx[:, i], sg[:, i]
        b, cb = idx[:, j], sg[:, j] * cj
        swap = a > b
        a, b = np.where(swap, b, a), np.where(swap, a, b)
        ca, cb = np.where(swap, cb, ca), np.where(swap, ca, cb)
        pos = ca > 0
        simple = (pos & (cb < 0) & (b == a + 1)) | (pos & (cb > 0) & (a == l - 1) & (b == l))
        mask |= pos.astype(np.int64) << k
        supp &= ~pos | simple
    return mask, supp


@dataclass(frozen=True)
class BesselSupport:
    l: int
    elements: tuple[WeylElement, ...]
    thetas: tuple[frozenset[int], ...]

    def by_theta(self, theta) -> WeylElement:
        return self.elements[self.thetas.index(frozenset(theta))]

    def __contains__(self, w: WeylElement) -> bool:
        return w in self.elements

    def __len__(self):
        return len(self.elements)


def _mask_to_set(m: int, l: int) -> frozenset[int]:
    return frozenset(k + 1 for k in range(l) if m >> k & 1)


@lru_cache(maxsize=None)
def bessel_support(l: int) -> BesselSupport:
    if l < 2:
        raise DomainError("need l >= 2")
    S = weyl_group_array(l)
    mask, supp = _theta_arrays(S)
    elems = tuple(WeylElement(tuple(int(x) for x in row)) for row in S[supp])
    thetas = tuple(_mask_to_set(int(m), l) for m in mask[supp])
    return BesselSupport(l, elems, thetas)


# ----------------------------------------------------------- named elements


def w_tilde(l: int, n: int) -> WeylElement:
    if n == l:
        return WeylElement.from_matrix(el.w_tilde_top(l))
    return WeylElement.from_matrix(el.w_tilde(l, n))


def w_tilde_prime_top(l: int) -> WeylElement:
    return WeylElement.from_matrix(el.w_tilde_prime_top(l))


def w_tilde_top_c(l: int) -> WeylElement:
    return WeylElement.from_matrix(el.w_tilde_top_c(l))


def w_long(l: int) -> WeylElement:
    return WeylElement.from_matrix(el.w_long(l))


def t_lift(perm, l: int) -> WeylElement:
    """t_n(w') for a permutation w' of GL_n with w' e_j = e_{perm[j]} (0-based)."""
    n = len(perm)
    if n > l:
        raise DomainError("GL_n Weyl element does not fit in rank l")
    return WeylElement(tuple(p + 1 for p in perm) + tuple(range(n + 1, l + 1)))


def gl_weyl_matrix(perm) -> np.ndarray:
    n = len(perm)
    m = np.zeros((n, n), dtype=INT)
    m[list(perm), np.arange(n)] = 1
    return m


def weyl_matrix(w: WeylElement) -> np.ndarray:
    """Canonical 0/1 representative in SO_{2l}; requires an even number of flips."""
    if not w.in_D:
        raise DomainError("odd number of sign changes: not in W(D_l)")
    return w.matrix()


def gl_weyl_lift(perm, l: int) -> np.ndarray:
    return t_lift(perm, l).matrix()


# --------------------------------------------------------------- partition

@dataclass(frozen=True, order=True)
class CellClass:
    """B_n for 0 <= n <= l, or B_l^c (n = l, conj = True)."""

    n: int
    conj: bool = False

    def label(self) -> str:
        return f"B_{self.n}^c" if self.conj else f"B_{self.n}"


def _gl_part(x: WeylElement, n: int) -> bool:
    """x = t_n(w') for some w' in W(GL_n)."""
    return all(s > 0 for s in x.images) and all(
        x.images[i] == i + 1 for i in range(n, x.l)
    )


def memberships(w: WeylElement) -> list[CellClass]:
    """Every class whose defining condition w satisfies (used to test disjointness)."""
    l = w.l
    out = []
    if w == WeylElement.identity(l):
        out.append(CellClass(0))
    for n in range(1, l - 1):
        if _gl_part(w * w_tilde(l, n).inverse(), n):
            out.append(CellClass(n))
    wt = w_tilde(l, l)
    if _gl_part(w * wt.inverse(), l):
        out.append(CellClass(l - 1) if w.conj_c() == w else CellClass(l))
    wc = w.conj_c()
    if _gl_part(wc * wt.inverse(), l) and wc.conj_c() != wc:
        out.append(CellClass(l, True))
    return out


def classify_cell(w: WeylElement) -> CellClass:
    _, supp = theta_of(w)
    if not supp:
        raise DomainError(f"{w.images} is outside the Bessel support")
    found = memberships(w)
    if len(found) != 1:
        raise ConsistencyError(f"{w.images} lies in {len(found)} classes")
    return found[0]


def p_set(l: int, cls: CellClass) -> set[frozenset[int]]:
    """The subsets of simple roots predicted for a class (by inclusion bounds)."""
    full = frozenset(range(1, l + 1))
    if cls.n == 0:
        lo, hi = full, full
    elif cls.n <= l - 2:
        lo, hi = frozenset(range(cls.n + 1, l + 1)), full - {cls.n}
    elif cls.n == l - 1:
        lo, hi = frozenset(), full - {l - 1, l}
    elif not cls.conj:
        lo, hi = frozenset({l - 1}), full - {l}
    else:
        lo, hi = frozenset({l}), full - {l - 1}
    rest = sorted(hi - lo)
    return {lo | frozenset(c) for k in range(len(rest) + 1) for c in combinations(rest, k)}


def all_classes(l: int) -> list[CellClass]:
    return [CellClass(n) for n in range(l + 1)] + [CellClass(l, True)]


def partition(l: int) -> dict[CellClass, list[WeylElement]]:
    out: dict[CellClass, list[WeylElement]] = {c: [] for c in all_classes(l)}
    for w in bessel_support(l).elements:
        out[classify_cell(w)].append(w)
    return out


def gl_weyl_group(n: int):
    return list(permutations(range(n)))


def block_shape_perm(perm) -> bool:
    """w' = (0 w''; 1 0): w' e_1 = e_l."""
    return perm[0] == len(perm) - 1


def lower_part(perm) -> tuple[int, ...]:
    """w'' from w' = (0 w''; 1 0)."""
    return tuple(perm[j] for j in range(1, len(perm)))


# --------------------------------------------------------- verified claims


def _root(l: int, *terms) -> tuple[int, ...]:
    a = [0] * l
    for i, s in terms:
        a[i - 1] += s
    return tuple(a)


def w_tilde_action_mismatches(l: int) -> list[tuple[int, int]]:
    """(n, i) pairs where w~_n alpha_i differs from the expected table, n <= l - 2."""
    S = simple_roots(l)
    bad = []
    for n in range(1, l - 1):
        w = w_tilde(l, n)
        expect = {}
        for i in range(1, n):
            expect[i] = S[n - i - 1]
        expect[n] = _root(l, (1, -1), (n + 1, -1))
        for i in range(n + 1, l - 1):
            expect[i] = S[i - 1]
        odd = n % 2 == 1
        expect[l - 1] = S[l - 1] if odd else S[l - 2]
        expect[l] = S[l - 2] if odd else S[l - 1]
        bad += [(n, i) for i, a in expect.items() if w.act(S[i - 1]) != a]
    return bad


def gl_lifts_in_support(l: int) -> list[tuple[int, ...]]:
    """Non-identity permutations w of W(GL_l) whose lift t_l(w) lies in the Bessel support."""
    supp = bessel_support(l)
    ident_perm = tuple(range(l))
    return [p for p in gl_weyl_group(l) if p != ident_perm and t_lift(p, l) in supp]


def top_shape_mismatches(l: int) -> list[tuple[int, ...]]:
    """w' with t_l(w') w~_l in the support where (c w c = w) disagrees with w' e_1 = e_l."""
    supp = bessel_support(l)
    wt = w_tilde(l, l)
    bad = []
    for p in gl_weyl_group(l):
        w = t_lift(p, l) * wt
        if w in supp and (w.conj_c() == w) != block_shape_perm(p):
            bad.append(p)
    return bad


def corank_one_factorization(l: int) -> tuple[bool, int]:
    """Whether every element of B_{l-1} is t_{l-1}(w'') w~_{l-1}; also |B_{l-1}|."""
    cls = partition(l)[CellClass(l - 1)]
    wt = w_tilde(l, l - 1)
    gen = {t_lift(p, l) * wt for p in gl_weyl_group(l - 1)}
    return set(cls) <= gen, len(cls)


__all__ = [
    "WeylElement",
    "CellClass",
    "BesselSupport",
    "bessel_support",
    "classify_cell",
    "theta_of",
    "p_set",
    "partition",
    "w_tilde",
    "t_lift",
    "weyl_matrix",
    "gl_weyl_lift",
]
