"""Group kinds, their root data at the matrix level, and classical orders."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from ..core import DomainError, check_q, frac, primitive_root
from .matrices import INT, ident

KINDS = ("SO_even", "SO_odd", "GL")


@dataclass(frozen=True)
class GroupKind:
    """SO_even(l) is SO_{2l}, SO_odd(n) is SO_{2n+1}, GL(n) is GL_n."""

    name: str
    rank: int

    def __post_init__(self):
        if self.name not in KINDS:
            raise DomainError(f"unknown group kind {self.name!r}")
        if self.rank < 1:
            raise DomainError("rank must be positive")

    @property
    def size(self) -> int:
        return {"SO_even": 2 * self.rank, "SO_odd": 2 * self.rank + 1, "GL": self.rank}[self.name]

    @property
    def orthogonal(self) -> bool:
        return self.name != "GL"

    @property
    def label(self) -> str:
        return f"GL_{self.rank}" if self.name == "GL" else f"SO_{self.size}"


def SO_even(l: int) -> GroupKind:
    return GroupKind("SO_even", l)


def SO_odd(n: int) -> GroupKind:
    return GroupKind("SO_odd", n)


def GL(n: int) -> GroupKind:
    return GroupKind("GL", n)


def group_order(kind: GroupKind, q: int) -> int:
    r = kind.rank
    if kind.name == "GL":
        out = 1
        for i in range(r):
            out *= q**r - q**i
        return out
    if kind.name == "SO_even":
        out = q ** (r * (r - 1)) * (q**r - 1)
        for i in range(1, r):
            out *= q ** (2 * i) - 1
        return out
    out = q ** (r * r)
    for i in range(1, r + 1):
        out *= q ** (2 * i) - 1
    return out


# ------------------------------------------------------------------ roots
# A root is a tuple of ints of length rank (coordinates in the e_i basis).


def _unit(r: int, i: int, s: int = 1) -> tuple[int, ...]:
    v = [0] * r
    v[i] = s
    return tuple(v)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def positive_roots(kind: GroupKind) -> tuple[tuple[int, ...], ...]:
    r = kind.rank
    out = []
    for i, j in combinations(range(r), 2):
        out.append(_add(_unit(r, i), _unit(r, j, -1)))
        if kind.name != "GL":
            out.append(_add(_unit(r, i), _unit(r, j)))
    if kind.name == "SO_odd":
        out.extend(_unit(r, i) for i in range(r))
    return tuple(out)


@lru_cache(maxsize=None)
def simple_roots(kind: GroupKind) -> tuple[tuple[int, ...], ...]:
    r = kind.rank
    out = [_add(_unit(r, i), _unit(r, i + 1, -1)) for i in range(r - 1)]
    if kind.name == "SO_even":
        if r < 2:
            raise DomainError("SO_even needs l >= 2")
        out.append(_add(_unit(r, r - 2), _unit(r, r - 1)))
    elif kind.name == "SO_odd":
        out.append(_unit(r, r - 1))
    return tuple(out)


def all_roots(kind: GroupKind):
    pos = positive_roots(kind)
    return pos + tuple(tuple(-x for x in a) for a in pos)


def _prime(kind: GroupKind, i: int) -> int:
    """0-based index paired with i under the antidiagonal form."""
    return kind.size - 1 - i


def root_vector(kind: GroupKind, alpha) -> np.ndarray:
    """Nilpotent Lie algebra element spanning the root space of alpha."""
    alpha = tuple(int(a) for a in alpha)
    if alpha not in all_roots(kind):
        raise DomainError(f"{alpha} is not a root of {kind.label}")
    n = kind.size
    X = np.zeros((n, n), dtype=INT)
    nz = [(i, s) for i, s in enumerate(alpha) if s]
    if kind.name == "GL":
        (i, si), (j, sj) = nz
        if si < 0:
            i, j = j, i
        X[i, j] = 1
        return X
    P = lambda k: _prime(kind, k)  # noqa: E731
    if len(nz) == 1:
        (i, s), = nz
        m = kind.rank  # middle index of SO_{2n+1}
        if s > 0:
            X[i, m] = 1
            X[m, P(i)] = -1
        else:
            X[m, i] = 1
            X[P(i), m] = -1
        return X
    (i, si), (j, sj) = nz
    if si < 0 and sj > 0:
        (i, si), (j, sj) = (j, sj), (i, si)
    if si > 0 and sj < 0:  # e_i - e_j
        X[i, j] = 1
        X[P(j), P(i)] = -1
    elif si > 0 and sj > 0:  # e_i + e_j
        X[i, P(j)] = 1
        X[j, P(i)] = -1
    else:  # -e_i - e_j
        X[P(i), j] = 1
        X[P(j), i] = -1
    return X


def root_element(kind: GroupKind, q: int, alpha, x: int) -> np.ndarray:
    """x_alpha(x) = exp(x X_alpha); X_alpha^3 = 0 for every root here."""
    X = root_vector(kind, alpha)
    X2 = X @ X
    return (ident(kind.size) + x * X + frac(x * x, 2, q) * X2) % q


def torus_element(kind: GroupKind, q: int, ts) -> np.ndarray:
    ts = [int(t) % q for t in ts]
    if len(ts) != kind.rank or 0 in ts:
        raise DomainError("torus needs rank nonzero entries")
    if kind.name == "GL":
        d = ts
    else:
        invs = [frac(1, t, q) for t in ts]
        mid = [1] if kind.name == "SO_odd" else []
        d = ts + mid + invs[::-1]
    return np.diag(np.array(d, dtype=INT))


def torus_coords(kind: GroupKind, t: np.ndarray) -> tuple[int, ...]:
    """(t_1, ..., t_rank) of a diagonal torus element."""
    return tuple(int(x) for x in np.diag(t)[: kind.rank])


def chevalley_generators(kind: GroupKind, q: int) -> list[np.ndarray]:
    """Root elements for plus/minus simple roots and one torus generator."""
    check_q(q)
    gens = []
    for a in simple_roots(kind):
        gens.append(root_element(kind, q, a, 1))
        gens.append(root_element(kind, q, tuple(-x for x in a), 1))
    g = primitive_root(q)
    gens.append(torus_element(kind, q, [g] + [1] * (kind.rank - 1)))
    if kind.name == "GL" and kind.rank == 1:
        gens = [torus_element(kind, q, [g])]
    return gens


def root_char_value(alpha, t_coords, q: int) -> int:
    """alpha(t) for t given by its first rank diagonal entries."""
    out = 1
    for a, t in zip(alpha, t_coords):
        out = out * pow(int(t), int(a) % (q - 1), q) % q
    return out
