"""Enumerated finite matrix groups with canonical ordering and lookup tables."""

from __future__ import annotations

import json
import logging
import struct
from functools import cached_property
from pathlib import Path

import numpy as np

from ..core import BudgetError, ConsistencyError, FormError, check_q
from .kinds import GroupKind, chevalley_generators, group_order
from .matrices import (
    INT,
    J,
    batch_inv,
    decode,
    ident,
    keys,
    mdet,
    orth_inv,
    preserves_form,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**7
CACHE_MAGIC = b"SOCF1"
CODE_VERSION = 1


class FiniteGroup:
    """An enumerated matrix group.

    Elements are stored sorted by their base-q key, which is the row-major
    lexicographic order; positions in that order are the canonical indices.
    """

    def __init__(self, kind: GroupKind, q: int, elements: np.ndarray):
        self.kind = kind
        self.q = q
        self.n = kind.size
        ks = keys(elements, q)
        order = np.argsort(ks, kind="stable")
        self.keys = ks[order]
        self.elements = np.ascontiguousarray(elements[order].astype(np.uint8))
        self.order = len(self.keys)
        self.form = J(self.n) if kind.orthogonal else None

    def __repr__(self):
        return f"FiniteGroup({self.kind.label}(F_{self.q}), order={self.order})"

    def __len__(self):
        return self.order

    def mats(self, idx=None) -> np.ndarray:
        if idx is None:
            return self.elements.astype(INT)
        return self.elements[idx].astype(INT)

    def index_of(self, mats: np.ndarray, strict: bool = True) -> np.ndarray:
        """Canonical indices of matrices; -1 for non-members unless strict."""
        k = keys(np.asarray(mats, dtype=INT) % self.q, self.q)
        pos = np.searchsorted(self.keys, k)
        pos = np.minimum(pos, self.order - 1)
        ok = self.keys[pos] == k
        if strict and not np.all(ok):
            raise FormError(f"matrix not in {self.kind.label}(F_{self.q})")
        return np.where(ok, pos, -1)

    def contains(self, mats) -> np.ndarray:
        return self.index_of(mats, strict=False) >= 0

    @cached_property
    def identity(self) -> int:
        return int(self.index_of(ident(self.n)))

    @cached_property
    def inverse(self) -> np.ndarray:
        """inverse[i] is the index of the inverse of element i."""
        out = np.empty(self.order, dtype=np.int64)
        for lo in range(0, self.order, 1 << 16):
            m = self.mats(slice(lo, lo + (1 << 16)))
            inv_m = orth_inv(m, self.q) if self.kind.orthogonal else batch_inv(m, self.q)
            out[lo:lo + len(m)] = self.index_of(inv_m)
        return out

    def mul(self, i, j) -> np.ndarray:
        """Indices of products of elements i and j (broadcasting)."""
        i, j = np.broadcast_arrays(np.asarray(i), np.asarray(j))
        prod = np.matmul(self.mats(i.ravel()), self.mats(j.ravel())) % self.q
        return self.index_of(prod).reshape(i.shape)

    def mul_mat(self, i, g: np.ndarray, left: bool = False) -> np.ndarray:
        """Indices of element_i @ g (or g @ element_i when left)."""
        m = self.mats(np.asarray(i).ravel())
        prod = (np.matmul(g, m) if left else np.matmul(m, g)) % self.q
        return self.index_of(prod).reshape(np.shape(i))

    # -------------------------------------------------------- standard pieces

    @cached_property
    def U(self) -> np.ndarray:
        """Indices of the upper unitriangular elements."""
        m = self.elements
        n = self.n
        low = np.tril(np.ones((n, n), dtype=bool), -1)
        ok = np.all(m[:, low] == 0, axis=1) & np.all(m[:, np.arange(n), np.arange(n)] == 1, axis=1)
        return np.nonzero(ok)[0]

    @cached_property
    def T(self) -> np.ndarray:
        """Indices of the diagonal elements."""
        m = self.elements
        off = ~np.eye(self.n, dtype=bool)
        return np.nonzero(np.all(m[:, off] == 0, axis=1))[0]

    @cached_property
    def _cosets(self):
        """Right cosets U g: lex-minimal representatives, and g = u * rep."""
        U = self.U
        umats = self.mats(U)
        label = np.full(self.order, np.iinfo(np.int64).max, dtype=np.int64)
        chunk = max(1, (1 << 22) // max(1, len(U)))
        for lo in range(0, self.order, chunk):
            g = self.mats(slice(lo, lo + chunk))
            prod = np.matmul(umats[:, None], g[None]) % self.q
            label[lo:lo + len(g)] = keys(prod, self.q).min(axis=0)
        rep_keys, coset_of = np.unique(label, return_inverse=True)
        reps = np.searchsorted(self.keys, rep_keys)
        # u = g rep^{-1}
        ukeys = self.keys[U]
        u_of = np.empty(self.order, dtype=np.int64)
        rep_inv = self.inverse[reps]
        for lo in range(0, self.order, 1 << 16):
            sl = slice(lo, lo + (1 << 16))
            g = self.mats(sl)
            ri = self.mats(rep_inv[coset_of[sl]])
            k = keys(np.matmul(g, ri) % self.q, self.q)
            pos = np.searchsorted(ukeys, k)
            if np.any(ukeys[np.minimum(pos, len(U) - 1)] != k):
                raise ConsistencyError("coset decomposition left U")
            u_of[sl] = pos
        return reps, coset_of.astype(np.int64), u_of

    @property
    def coset_reps(self) -> np.ndarray:
        """Indices of canonical (lex-minimal) representatives of U\\G."""
        return self._cosets[0]

    @property
    def coset_of(self) -> np.ndarray:
        return self._cosets[1]

    @property
    def u_of(self) -> np.ndarray:
        """Position in U of the u with g = u * rep(g)."""
        return self._cosets[2]

    def verify_membership(self) -> bool:
        """Every element passes the form and determinant conditions."""
        m = self.mats()
        if self.kind.orthogonal:
            ok = np.all(preserves_form(m, self.q)) and np.all(mdet(m, self.q) == 1)
        else:
            ok = np.all(mdet(m, self.q) != 0)
        return bool(ok)

    def verify_closure(self, rng: np.random.Generator, samples: int = 1000) -> bool:
        i = rng.integers(0, self.order, samples)
        j = rng.integers(0, self.order, samples)
        prod = np.matmul(self.mats(i), self.mats(j)) % self.q
        return bool(np.all(self.contains(prod))) and bool(
            np.all(self.inverse[self.inverse[i]] == i)
        )


# ---------------------------------------------------------------- enumeration


def bfs_closure(gens: list[np.ndarray], q: int, limit: int) -> np.ndarray:
    """Sorted keys of the group generated by gens (frontier-vectorized BFS)."""
    n = gens[0].shape[0]
    gens = np.stack([np.asarray(g, dtype=INT) % q for g in gens])
    known = keys(ident(n)[None], q)
    frontier = ident(n)[None]
    while len(frontier):
        found = []
        for lo in range(0, len(frontier), 1 << 15):
            f = frontier[lo:lo + (1 << 15)]
            prod = np.matmul(f[:, None], gens[None]) % q
            found.append(np.unique(keys(prod, q)))
        new = np.unique(np.concatenate(found))
        new = new[~np.isin(new, known, assume_unique=True)]
        if len(known) + len(new) > limit:
            raise BudgetError(f"closure exceeds {limit} elements")
        known = np.union1d(known, new)
        frontier = decode(new, n, q)
    return known


MEMORY_BUDGET = 2 * 10**9  # bytes of dense matrix storage


def enumerate_group(
    kind: GroupKind,
    q: int,
    budget: int = DEFAULT_BUDGET,
    cache_dir: str | Path | None = None,
) -> FiniteGroup:
    """Enumerate a group by BFS closure from Chevalley generators."""
    check_q(q)
    expected = group_order(kind, q)
    if expected > budget:
        raise BudgetError(f"{kind.label}(F_{q}) has order {expected} > budget {budget}")
    need = expected * kind.size**2 * np.dtype(INT).itemsize
    if need > MEMORY_BUDGET:
        raise BudgetError(f"{kind.label}(F_{q}) needs {need / 1e9:.1f} GB of matrices")
    if cache_dir is not None:
        cached = load_cache(kind, q, cache_dir)
        if cached is not None:
            return cached
    gens = chevalley_generators(kind, q)
    for g in gens:
        if kind.orthogonal and not (preserves_form(g, q) and mdet(g, q) == 1):
            raise FormError("Chevalley generator outside the group")
    ks = bfs_closure(gens, q, limit=expected)
    if len(ks) != expected:
        raise ConsistencyError(f"enumerated {len(ks)} elements, expected {expected}")
    G = FiniteGroup(kind, q, decode(ks, kind.size, q))
    if cache_dir is not None:
        save_cache(G, cache_dir)
    return G


def exhaustive_filter(kind: GroupKind, q: int, max_order: int = 10**5) -> np.ndarray:
    """Sorted keys of the group found by brute force rather than generation.

    Orthogonal groups are built column by column from the Gram conditions;
    GL is filtered from all matrices by determinant.
    """
    n = kind.size
    if group_order(kind, q) > max_order:
        raise BudgetError("exhaustive filter is for small groups only")
    if kind.name == "GL":
        allm = decode(np.arange(q ** (n * n), dtype=INT), n, q)
        ok = mdet(allm, q) != 0
        return keys(allm[ok], q)
    digits = np.arange(q**n, dtype=INT)
    vecs = np.stack([(digits // q ** (n - 1 - i)) % q for i in range(n)], axis=1)
    gram = (vecs @ J(n) @ vecs.T) % q
    Jn = J(n)
    partial = np.zeros((1, 0), dtype=INT)
    for k in range(n):
        # candidates v for column k: gram[col_i, v] == J[i, k] for i < k, and v.Jv == J[k, k]
        diag_ok = np.diag(gram) == Jn[k, k]
        rows = []
        for p in partial:
            mask = diag_ok.copy()
            for i, ci in enumerate(p):
                mask &= gram[ci] == Jn[i, k]
            cand = np.nonzero(mask)[0]
            if len(cand):
                rows.append(np.concatenate([np.repeat(p[None], len(cand), 0), cand[:, None]], 1))
        partial = np.concatenate(rows) if rows else np.zeros((0, k + 1), dtype=INT)
    mats = np.transpose(vecs[partial], (0, 2, 1))  # columns are the chosen vectors
    mats = mats[mdet(mats, q) == 1]
    return np.sort(keys(mats, q))


# ---------------------------------------------------------------- disk cache


def cache_path(kind: GroupKind, q: int, cache_dir) -> Path:
    return Path(cache_dir) / f"{kind.name}{kind.rank}_q{q}_v{CODE_VERSION}.socf"


def save_cache(G: FiniteGroup, cache_dir) -> Path:
    path = cache_path(G.kind, G.q, cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps(
        {"kind": G.kind.name, "l_or_n": G.kind.rank, "q": G.q, "order": G.order,
         "n": G.n, "version": CODE_VERSION},
        sort_keys=True,
    ).encode()
    body = G.elements.reshape(G.order, G.n * G.n).astype(np.uint8).tobytes()
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(struct.pack("<Q", len(body)))
        fh.write(body)
    tmp.replace(path)
    return path


def load_cache(kind: GroupKind, q: int, cache_dir) -> FiniteGroup | None:
    """Load a cached enumeration; corrupt or mismatched files are discarded."""
    path = cache_path(kind, q, cache_dir)
    if not path.exists():
        return None
    try:
        raw = path.read_bytes()
        if raw[:5] != CACHE_MAGIC:
            raise ValueError("bad magic")
        (hlen,) = struct.unpack_from("<I", raw, 5)
        header = json.loads(raw[9:9 + hlen])
        (blen,) = struct.unpack_from("<Q", raw, 9 + hlen)
        body = raw[17 + hlen:17 + hlen + blen]
        n = kind.size
        expected = group_order(kind, q)
        if (header["kind"], header["l_or_n"], header["q"], header["order"]) != (
            kind.name, kind.rank, q, expected
        ) or len(body) != expected * n * n or blen != len(body):
            raise ValueError("header mismatch")
        digits = np.frombuffer(body, dtype=np.uint8).reshape(expected, n, n)
        if digits.max() >= q:
            raise ValueError("digit out of range")
        G = FiniteGroup(kind, q, digits.astype(INT))
        if len(np.unique(G.keys)) != expected:
            raise ValueError("duplicate elements")
        return G
    except Exception as exc:  # noqa: BLE001 - any failure means rebuild
        log.warning("discarding corrupt cache %s (%s)", path, exc)
        path.unlink(missing_ok=True)
        return None
