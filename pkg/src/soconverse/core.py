"""Scalar layer: the prime field F_q, the additive character, tolerances and
the small amount of dense complex linear algebra the rest of the package needs.

Field elements are plain Python ints (or integer numpy arrays) reduced mod q;
`Fq` exists for the places where a self-describing value is more readable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericsError(ArithmeticError):
    """A floating computation failed to meet its residual bound."""


class BudgetError(RuntimeError):
    """A requested computation exceeds the configured size budget."""


class FormError(ValueError):
    """A matrix fails the defining form or determinant condition."""


class DegenerateSplitError(NumericsError):
    """Commutant eigenvalues could not be separated after all retries."""


class NotGenericError(NumericsError):
    """A supposedly generic piece has no Whittaker vector."""


class ConsistencyError(RuntimeError):
    """Two independent computations that must agree do not."""


class DegenerateZetaError(NumericsError):
    """Every probed zeta integral vanished, so no ratio can be formed."""


class ProportionalityError(NumericsError):
    """Zeta-integral ratios disagree across probes."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return False
    return True


def check_q(q: int) -> int:
    """Validate that q is an odd prime and return it."""
    if not isinstance(q, (int, np.integer)) or not is_prime(int(q)) or q == 2:
        raise DomainError(f"q must be an odd prime, got {q!r}")
    return int(q)


def inv(a: int, q: int) -> int:
    a %= q
    if a == 0:
        raise DomainError("inverse of zero in F_q")
    return pow(a, q - 2, q)


def frac(num: int, den: int, q: int) -> int:
    """The field element num/den."""
    return (num * inv(den, q)) % q


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    check_q(q)
    factors = [p for p in range(2, q) if (q - 1) % p == 0 and is_prime(p)]
    for g in range(2, q):
        if all(pow(g, (q - 1) // p, q) != 1 for p in factors):
            return g
    return 1  # q = 3 falls through only if 2 fails, which it does not


@dataclass(frozen=True, order=True)
class Fq:
    """An element of the prime field F_q."""

    q: int
    value: int

    def __post_init__(self):
        check_q(self.q)
        object.__setattr__(self, "value", self.value % self.q)

    def _coerce(self, other) -> int:
        if isinstance(other, Fq):
            if other.q != self.q:
                raise DomainError("mixing elements of different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return Fq(self.q, self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Fq(self.q, self.value - self._coerce(other))

    def __rsub__(self, other):
        return Fq(self.q, self._coerce(other) - self.value)

    def __mul__(self, other):
        return Fq(self.q, self.value * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Fq(self.q, -self.value)

    def inverse(self) -> "Fq":
        return Fq(self.q, inv(self.value, self.q))

    def __truediv__(self, other):
        return self * Fq(self.q, self._coerce(other)).inverse()

    def __int__(self):
        return self.value


@lru_cache(maxsize=None)
def root_table(q: int) -> np.ndarray:
    """zeta^k for k in [0, q), zeta = exp(2 pi i / q)."""
    k = np.arange(q)
    return np.exp(2j * np.pi * k / q)


def psi_additive(q: int):
    """The additive character x -> exp(2 pi i x / q) of F_q.

    Accepts ints or integer arrays; phases are looked up from a table so that
    equal field values give bit-identical complex values.
    """
    table = root_table(check_q(q))

    def psi(x):
        if isinstance(x, int):
            x %= q
        return table[np.asarray(x, dtype=np.int64) % q]

    return psi


@dataclass(frozen=True)
class Tolerance:
    eq_abs: float = 1e-8
    gamma_rel: float = 1e-6
    eig_gap: float = 1e-6

    def __post_init__(self):
        if min(self.eq_abs, self.gamma_rel, self.eig_gap) <= 0:
            raise DomainError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


# ---------------------------------------------------------------- linear algebra


def rank(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank, with the cutoff scaled by the largest singular value."""
    a = np.asarray(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol.eq_abs * max(1.0, s[0])))


def solve(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = np.linalg.norm(a @ x - b)
    if resid > tol.eq_abs * max(1.0, np.linalg.norm(b)):
        raise NumericsError(f"linear solve residual {resid:.3e}")
    return x


def eigenspaces(
    h: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> list[tuple[float, np.ndarray]]:
    """Split a Hermitian matrix into eigenspaces.

    Eigenvalues closer than `tol.eig_gap` (relative to the spectral radius) are
    grouped. Each space comes with an orthonormal basis as columns.
    """
    h = np.asarray(h)
    if not np.allclose(h, h.conj().T, atol=1e-10 * max(1.0, np.abs(h).max())):
        raise DomainError("eigenspaces expects a Hermitian matrix")
    vals, vecs = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(vals).max()))
    out = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > tol.eig_gap * scale:
            out.append((float(vals[start:i].mean()), vecs[:, start:i]))
            start = i
    recon = sum(lam * (q @ q.conj().T) for lam, q in out)
    err = np.abs(recon - h).max() if len(out) else 0.0
    if err > 1e-9 * scale * max(1, h.shape[0]):
        raise NumericsError(f"eigen-reconstruction error {err:.3e}")
    return out


def reconstruction_error(h: np.ndarray, spaces) -> float:
    recon = sum(lam * (q @ q.conj().T) for lam, q in spaces)
    return float(np.abs(recon - h).max() / max(1.0, np.abs(h).max()))
