import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soconverse.core import (
    DomainError,
    Fq,
    NumericsError,
    Tolerance,
    check_q,
    eigenspaces,
    frac,
    inv,
    is_prime,
    primitive_root,
    psi_additive,
    rank,
    reconstruction_error,
    solve,
)

PRIMES = [3, 5, 7, 11, 13]


def test_is_prime_small():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


@pytest.mark.parametrize("bad", [2, 4, 9, 1, 0, -3, 3.0])
def test_check_q_rejects(bad):
    with pytest.raises(DomainError):
        check_q(bad)


@given(st.sampled_from(PRIMES), st.integers(1, 10**6))
def test_inverse(q, a):
    if a % q == 0:
        with pytest.raises(DomainError):
            inv(a, q)
    else:
        assert a * inv(a, q) % q == 1


@given(st.sampled_from(PRIMES), st.integers(-50, 50), st.integers(1, 50))
def test_frac(q, a, b):
    if b % q:
        assert frac(a, b, q) * b % q == a % q


@pytest.mark.parametrize("q", PRIMES)
def test_primitive_root_generates(q):
    g = primitive_root(q)
    assert sorted(pow(g, k, q) for k in range(q - 1)) == list(range(1, q))


@given(st.sampled_from(PRIMES), st.integers(), st.integers(), st.integers())
def test_field_axioms(q, a, b, c):
    x, y, z = Fq(q, a), Fq(q, b), Fq(q, c)
    assert (x + y) * z == x * z + y * z
    assert x - x == Fq(q, 0)
    if y.value:
        assert (x / y) * y == x


def test_fields_do_not_mix():
    with pytest.raises(DomainError):
        Fq(3, 1) + Fq(5, 1)


@given(st.sampled_from(PRIMES), st.integers(), st.integers())
def test_psi_is_additive(q, a, b):
    psi = psi_additive(q)
    assert abs(psi(a + b) - psi(a) * psi(b)) < 1e-12


def test_tolerance_positive():
    with pytest.raises(DomainError):
        Tolerance(eq_abs=0)


def test_eigenspaces_reconstruct_random_hermitian(rng):
    a = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    h = a + a.conj().T
    spaces = eigenspaces(h)
    assert reconstruction_error(h, spaces) < 1e-9
    assert sum(b.shape[1] for _, b in spaces) == 64


def test_eigenspaces_groups_degenerate_values(rng):
    q_, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    h = q_ @ np.diag([1, 1, 1, 2, 2, 5.0]) @ q_.T
    dims = [b.shape[1] for _, b in eigenspaces(h)]
    assert dims == [3, 2, 1]


def test_eigenspaces_rejects_non_hermitian():
    with pytest.raises(DomainError):
        eigenspaces(np.array([[0, 1], [0, 0]], dtype=complex))


def test_rank_and_solve(rng):
    a = rng.standard_normal((5, 3)) @ rng.standard_normal((3, 5))
    assert rank(a) == 3
    x = rng.standard_normal(5)
    assert np.allclose(a @ solve(a, a @ x), a @ x)
    with pytest.raises(NumericsError):
        solve(np.zeros((2, 2)), np.ones(2))
