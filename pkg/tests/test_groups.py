import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soconverse.core import BudgetError, DomainError, FormError
from soconverse.groups import elements as el
from soconverse.groups.bruhat import bruhat_decompose
from soconverse.groups.embed import embed_even_in_odd, embed_odd_in_even, torus_image_closed_form
from soconverse.groups.finite import cache_path, enumerate_group, exhaustive_filter, load_cache
from soconverse.groups.kinds import (
    GL,
    SO_even,
    SO_odd,
    group_order,
    positive_roots,
    root_char_value,
    root_element,
    torus_element,
)
from soconverse.groups.matrices import ident, keys, mdet, preserves_form
from soconverse.groups.parabolic import enumerate_R, enumerate_V, psi_prime_coeffs
from soconverse.groups.siegel import OpenCell, Other, QPart, siegel_decompose


@pytest.fixture(scope="module")
def so4_3():
    return enumerate_group(SO_even(2), 3)


@pytest.fixture(scope="module")
def so3_3():
    return enumerate_group(SO_odd(1), 3)


@pytest.fixture(scope="module")
def gl3_3():
    return enumerate_group(GL(3), 3)


# ----------------------------------------------------------------- orders


@pytest.mark.parametrize(
    "kind,q,order",
    [(SO_even(2), 3, 576), (SO_even(2), 5, 14400), (SO_odd(2), 3, 51840), (GL(2), 3, 48), (GL(2), 5, 480)],
)
def test_orders_match_enumeration(kind, q, order):
    assert group_order(kind, q) == order
    assert enumerate_group(kind, q).order == order


@pytest.mark.parametrize("kind,q", [(SO_even(2), 3), (SO_odd(1), 3), (SO_odd(1), 5), (GL(2), 3)])
def test_generation_equals_brute_force_filter(kind, q):
    G = enumerate_group(kind, q)
    assert np.array_equal(np.sort(keys(G.mats(), q)), exhaustive_filter(kind, q))


def test_budget_is_enforced():
    with pytest.raises(BudgetError):
        enumerate_group(SO_even(3), 3, budget=10**6)
    with pytest.raises(BudgetError):
        exhaustive_filter(SO_even(3), 3)


def test_unipotent_and_cosets(so4_3):
    assert len(so4_3.U) == 9
    assert len(so4_3.coset_reps) == 64


def test_membership_and_closure(so4_3, rng):
    assert so4_3.verify_membership()
    assert so4_3.verify_closure(rng)


@settings(max_examples=50)
@given(st.integers(0, 575), st.integers(0, 575))
def test_index_arithmetic(so4_3, i, j):
    G = so4_3
    prod = G.mats(i) @ G.mats(j) % 3
    assert G.mul(i, j) == G.index_of(prod)
    assert G.mul(i, G.inverse[i]) == G.identity


def test_cache_roundtrip_and_corruption(tmp_path, caplog):
    G = enumerate_group(GL(2), 3, cache_dir=tmp_path)
    path = cache_path(GL(2), 3, tmp_path)
    assert path.exists()
    again = load_cache(GL(2), 3, tmp_path)
    assert np.array_equal(again.mats(), G.mats())
    path.write_bytes(path.read_bytes()[:-7])
    with caplog.at_level(logging.WARNING):
        assert load_cache(GL(2), 3, tmp_path) is None
    assert "corrupt" in caplog.text
    rebuilt = enumerate_group(GL(2), 3, cache_dir=tmp_path)
    assert rebuilt.order == 48


# -------------------------------------------------------------- root data


@settings(max_examples=60)
@given(st.sampled_from([3, 5, 7]), st.data())
def test_torus_conjugates_root_elements(q, data):
    kind = data.draw(st.sampled_from([SO_even(2), SO_even(3), SO_odd(2), GL(3)]))
    alpha = data.draw(st.sampled_from(positive_roots(kind)))
    if data.draw(st.booleans()):
        alpha = tuple(-a for a in alpha)
    x = data.draw(st.integers(0, q - 1))
    ts = data.draw(st.lists(st.integers(1, q - 1), min_size=kind.rank, max_size=kind.rank))
    t = torus_element(kind, q, ts)
    tinv = np.diag([pow(int(d), q - 2, q) for d in np.diag(t)])
    lhs = t @ root_element(kind, q, alpha, x) @ tinv % q
    rhs = root_element(kind, q, alpha, root_char_value(alpha, ts, q) * x % q)
    assert np.array_equal(lhs, rhs)


def test_root_elements_are_in_the_group():
    for kind in (SO_even(3), SO_odd(2)):
        for a in positive_roots(kind):
            g = root_element(kind, 5, a, 2)
            assert preserves_form(g, 5) and mdet(g, 5) == 1


# --------------------------------------------------------------- bruhat


@settings(max_examples=40)
@given(st.integers(0, 575))
def test_bruhat_roundtrip_so4(so4_3, i):
    g = so4_3.mats(i)
    assert np.array_equal(bruhat_decompose(so4_3.kind, g, 3).product(3), g)


@settings(max_examples=40)
@given(st.integers(0, 11231))
def test_bruhat_roundtrip_gl3(gl3_3, i):
    g = gl3_3.mats(i)
    assert np.array_equal(bruhat_decompose(gl3_3.kind, g, 3).product(3), g)


# ---------------------------------------------------------------- siegel


@pytest.mark.parametrize("n,q", [(1, 3), (1, 5), (2, 3)])
def test_siegel_classes_match_double_cosets(n, q):
    H = enumerate_group(SO_odd(n), q)
    Gn = enumerate_group(GL(n), q)
    V = enumerate_V(n, q)
    Q = (np.matmul(np.stack([el.l_n(a, q) for a in Gn.mats()])[:, None], V[None]) % q).reshape(-1, 2 * n + 1, 2 * n + 1)
    in_q = set(H.index_of(Q).tolist())
    big = set(H.index_of(np.matmul(np.matmul(Q[:, None], el.w_n(n, q))[:, None], V[None, :]).reshape(-1, 2 * n + 1, 2 * n + 1) % q).tolist())
    for i, g in enumerate(H.mats()):
        d = siegel_decompose(n, g, q)
        if i in in_q:
            assert isinstance(d, QPart)
        elif i in big:
            assert isinstance(d, OpenCell)
        else:
            assert isinstance(d, Other)


@settings(max_examples=30)
@given(st.integers(0, 47), st.integers(0, 26))
def test_siegel_levi_roundtrip(a_idx, v_idx):
    q, n = 3, 2
    a = enumerate_group(GL(2), q).mats(a_idx)
    v = enumerate_V(n, q)[v_idx]
    d = siegel_decompose(n, el.l_n(a, q) @ v % q, q)
    assert isinstance(d, QPart)
    assert np.array_equal(d.a, a) and np.array_equal(d.v, v)


def test_unipotent_sizes():
    assert len(enumerate_V(2, 3)) == 27
    assert len(enumerate_R(3, 1, 3)) == 3
    assert not psi_prime_coeffs(2, 1, 3).any()


# ------------------------------------------------------------ embeddings


def test_low_embedding_is_an_injective_homomorphism(so3_3, rng):
    q, l, n = 3, 2, 1
    m = so3_3.mats()
    img = embed_odd_in_even(l, n, m, q)
    assert np.all(preserves_form(img, q)) and np.all(mdet(img, q) == 1)
    assert len(np.unique(keys(img, q))) == so3_3.order
    i, j = rng.integers(so3_3.order, size=(2, 1000))
    lhs = np.matmul(img[i], img[j]) % q
    rhs = embed_odd_in_even(l, n, np.matmul(m[i], m[j]) % q, q)
    assert np.array_equal(lhs, rhs)


def test_top_embedding_is_an_injective_homomorphism(so4_3):
    q, l = 3, 2
    m = so4_3.mats()
    img = embed_even_in_odd(l, m, q)
    assert np.all(preserves_form(img, q)) and np.all(mdet(img, q) == 1)
    assert len(np.unique(keys(img, q))) == so4_3.order
    for a, b in itertools.product(range(0, 576, 23), repeat=2):
        assert np.array_equal(img[a] @ img[b] % q, embed_even_in_odd(l, m[a] @ m[b] % q, q))


def test_low_embedding_levi(rng):
    q, l, n = 5, 3, 2
    a = enumerate_group(GL(n), q).mats(int(rng.integers(480)))
    w = el.w_ln(l, n)
    got = w @ embed_odd_in_even(l, n, el.l_n(a, q), q) @ w.T % q
    assert np.array_equal(got, el.q_n(a, l, q))


@pytest.mark.parametrize("l,q", [(2, 3), (2, 5), (3, 3)])
def test_torus_image_closed_form(l, q):
    for ts in itertools.product(range(1, q), repeat=l):
        t = torus_element(SO_even(l), q, ts)
        assert np.array_equal(embed_even_in_odd(l, t, q), torus_image_closed_form(l, ts, q))


def test_embedding_rejects_non_members():
    bad = ident(4)
    bad[0, 0] = 2
    with pytest.raises(FormError):
        embed_even_in_odd(2, bad, 3, check=True)


# ------------------------------------------------------- named elements


@pytest.mark.parametrize("l", [2, 3, 4, 5])
@pytest.mark.parametrize("q", [3, 5])
def test_special_elements_are_members(l, q):
    se = el.special_elements(l, q)  # raises FormError on any non-member
    for n in range(1, l - 1):
        w = se.w_ln[n]
        assert np.array_equal(se.w_tilde[n], w @ se.w_hat[n] @ w.T % q)


def bareiss_det(m):
    """Exact integer determinant (fraction-free elimination)."""
    m = [list(map(int, row)) for row in m]
    n, sign, prev = len(m), 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@pytest.mark.parametrize("n", [6, 10, 12])
def test_determinant_matches_exact_oracle(rng, n):
    a = rng.integers(0, 5, size=(4, n, n))
    a[0, :, 0] = 0  # one singular case
    assert list(mdet(a, 5)) == [bareiss_det(m) % 5 for m in a]


def test_t_tilde_degenerates_at_three():
    assert np.array_equal(el.t_tilde(2, 3), ident(4))


@pytest.mark.parametrize("l", [2, 4, 6])
def test_w_tilde_prime_even_rank(l):
    z = np.zeros((l, l), dtype=int)
    expect = np.block([[z, np.eye(l, dtype=int)], [np.eye(l, dtype=int), z]])
    assert np.array_equal(el.w_tilde_prime_top(l), expect)


def test_w_hat_one_is_in_so4():
    w = el.w_hat(2, 1)
    assert preserves_form(w, 3) and mdet(w, 3) == 1


def test_twisted_cell_matrix_is_an_involution():
    A = el.A_rational()
    sq = el.fraction_matmul(A, A)
    assert sq == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_outer_element_normalizes(so4_3):
    c = el.c_elem(2)
    assert np.all(so4_3.contains(np.matmul(np.matmul(c, so4_3.mats()), c) % 3))
    assert mdet(c, 3) == 2  # determinant -1


def test_elements_reject_bad_rank():
    with pytest.raises(DomainError):
        el.w_tilde(2, 2)
