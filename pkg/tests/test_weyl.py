import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soconverse.core import DomainError
from soconverse.groups import elements as el
from soconverse.weyl import (
    CellClass,
    WeylElement,
    bessel_support,
    c_signed,
    classify_cell,
    corank_one_factorization,
    gl_lifts_in_support,
    p_set,
    partition,
    theta_of,
    top_shape_mismatches,
    w_tilde,
    w_tilde_action_mismatches,
    w_tilde_prime_top,
)


# ---------------------------------------------------------------- oracle
# An independent description of W(D_l): signed permutations with an even
# number of sign changes. The matrix of w moves t_j to slot |s_j| (inverted when
# s_j < 0), and roots transform by (w.alpha)(t) = alpha(w t w^-1).


def oracle_group(l):
    for perm in itertools.permutations(range(1, l + 1)):
        for signs in itertools.product((1, -1), repeat=l):
            if signs.count(-1) % 2 == 0:
                yield tuple(s * p for s, p in zip(signs, perm))


def oracle_act(images, alpha):
    # alpha(w t w^-1) = prod_k s_k^{a_k} with s_{|s_j|} = t_j^{sign s_j}
    return tuple((1 if s > 0 else -1) * alpha[abs(s) - 1] for s in images)


def oracle_simple(l):
    rows = np.eye(l, dtype=int)
    out = [tuple(rows[i] - rows[i + 1]) for i in range(l - 1)]
    out.append(tuple(rows[l - 2] + rows[l - 1]))
    return out


def oracle_support(l):
    simple = oracle_simple(l)
    out = {}
    for images in oracle_group(l):
        theta, ok = set(), True
        for k, a in enumerate(simple, start=1):
            b = oracle_act(images, a)
            if next(x for x in b if x) > 0:
                theta.add(k)
                ok &= b in simple
        if ok:
            out[images] = frozenset(theta)
    return out


signed_perms = st.integers(2, 6).flatmap(
    lambda l: st.tuples(st.permutations(range(1, l + 1)), st.lists(st.booleans(), min_size=l, max_size=l))
).map(lambda t: WeylElement(tuple(-p if s else p for p, s in zip(*t))))


def pair_of_same_rank():
    return st.integers(2, 6).flatmap(
        lambda l: st.tuples(*[
            st.tuples(st.permutations(range(1, l + 1)), st.lists(st.booleans(), min_size=l, max_size=l))
            for _ in range(3)
        ])
    ).map(lambda ts: [WeylElement(tuple(-p if s else p for p, s in zip(*t))) for t in ts])


# ---------------------------------------------------------------- support


@pytest.mark.parametrize("l", range(2, 8))
def test_support_has_2_to_the_l_elements(l):
    assert len(bessel_support(l)) == 2**l


@pytest.mark.parametrize("l", range(2, 6))
def test_support_matches_oracle(l):
    supp = bessel_support(l)
    expected = oracle_support(l)
    got = {w.images: t for w, t in zip(supp.elements, supp.thetas)}
    assert got == expected


@pytest.mark.parametrize("l", [5, 6])
def test_theta_is_a_bijection_onto_subsets(l):
    thetas = bessel_support(l).thetas
    assert len(set(thetas)) == 2**l


@given(signed_perms)
def test_theta_agrees_with_oracle(w):
    simple = oracle_simple(w.l)
    theta = {k for k, a in enumerate(simple, 1) if next(x for x in oracle_act(w.images, a) if x) > 0}
    assert theta_of(w)[0] == theta


# ---------------------------------------------------------- group laws


@given(pair_of_same_rank())
def test_multiplication_is_associative_and_matches_matrices(ws):
    a, b, c = ws
    assert (a * b) * c == a * (b * c)
    assert np.array_equal(a.matrix() @ b.matrix(), (a * b).matrix())
    assert a * a.inverse() == WeylElement.identity(a.l)


@given(signed_perms, st.data())
def test_action_is_linear_and_composes(w, data):
    l = w.l
    alpha = tuple(data.draw(st.lists(st.integers(-3, 3), min_size=l, max_size=l)))
    assert w.act(alpha) == oracle_act(w.images, alpha)
    assert w.inverse().act(w.act(alpha)) == alpha


@given(signed_perms)
def test_matrix_roundtrip_and_conjugation(w):
    assert WeylElement.from_matrix(w.matrix()) == w
    assert w.conj_c().conj_c() == w
    assert w.conj_c().parity == w.parity


def test_rejects_non_permutation():
    with pytest.raises(DomainError):
        WeylElement((1, 1))


def test_c_is_an_odd_signed_permutation():
    assert not c_signed(4).in_D
    c = el.c_elem(4)
    assert np.array_equal(c @ c, np.eye(8, dtype=int))


# ------------------------------------------------------------- partition


FROZEN_CLASS_SIZES = {
    2: [1, 1, 1, 1],
    3: [1, 1, 2, 2, 2],
    4: [1, 1, 2, 4, 4, 4],
    5: [1, 1, 2, 4, 8, 8, 8],
    6: [1, 1, 2, 4, 8, 16, 16, 16],
}


@pytest.mark.parametrize("l", range(2, 8))
def test_classes_partition_the_support(l):
    part = partition(l)
    flat = [w for ws in part.values() for w in ws]
    assert len(flat) == len(set(flat)) == 2**l
    assert set(flat) == set(bessel_support(l).elements)


@pytest.mark.parametrize("l", sorted(FROZEN_CLASS_SIZES))
def test_class_sizes(l):
    assert [len(v) for v in partition(l).values()] == FROZEN_CLASS_SIZES[l]


@pytest.mark.parametrize("l", range(2, 8))
def test_classes_characterized_by_theta(l):
    supp = bessel_support(l)
    for cls, members in partition(l).items():
        got = {supp.thetas[supp.elements.index(w)] for w in members}
        assert got == p_set(l, cls), cls.label()


def test_identity_is_the_only_small_cell():
    assert partition(4)[CellClass(0)] == [WeylElement.identity(4)]


def test_rank_three_p_sets():
    sizes = {c.label(): len(p_set(3, c)) for c in partition(3)}
    assert sizes == {"B_0": 1, "B_1": 1, "B_2": 2, "B_3": 2, "B_3^c": 2}


def test_classify_rejects_outside_support():
    w = WeylElement((2, 1, 3))
    assert not theta_of(w)[1]
    with pytest.raises(DomainError):
        classify_cell(w)


# --------------------------------------------------------- named elements


@pytest.mark.parametrize("l", range(3, 8))
def test_w_tilde_theta(l):
    full = set(range(1, l + 1))
    for n in range(1, l - 1):
        theta, ok = theta_of(w_tilde(l, n))
        assert ok and theta == full - {n}


@pytest.mark.parametrize("l", [3, 5, 7])
def test_w_tilde_prime_top_theta_for_odd_rank(l):
    theta, ok = theta_of(w_tilde_prime_top(l))
    assert ok and theta == set(range(1, l + 1)) - {l - 1}


@pytest.mark.parametrize("l", range(3, 8))
def test_w_tilde_root_action(l):
    assert w_tilde_action_mismatches(l) == []


@pytest.mark.parametrize("l", range(3, 7))
def test_gl_lifts_stay_outside_support(l):
    assert gl_lifts_in_support(l) == []


def test_gl_lift_counterexample_in_rank_two():
    # the lift of the transposition of GL_2 supports Bessel functions on SO_4
    assert gl_lifts_in_support(2) == [(1, 0)]


@pytest.mark.parametrize("l", [2, 3, 4, 5])
def test_top_class_shape(l):
    assert top_shape_mismatches(l) == []


@pytest.mark.parametrize("l,size", [(2, 1), (3, 2), (4, 4), (5, 8), (6, 16), (7, 32)])
def test_corank_one_factorization(l, size):
    assert corank_one_factorization(l) == (True, size)


@given(signed_perms, st.data())
def test_action_convention_against_matrices(w, data):
    # (w.alpha)(t) = alpha(w t w^-1), evaluated on a torus element of SO_2l(F_7)
    q, l = 7, w.l
    ts = data.draw(st.lists(st.integers(1, q - 1), min_size=l, max_size=l))
    diag = ts + [pow(t, q - 2, q) for t in reversed(ts)]
    m = w.matrix()
    s = np.diag(m @ np.diag(diag) @ m.T % q)[:l]
    for alpha in oracle_simple(l):
        beta = w.act(alpha)
        lhs = np.prod([pow(int(x), int(a) % (q - 1), q) for x, a in zip(s, alpha)]) % q
        rhs = np.prod([pow(int(t), int(b) % (q - 1), q) for t, b in zip(ts, beta)]) % q
        assert lhs == rhs
