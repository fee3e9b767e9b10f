import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soconverse.genrep import (
    GGModule,
    annotate,
    central_character,
    central_elements,
    conjugate_bessel,
    export_bessel_csv,
    gelfand_graev_decompose,
    generic_character,
)
from soconverse.groups.finite import enumerate_group
from soconverse.groups.kinds import GL, SO_even, group_order
from soconverse.zeta import character_tables


def gl2_classical_dims(q):
    """Dimensions of the generic irreducibles of GL_2(F_q): principal series, Steinberg twists, cuspidal."""
    return [q + 1] * ((q - 1) * (q - 2) // 2) + [q] * (q - 1) + [q - 1] * (q * (q - 1) // 2)


@pytest.fixture(scope="module")
def gl2_3():
    G = enumerate_group(GL(2), 3)
    reps = gelfand_graev_decompose(GGModule(G, generic_character(G)))
    annotate(reps)
    return reps


# ------------------------------------------------------------ decomposition


def test_so4_3_dimensions(ws23):
    dims = [p.dim for p in ws23.pis]
    assert sum(dims) == 64 == ws23.module.dim
    assert dims == [2, 4, 4, 6, 6, 8, 8, 8, 9, 9]


def test_so4_5_dimensions(ws25):
    dims = [p.dim for p in ws25.pis]
    assert sum(dims) == group_order(SO_even(2), 5) // 25 == 576
    assert len(dims) == 26


@pytest.mark.parametrize("q", [3, 5])
def test_gl2_matches_classical_character_theory(q):
    G = enumerate_group(GL(2), q)
    reps = gelfand_graev_decompose(GGModule(G, generic_character(G)))
    assert sorted(p.dim for p in reps) == sorted(gl2_classical_dims(q))


def test_gl2_cuspidal_iff_dimension_q_minus_1(gl2_3):
    assert all(p.cuspidal == (p.dim == 2) for p in gl2_3)
    assert sum(p.cuspidal for p in gl2_3) == 3


def test_decomposition_independent_of_seed(ws23):
    other = gelfand_graev_decompose(ws23.module, seed=1)
    assert [p.fingerprint for p in other] == [p.fingerprint for p in ws23.pis]
    for a, b in zip(other, ws23.pis):
        assert np.max(np.abs(a.bessel - b.bessel)) < 1e-10


def test_summands_are_invariant_and_orthogonal(ws23):
    P = sum(p.projector for p in ws23.pis)
    assert np.allclose(P, np.eye(ws23.module.dim), atol=1e-10)
    C = ws23.characters
    gram = C @ C.conj().T / ws23.G.order
    assert np.allclose(gram, np.eye(len(ws23.pis)), atol=1e-10)


def test_character_tables_match_direct_traces(ws23):
    C = character_tables(ws23.pis)
    for p in ws23.pis[::3]:
        for g in range(0, ws23.G.order, 37):
            assert abs(C[p.index, g] - p.character(g)) < 1e-10
            assert abs(p.character_from_bessel(g) - p.character(g)) < 1e-10


def test_hecke_operators_commute(ws25, rng):
    a = ws25.module.random_hermitian_hecke(rng)
    b = ws25.module.random_hermitian_hecke(rng)
    assert np.linalg.norm(a @ b - b @ a) < 1e-8 * np.linalg.norm(a) * np.linalg.norm(b)


# ----------------------------------------------------------------- bessel


def test_bessel_normalized(ws23, ws25):
    for ws in (ws23, ws25):
        assert np.allclose(ws.B[:, ws.G.identity], 1)


def test_bessel_from_characters(ws23):
    # B(g) = |U|^-2 sum psi(u1)^-1 psi(u2)^-1 chi(u1 g u2), an independent route
    G, U = ws23.G, ws23.G.U
    psi = generic_character(G)(G.mats(U))
    g = np.arange(G.order)
    for p in ws23.pis:
        chi = ws23.characters[p.index]
        acc = np.zeros(G.order, dtype=complex)
        for a, pa in zip(U, psi):
            left = G.mul(a, g)
            for b, pb in zip(U, psi):
                acc += np.conj(pa * pb) * chi[G.mul(left, b)]
        assert np.max(np.abs(acc / len(U) ** 2 - ws23.B[p.index])) < 1e-10


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_bessel_bi_equivariance(ws25, data):
    G, U = ws25.G, ws25.G.U
    psi = generic_character(G)
    u1, u2 = (int(data.draw(st.sampled_from(U.tolist()))) for _ in range(2))
    g = data.draw(st.integers(0, G.order - 1))
    lhs = ws25.B[:, G.mul(G.mul(u1, g), u2)]
    rhs = psi(G.mats(u1)) * psi(G.mats(u2)) * ws25.B[:, g]
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_bessel_vanishes_on_noncentral_torus(ws25):
    central = set(central_elements(ws25.G))
    off = [t for t in ws25.G.T if int(t) not in central]
    assert len(off) == 14
    assert np.max(np.abs(ws25.B[:, off])) < 1e-10


def test_dimension_from_bessel(ws25):
    for p in ws25.pis:
        assert abs(p.dim_from_bessel() - p.dim) < 1e-8


# ---------------------------------------------------------- conjugation


def test_conjugate_bessel_is_a_normalized_summand(ws25):
    G = ws25.G
    for p in ws25.pis:
        bc = conjugate_bessel(p)
        partner = ws25.pis[p.partner]
        assert abs(ws25.module.evaluate(bc, G.identity) - 1) < 1e-10
        assert np.max(np.abs(partner.bessel - bc)) < 1e-10
        assert ws25.pis[partner.partner] is p
        assert partner.dim == p.dim


def test_central_character(ws25):
    z = ws25.minus_one
    for p in ws25.pis:
        w = central_character(p, z)
        assert abs(w * w - 1) < 1e-10
        assert np.allclose(ws25.module.apply(z, p.basis), w * p.basis, atol=1e-10)
        assert abs(w - central_character(ws25.pis[p.partner], z)) < 1e-10


# ----------------------------------------------------------- cuspidality


def test_cuspidal_counts(ws23, ws25):
    assert len(ws23.cusp) == 3
    assert all(p.partner == p.index for p in ws23.cusp)
    assert len(ws25.cusp) == 7
    assert sum(p.partner != p.index for p in ws25.cusp) == 2


# ---------------------------------------------------------------- export


def test_export_bessel_csv(ws23, tmp_path):
    p = ws23.cusp[0]
    path = export_bessel_csv(p, tmp_path / "b.csv")
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == ws23.module.dim
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    assert np.max(np.abs(vals - p.bessel)) < 1e-9
