"""Acceptance criteria 1 to 8, each run at its stated tolerance and recorded as one line.

Criteria that do not hold are strict xfails: the check runs in full, the
recorded line says FAIL with the offending checks, and the suite turns red if
they ever start passing unnoticed.
"""

import time

import pytest

from soconverse.core import Tolerance
from soconverse.groups import elements as el
from soconverse.groups.finite import enumerate_group
from soconverse.groups.kinds import GL, SO_even, SO_odd
from soconverse.harness import REGISTRY, SuiteConfig, run_suite

TOL = Tolerance(eq_abs=1e-8, gamma_rel=1e-6, eig_gap=Tolerance().eig_gap)


def _summary(records):
    bad = [f"{c.name}@{tag}" for tag, c in records if c.status == "fail"]
    skipped = [f"{c.name}@{tag}" for tag, c in records if c.status == "skip"]
    return bad, skipped


def _select(report, suites, tag):
    names = {n for s in suites for n, _, _ in REGISTRY[s]}
    return [(tag, c) for c in report.checks if c.name in names]


@pytest.fixture(scope="module")
def full_runs():
    runs = {}
    for l, q in [(2, 3), (2, 5)]:
        t0 = time.perf_counter()
        rep = run_suite(SuiteConfig(l=l, q=q, tol=TOL, timings=True))
        runs[(l, q)] = (rep, time.perf_counter() - t0)
    return runs


def _suite_seconds(report, suites):
    names = {n for s in suites for n, _, _ in REGISTRY[s]}
    return sum(c.runtime_ms for c in report.checks if c.name in names) / 1000


@pytest.mark.xfail(strict=True, reason="GL-lift claim has a counterexample at l = 2 (see decisions ledger)")
def test_criterion_1_weyl(criterion):
    t0 = time.perf_counter()
    records = []
    for l in range(2, 8):
        rep = run_suite(SuiteConfig(l=l, q=3, suites=("weyl",), tol=TOL))
        records += [(f"l={l}", c) for c in rep.checks]
    dt = time.perf_counter() - t0
    bad, skipped = _summary(records)
    # l = 7 is outside the stated range of the two claims it skips
    assert all(tag == "l=7" for tag in (s.split("@")[1] for s in skipped))
    ok = criterion(1, not bad and dt < 30, f"{len(records)} checks in {dt:.1f}s; failing: {bad or 'none'}")
    assert ok


def test_criterion_2_groups(criterion, tmp_path):
    t0 = time.perf_counter()
    orders = {
        "SO_4(3)": enumerate_group(SO_even(2), 3, cache_dir=tmp_path).order,
        "SO_4(5)": enumerate_group(SO_even(2), 5, cache_dir=tmp_path).order,
        "SO_5(3)": enumerate_group(SO_odd(2), 3, cache_dir=tmp_path).order,
        "GL_2(3)": enumerate_group(GL(2), 3, cache_dir=tmp_path).order,
        "GL_2(5)": enumerate_group(GL(2), 5, cache_dir=tmp_path).order,
    }
    expect = {"SO_4(3)": 576, "SO_4(5)": 14400, "SO_5(3)": 51840, "GL_2(3)": 48, "GL_2(5)": 480}
    records = []
    for q in (3, 5):
        rep = run_suite(SuiteConfig(l=2, q=q, suites=("groups",), tol=TOL, cache_dir=str(tmp_path / f"c{q}")))
        records += [(f"q={q}", c) for c in rep.checks]
    A = el.A_rational()
    a_squared_is_identity = el.fraction_matmul(A, A) == [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    dt = time.perf_counter() - t0
    bad, skipped = _summary(records)
    ok = orders == expect and not bad and a_squared_is_identity and dt < 60
    criterion(2, ok, f"orders {orders}; A^2 = I: {a_squared_is_identity}; failing: {bad or 'none'}; "
                     f"{dt:.1f}s cold cache")
    assert ok


@pytest.mark.xfail(strict=True, reason="upper-triangular vanishing has a counterexample at (2,3) (see decisions ledger)")
def test_criterion_3_bessel(criterion, full_runs):
    suites = ("decompose", "bessel")
    records, times = [], []
    for key, (rep, _) in full_runs.items():
        records += _select(rep, suites, key)
        times.append(_suite_seconds(rep, suites))
    bad, skipped = _summary(records)
    ok = not bad and not skipped and max(times) < 120
    criterion(3, ok, f"{len(records)} checks, max {max(times):.1f}s; failing: {bad or 'none'}")
    assert ok


def test_criterion_4_zeta_gamma(criterion, full_runs):
    suites = ("zeta", "cells", "gamma")
    records = []
    for key, (rep, _) in full_runs.items():
        records += _select(rep, suites, key)
    bad, skipped = _summary(records)
    # the n <= l - 2 nonvanishing case has no instance at l = 2
    assert {s.split("@")[0] for s in skipped} <= {"zeta.fv_low"}
    rep25, wall = full_runs[(2, 5)]
    ok = not bad and wall < 600
    criterion(4, ok, f"{len(records)} checks; (2,5) full run {wall:.0f}s; failing: {bad or 'none'}; "
                     f"vacuous: {skipped or 'none'}")
    assert ok


def test_criterion_5_multiplicity_one(criterion, full_runs):
    rep, _ = full_runs[(2, 3)]
    records = _select(rep, ("multone",), (2, 3))
    bad, skipped = _summary(records)
    ok = not bad and not skipped
    criterion(5, ok, f"{[(c.name, c.count) for _, c in records]}; failing: {bad or 'none'}")
    assert ok


def test_criterion_6_converse(criterion, full_runs):
    records, notes = [], []
    for key, (rep, _) in full_runs.items():
        records += _select(rep, ("converse",), key)
        notes.append(f"{key}: " + next(c.note for c in rep.checks if c.name == "converse.classes"))
    bad, skipped = _summary(records)
    ok = not bad and not skipped
    criterion(6, ok, f"{'; '.join(notes)}; failing: {bad or 'none'}")
    assert ok


@pytest.mark.xfail(strict=True, reason="SO_6(F_3) and its Gelfand-Graev module exceed sandbox memory "
                                       "(see decisions ledger)")
def test_criterion_7_slow_tier(criterion):
    suites = ("decompose", "bessel", "gamma", "multone", "converse")
    rep = run_suite(SuiteConfig(l=3, q=3, slow=True, suites=suites, tol=TOL))
    records = [((3, 3), c) for c in rep.checks]
    bad, skipped = _summary(records)
    reasons = sorted({c.note for _, c in records if c.status == "skip"})
    ok = not bad and not skipped
    criterion(7, ok, f"{len(skipped)} of {len(records)} checks could not run: {reasons}")
    assert ok


def test_criterion_8_determinism(criterion):
    cfg = SuiteConfig(l=2, q=3, tol=TOL)
    a, b = run_suite(cfg).to_json(), run_suite(cfg).to_json()
    ok = a == b
    criterion(8, ok, f"two (2,3) full runs, {len(a)} bytes, identical: {ok}")
    assert ok
