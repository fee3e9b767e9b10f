"""Verification suites, deterministic reports and the converse-theorem experiment.

Each check is a function of a lazily built Workspace and returns an Outcome.
run_suite executes the checks of the requested suites in registry order and
collects one record per check. Heavy objects (the enumerated groups, the
decomposition, the gamma table) are built once per Workspace.
"""

from __future__ import annotations

import itertools
import json
import logging
import platform
import time
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .core import (
    DEFAULT_TOL,
    BudgetError,
    NumericsError,
    Tolerance,
    frac,
    is_prime,
    primitive_root,
    root_table,
)
from .genrep import (
    DEFAULT_SEED,
    GGModule,
    annotate,
    central_elements,
    conjugate_bessel,
    gelfand_graev_decompose,
    generic_character,
)
from .groups import elements as el
from .groups.bruhat import bruhat_cell, bruhat_decompose
from .groups.embed import embed_even_in_odd, embed_odd_in_even, torus_image_closed_form
from .groups.finite import enumerate_group, exhaustive_filter
from .groups.kinds import GL, SO_even, SO_odd, chevalley_generators, group_order, torus_element
from .groups.matrices import INT, ident, keys, mdet, preserves_form
from .groups.parabolic import enumerate_R, enumerate_V
from .groups.siegel import OpenCell, QPart, in_open_cell, siegel_decompose
from .weyl import (
    MAX_RANK,
    CellClass,
    WeylElement,
    bessel_support,
    classify_cell,
    corank_one_factorization,
    gl_lifts_in_support,
    p_set,
    partition,
    theta_of,
    top_shape_mismatches,
    w_tilde_action_mismatches,
)
from .zeta import (
    DEFAULT_PROBES,
    GammaTable,
    ZetaKernel,
    character_tables,
    corank_points,
    embedded_open_cell_condition,
    expected_fv_value,
    gamma_factor,
    gl_generic_reps,
    hom_dimensions,
    intertwined_reduction,
    intertwining_apply,
    open_cell_membership,
    random_section,
    random_whittaker,
    section_fv,
    top_torus_excluded,
    top_torus_involution,
    translate_section,
    translate_whittaker,
    whittaker,
    whittaker_star,
)

log = logging.getLogger(__name__)

SUITES = ("weyl", "groups", "decompose", "bessel", "zeta", "cells", "gamma", "multone", "converse")
DENSE_BUDGET = 2500  # largest Gelfand-Graev dimension decomposed without --slow
ODD_ORDER_BUDGET = 10**6  # largest odd group enumerated only for its order check


class ConfigError(ValueError):
    """Invalid configuration: reported with exit status 2 and no report."""


class Skip(Exception):
    """A check that cannot run under the current budget or rank."""


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class SuiteConfig:
    l: int = 2
    q: int = 3
    seed: int = DEFAULT_SEED
    tol: Tolerance = DEFAULT_TOL
    cache_dir: str | None = None
    slow: bool = False
    suites: tuple[str, ...] = ("all",)
    allow_noncuspidal: bool = False
    timings: bool = False
    probes: int = DEFAULT_PROBES

    def validate(self) -> "SuiteConfig":
        if not (isinstance(self.q, int) and self.q >= 3 and is_prime(self.q)):
            raise ConfigError(f"q = {self.q} is not an odd prime")
        if not 2 <= self.l <= MAX_RANK:
            raise ConfigError(f"l = {self.l} outside 2..{MAX_RANK}")
        unknown = set(self.suites) - set(SUITES) - {"all"}
        if unknown or not self.suites:
            raise ConfigError(f"unknown suites {sorted(unknown)}")
        if self.probes < 1:
            raise ConfigError("need at least one probe")
        return self

    @property
    def selected(self) -> tuple[str, ...]:
        if "all" in self.suites:
            return SUITES
        return tuple(s for s in SUITES if s in self.suites)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["tol"] = asdict(self.tol)
        d["suites"] = list(self.selected)
        return d


# ------------------------------------------------------------------ report


@dataclass(frozen=True)
class Outcome:
    ok: bool
    max_error: float | None = None
    count: int = 0
    note: str = ""


@dataclass(frozen=True)
class CheckRecord:
    name: str
    paper_anchor: str
    status: str
    max_error: float | None
    count: int
    runtime_ms: int | None
    note: str = ""


def _round(x: float | None) -> float | None:
    if x is None:
        return None
    return float(f"{float(x):.2e}")


@dataclass
class Report:
    config: SuiteConfig
    checks: list[CheckRecord] = field(default_factory=list)

    @property
    def failed(self) -> list[CheckRecord]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failed

    def summary(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "schema": "so-converse-report/1",
            "config": self.config.as_dict(),
            "seed": self.config.seed,
            "versions": {
                "soconverse": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "checks": [asdict(c) for c in self.checks],
            "summary": self.summary(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            err = "" if c.max_error is None else f" err={c.max_error:.1e}"
            note = f"  ({c.note})" if c.note else ""
            out.append(f"{c.status.upper():4} {c.name} [{c.paper_anchor}] n={c.count}{err}{note}")
        return out


# --------------------------------------------------------------- workspace


class Workspace:
    """Lazily built objects shared by the checks of one run."""

    def __init__(self, cfg: SuiteConfig):
        self.cfg = cfg
        self.l, self.q, self.tol = cfg.l, cfg.q, cfg.tol
        self._twists: dict[int, tuple] = {}
        self._kernels: dict[int, ZetaKernel] = {}
        self._odd: dict[int, object] = {}

    def rng(self, *tag: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, *tag])

    # groups
    @cached_property
    def G(self):
        order = group_order(SO_even(self.l), self.q)
        budget = 10**8 if self.cfg.slow else 10**7
        if order > budget:
            raise BudgetError(f"|SO_{2 * self.l}(F_{self.q})| = {order} exceeds the enumeration budget")
        return enumerate_group(SO_even(self.l), self.q, budget=budget, cache_dir=self.cfg.cache_dir)

    def odd(self, n: int):
        if n not in self._odd:
            self._odd[n] = enumerate_group(SO_odd(n), self.q, cache_dir=self.cfg.cache_dir)
        return self._odd[n]

    # representations
    @cached_property
    def module(self) -> GGModule:
        dim = group_order(SO_even(self.l), self.q) // self.q ** (self.l * (self.l - 1))
        if dim > DENSE_BUDGET and not self.cfg.slow:
            raise BudgetError(f"Gelfand-Graev dimension {dim} needs --slow")
        if dim**2 * 16 > 2 * 10**9:
            raise BudgetError(f"dense Gelfand-Graev operators of dimension {dim} do not fit in memory")
        return GGModule(self.G, generic_character(self.G))

    @cached_property
    def pis(self):
        reps = gelfand_graev_decompose(self.module, seed=self.cfg.seed, tol=self.tol)
        annotate(reps, self.tol)
        return reps

    @cached_property
    def cusp(self):
        return [p for p in self.pis if p.cuspidal]

    @cached_property
    def B(self) -> np.ndarray:
        """Bessel functions of every summand on every group element."""
        return self.module.evaluate(np.stack([p.bessel for p in self.pis]), np.arange(self.G.order))

    def twist(self, n: int):
        if n not in self._twists:
            self._twists[n] = gl_generic_reps(n, self.q, seed=self.cfg.seed)
        return self._twists[n]

    def kernel(self, n: int) -> ZetaKernel:
        self.module  # zeta kernels are useless without Bessel functions: fail the budget early
        if n not in self._kernels:
            ctx, _ = self.twist(n)
            odd = self.odd(n) if n < self.l else None
            self._kernels[n] = ZetaKernel(self.G, self.l, n, ctx, odd=odd)
        return self._kernels[n]

    @cached_property
    def minus_one(self) -> int:
        return int(self.G.index_of((-ident(2 * self.l)) % self.q))

    def omega(self, p) -> complex:
        return complex(self.B[p.index, self.minus_one])

    # gamma factors
    @cached_property
    def gammas(self) -> tuple[GammaTable, list[str]]:
        table, errors = GammaTable(), []
        targets = self.pis if self.cfg.allow_noncuspidal else self.cusp
        for n in range(1, self.l + 1):
            _, taus = self.twist(n)
            K = self.kernel(n)
            for p in targets:
                for t in taus:
                    try:
                        row = gamma_factor(p, t, K, probes=self.cfg.probes, seed=self.cfg.seed,
                                           tol=self.tol, allow_noncuspidal=self.cfg.allow_noncuspidal,
                                           B_full=self.B[p.index])
                    except NumericsError as exc:
                        errors.append(f"pi{p.index} x tau{t.index} (n={n}): {exc}")
                        continue
                    table.add(f"pi{p.index}", n, t.fingerprint, row)
        return table, errors

    @cached_property
    def characters(self) -> np.ndarray:
        return character_tables(self.pis)


# ------------------------------------------------------------------ helpers


def _maxerr(*arrs) -> float:
    vals = [float(np.max(np.abs(a))) for a in arrs if np.size(a)]
    return max(vals) if vals else 0.0


def _n_range(ws: Workspace):
    return range(1, ws.l + 1)


def _random_vector(ctx, tau, rng: np.random.Generator, terms: int = 3) -> np.ndarray:
    v = np.zeros(ctx.module.dim, dtype=complex)
    for _ in range(terms):
        c = rng.standard_normal() + 1j * rng.standard_normal()
        v += c * ctx.module.apply(int(rng.integers(ctx.GL.order)), tau.bessel)
    return v


# --------------------------------------------------------------- weyl checks


def chk_support_size(ws):
    n = len(bessel_support(ws.l))
    return Outcome(n == 2**ws.l, count=n, note=f"|B| = {n}")


def chk_theta_bijection(ws):
    supp = bessel_support(ws.l)
    distinct = len(set(supp.thetas))
    recomputed = all(theta_of(w) == (t, True) for w, t in zip(supp.elements, supp.thetas))
    return Outcome(distinct == 2**ws.l == len(supp) and recomputed, count=len(supp))


def chk_partition(ws):
    part = partition(ws.l)
    flat = [w for ws_ in part.values() for w in ws_]
    ok = len(flat) == len(set(flat)) and set(flat) == set(bessel_support(ws.l).elements)
    sizes = ", ".join(f"{c.label()}:{len(v)}" for c, v in part.items())
    return Outcome(ok, count=len(flat), note=sizes)


def chk_class_characterization(ws):
    supp = bessel_support(ws.l)
    ok = True
    for cls, members in partition(ws.l).items():
        got = {supp.thetas[supp.elements.index(w)] for w in members}
        ok &= got == p_set(ws.l, cls)
    return Outcome(ok, count=len(supp))


def chk_w_tilde_action(ws):
    bad = w_tilde_action_mismatches(ws.l)
    return Outcome(not bad, count=max(ws.l - 2, 0), note=f"mismatches {bad}" if bad else "")


def chk_gl_lift(ws):
    if ws.l > 6:
        raise Skip("stated for l <= 6")
    bad = gl_lifts_in_support(ws.l)
    note = f"lifts inside the support: {bad}" if bad else ""
    return Outcome(not bad, count=len(bad), note=note)


def chk_top_shape(ws):
    if ws.l > 6:
        raise Skip("exhaustive scan limited to l <= 6")
    bad = top_shape_mismatches(ws.l)
    return Outcome(not bad, count=2**ws.l // 2, note=f"mismatches {bad}" if bad else "")


def chk_corank_shape(ws):
    ok, n = corank_one_factorization(ws.l)
    return Outcome(ok, count=n)


# -------------------------------------------------------------- group checks


def chk_orders(ws):
    l, q = ws.l, ws.q
    notes, ok, count = [], True, 0
    G = ws.G
    ok &= G.order == group_order(SO_even(l), q)
    count += 1
    if G.order <= 10**5:
        ok &= np.array_equal(exhaustive_filter(SO_even(l), q), keys(G.mats(), q))
        notes.append(f"SO_{2 * l} filter")
    for n in range(1, l + 1):
        if group_order(SO_odd(n), q) > ODD_ORDER_BUDGET:
            notes.append(f"SO_{2 * n + 1} skipped")
            continue
        H = ws.odd(n)
        ok &= H.order == group_order(SO_odd(n), q)
        count += 1
    for n in range(1, l + 1):
        ok &= ws.twist(n)[0].GL.order == group_order(GL(n), q)
        count += 1
    return Outcome(bool(ok), count=count, note="; ".join(notes))


def chk_membership(ws):
    ok = ws.G.verify_membership() and ws.G.verify_closure(ws.rng(1))
    count = ws.G.order
    for n in range(1, ws.l):
        ok &= ws.odd(n).verify_membership()
        count += ws.odd(n).order
    return Outcome(bool(ok), count=count)


def _hom_on_generators(f, mats, gens, q) -> bool:
    """f(g s) = f(g) f(s) for every g and generator s: with f(I) = I this is a homomorphism."""
    img = f(mats)
    for s in gens:
        lhs = f(np.matmul(mats, s) % q)
        rhs = np.matmul(img, f(s[None])[0]) % q
        if not np.array_equal(lhs, rhs):
            return False
    return True


def chk_embed_low(ws):
    l, q = ws.l, ws.q
    count = 0
    ok = True
    for n in range(1, l):
        H = ws.odd(n)
        m = H.mats()
        f = lambda g: embed_odd_in_even(l, n, g, q)
        img = f(m)
        ok &= bool(np.all(preserves_form(img, q)) and np.all(mdet(img, q) == 1))
        ok &= np.array_equal(f(ident(2 * n + 1)[None])[0], ident(2 * l))
        ok &= _hom_on_generators(f, m, chevalley_generators(SO_odd(n), q), q)
        ok &= len(np.unique(keys(img, q))) == H.order
        count += H.order
    return Outcome(bool(ok), count=count)


def chk_embed_top(ws):
    l, q, G = ws.l, ws.q, ws.G
    m = G.mats()
    f = lambda g: embed_even_in_odd(l, g, q)
    img = f(m)
    ok = bool(np.all(preserves_form(img, q)) and np.all(mdet(img, q) == 1))
    ok &= _hom_on_generators(f, m, chevalley_generators(SO_even(l), q), q)
    ok &= len(np.unique(keys(img, q))) == G.order
    return Outcome(ok, count=G.order)


def chk_torus_image(ws):
    l, q = ws.l, ws.q
    ok, count = True, 0
    for ts in itertools.product(range(1, q), repeat=l):
        t = torus_element(SO_even(l), q, ts)
        ok &= np.array_equal(embed_even_in_odd(l, t, q), torus_image_closed_form(l, ts, q))
        count += 1
    return Outcome(bool(ok), count=count)


def chk_outer(ws):
    G, l, q = ws.G, ws.l, ws.q
    c = el.c_elem(l)
    conj = np.matmul(np.matmul(c, G.mats()), c) % q
    ok = bool(np.all(G.contains(conj))) and np.array_equal(c @ c, ident(2 * l))
    return Outcome(ok, count=G.order)


def chk_special(ws):
    l, q = ws.l, ws.q
    se = el.special_elements(l, q)
    ok = True
    for n in range(1, l - 1):
        lhs = se.w_tilde[n]
        w = se.w_ln[n]
        rhs = w @ se.w_hat[n] @ w.T % q
        ok &= np.array_equal(lhs, rhs)
    tt = np.diag(se.t_tilde)
    expect = [1] * (l - 1) + [frac(-1, 2, q), (-2) % q] + [1] * (l - 1)
    ok &= list(tt) == expect
    return Outcome(bool(ok), count=1 + max(l - 2, 0))


def chk_bruhat(ws):
    l, q = ws.l, ws.q
    groups = [ws.G, ws.twist(l)[0].GL]
    count, ok = 0, True
    for H in groups:
        if H.order > 20000:
            idx = ws.rng(2).choice(H.order, 20000, replace=False)
        else:
            idx = np.arange(H.order)
        for g in H.mats(idx):
            b = bruhat_decompose(H.kind, g, q)
            ok &= np.array_equal(b.product(q), g)
            count += 1
    return Outcome(bool(ok), count=count)


def chk_siegel(ws):
    l, q = ws.l, ws.q
    ok, count = True, 0
    rng = ws.rng(3)
    for n in range(1, l + 1):
        ctx, _ = ws.twist(n)
        ok &= len(ctx.V) == q ** (n * (n + 1) // 2)
        expect = group_order(SO_odd(n), q) // (group_order(GL(n), q) * len(ctx.V))
        ok &= len(ctx.cosets) == expect
        if n < l:
            ok &= len(enumerate_R(l, n, q)) == q ** (n * (l - n - 1))
        # round trips on random elements of the Levi, V_n and the open cell
        for _ in range(20):
            a = ctx.GL.mats(int(rng.integers(ctx.GL.order)))
            v1 = ctx.V[int(rng.integers(len(ctx.V)))]
            v2 = ctx.V[int(rng.integers(len(ctx.V)))]
            qa = el.l_n(a, q) @ v1 % q
            d = siegel_decompose(n, qa, q)
            ok &= isinstance(d, QPart) and np.array_equal(d.a, a)
            g = qa @ el.w_n(n, q) @ v2 % q
            d = siegel_decompose(n, g, q)
            ok &= isinstance(d, OpenCell)
            count += 2
    return Outcome(bool(ok), count=count)


def chk_twisted_cell_matrix(ws):
    A = el.A_rational()
    sq = el.fraction_matmul(A, A)
    ok = all(sq[i][j] == (1 if i == j else 0) for i in range(3) for j in range(3))
    return Outcome(ok, count=9)


# ------------------------------------------------------------- bessel checks


def chk_completeness(ws):
    dims = [p.dim for p in ws.pis]
    ok = sum(dims) == ws.module.dim and sum(d * d for d in dims) <= ws.G.order
    err = max(abs(p.dim_from_bessel() - p.dim) for p in ws.pis)
    ok &= err < 1e-6
    return Outcome(ok, max_error=err, count=len(dims), note=f"dims {dims}")


def chk_hecke_commute(ws):
    rng = ws.rng(4)
    a = ws.module.random_hermitian_hecke(rng)
    b = ws.module.random_hermitian_hecke(rng)
    err = float(np.linalg.norm(a @ b - b @ a) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=2)


def chk_invariance(ws):
    G = ws.G
    gens = [int(G.index_of(s)) for s in chevalley_generators(G.kind, G.q)]
    err = 0.0
    for p in ws.pis:
        for g in gens:
            moved = ws.module.apply(g, p.basis)
            err = max(err, _maxerr(moved - p.projector @ moved))
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=len(ws.pis) * len(gens))


def chk_normalization(ws):
    G, U = ws.G, ws.G.U
    psi_u = generic_character(G)(G.mats(U))
    err = _maxerr(ws.B[:, G.identity] - 1, ws.B[:, U] - psi_u[None])
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=len(ws.pis))


def chk_bi_equivariance(ws):
    G = ws.G
    U = G.U
    psi = generic_character(G)
    psi_u = psi(G.mats(U))
    reps = ws.module.reps
    if ws.q == 3:
        u1, x, u2 = (a.ravel() for a in np.meshgrid(np.arange(len(U)), np.arange(len(reps)),
                                                     np.arange(len(U)), indexing="ij"))
        label = "exhaustive"
    else:
        rng = ws.rng(5)
        u1 = rng.integers(len(U), size=10**4)
        x = rng.integers(len(reps), size=10**4)
        u2 = rng.integers(len(U), size=10**4)
        label = "sampled"
    g = G.mul(G.mul(U[u1], reps[x]), U[u2])
    lhs = ws.B[:, g]
    rhs = psi_u[u1] * psi_u[u2] * ws.B[:, reps[x]]
    err = _maxerr(lhs - rhs)
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=len(g) * len(ws.pis), note=label)


@dataclass(frozen=True)
class _CellData:
    weyl: list
    torus: np.ndarray


def _coset_cells(ws) -> _CellData:
    if not hasattr(ws, "_cells"):
        ws_list, ts = [], []
        for x in ws.G.mats(ws.module.reps):
            t, perm = bruhat_cell(ws.G.kind, x, ws.q)
            m = np.zeros((len(perm), len(perm)), dtype=INT)
            m[list(perm), np.arange(len(perm))] = 1
            ws_list.append(WeylElement.from_matrix(m))
            ts.append(np.diag(t)[: ws.l])
        ws._cells = _CellData(ws_list, np.array(ts, dtype=INT))
    return ws._cells


def chk_support_vanishing(ws):
    supp = set(bessel_support(ws.l).elements)
    cells = _coset_cells(ws)
    off = np.array([w not in supp for w in cells.weyl])
    vals = ws.B[:, ws.module.reps[off]]
    err = _maxerr(vals)
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=int(off.sum()),
                   note="exhaustive over cosets off the support")


def chk_torus_central(ws):
    G = ws.G
    T = G.T
    central = set(central_elements(G))
    noncentral = np.array([t for t in T if int(t) not in central])
    err = _maxerr(ws.B[:, noncentral])
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=len(noncentral))


def chk_upper_triangular(ws):
    l, q = ws.l, ws.q
    GLl = ws.twist(l)[0].GL
    A = GLl.mats()
    lower = np.tril(np.ones((l, l), dtype=bool), -1)
    bad = A[np.any(A[:, lower] != 0, axis=1)]
    idx = ws.G.index_of(np.stack([el.t_n(a, l, q) for a in bad]))
    err = _maxerr(ws.B[:, idx])
    ok = err < ws.tol.eq_abs
    note = ""
    if not ok:
        worst = [p.index for p in ws.pis if np.max(np.abs(ws.B[p.index, idx])) >= ws.tol.eq_abs]
        note = f"nonzero for summands {worst}"
    return Outcome(ok, max_error=err, count=len(bad), note=note)


def chk_conjugate_formula(ws):
    G = ws.G
    psi = generic_character(G)
    U = G.U
    psi_u = psi(G.mats(U))
    rng = ws.rng(6)
    err = 0.0
    ok = True
    for p in ws.pis:
        bc = conjugate_bessel(p)
        full = ws.module.evaluate(bc, np.arange(G.order))
        err = max(err, abs(full[G.identity] - 1))
        u1 = rng.integers(len(U), size=500)
        g = rng.integers(G.order, size=500)
        u2 = rng.integers(len(U), size=500)
        lhs = full[G.mul(G.mul(U[u1], g), U[u2])]
        err = max(err, _maxerr(lhs - psi_u[u1] * psi_u[u2] * full[g]))
        partner = ws.pis[p.partner]
        err = max(err, _maxerr(partner.bessel - bc))
        ok &= ws.pis[partner.partner] is p
        err = max(err, abs(ws.omega(p) - ws.omega(partner)))
    pairs = sum(1 for p in ws.pis if p.partner != p.index) // 2
    return Outcome(ok and err < ws.tol.eq_abs, max_error=err, count=len(ws.pis),
                   note=f"{pairs} non-self-conjugate pairs")


def chk_central_character(ws):
    z = ws.minus_one
    err = 0.0
    for p in ws.pis:
        w = ws.omega(p)
        moved = ws.module.apply(z, p.basis)
        err = max(err, _maxerr(moved - w * p.basis), abs(w * w - 1))
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=len(ws.pis))


def chk_cuspidal(ws):
    ok = len(ws.cusp) > 0
    note = f"{len(ws.cusp)} cuspidal of {len(ws.pis)}"
    # GL_2 cross-check: the cuspidal generic pieces are exactly those of dimension q - 1
    if ws.l >= 2:
        _, taus = ws.twist(2)
        ok &= all(t.cuspidal == (t.dim == ws.q - 1) for t in taus)
        note += "; GL_2 cuspidal iff dim q-1"
    return Outcome(ok, count=len(ws.pis), note=note)


def chk_orthonormality(ws):
    C = ws.characters
    gram = C @ C.conj().T / ws.G.order
    err = _maxerr(gram - np.eye(len(ws.pis)))
    return Outcome(err < 1e-6, max_error=err, count=len(ws.pis))


# --------------------------------------------------------------- zeta checks


def _fv_check(ws, ns):
    if not ns:
        raise Skip("no twists in this range for this l")
    err, count = 0.0, 0
    for n in ns:
        ctx, taus = ws.twist(n)
        K = ws.kernel(n)
        rng = ws.rng(7, n)
        for t in taus:
            vs = [t.bessel, _random_vector(ctx, t, rng)]
            for v in vs:
                fv = section_fv(t, v, ws.l, n, ctx)
                exp = expected_fv_value(t, v, ws.l, n)
                for p in ws.cusp:
                    err = max(err, abs(K(ws.B[p.index], fv) - exp))
                    count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


def chk_fv_low(ws):
    return _fv_check(ws, list(range(1, ws.l - 1)))


def chk_fv_corank_one(ws):
    return _fv_check(ws, [ws.l - 1])


def chk_fv_top(ws):
    return _fv_check(ws, [ws.l])


def chk_rep_independence(ws):
    err, count = 0.0, 0
    for n in _n_range(ws):
        ctx, taus = ws.twist(n)
        K = ws.kernel(n)
        rng = ws.rng(8, n)
        H = K.odd if n < ws.l else ws.G
        U = H.U
        alt = H.mul(U[rng.integers(len(U), size=len(K.reps))], K.reps)
        K2 = ZetaKernel(ws.G, ws.l, n, ctx, odd=getattr(K, "odd", None), reps=alt)
        for p in ws.cusp:
            for t in taus:
                W = random_whittaker(ws.B[p.index], ws.G, rng)
                f = random_section(t, ws.l, ctx, rng)
                Mf = intertwining_apply(f)
                err = max(err, abs(K(W, f) - K2(W, f)), abs(K(W, Mf) - K2(W, Mf)))
                count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


def chk_equivariance(ws):
    l, q = ws.l, ws.q
    err, count = 0.0, 0
    for n in _n_range(ws):
        ctx, taus = ws.twist(n)
        K = ws.kernel(n)
        rng = ws.rng(9, n)
        for trial in range(10):
            p = ws.cusp[trial % len(ws.cusp)]
            t = taus[trial % len(taus)]
            W = random_whittaker(ws.B[p.index], ws.G, rng)
            f = random_section(t, l, ctx, rng)
            if n == l:
                x = ws.G.mats(int(rng.integers(ws.G.order)))
                h = embed_even_in_odd(l, x, q)
            else:
                h = K.odd.mats(int(rng.integers(K.odd.order)))
                w = el.w_ln(l, n)
                x = w @ embed_odd_in_even(l, n, h, q) @ w.T % q
            moved = K(translate_whittaker(W, ws.G, x), translate_section(f, h))
            err = max(err, abs(moved - K(W, f)))
            count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count,
                   note="SO_{2n+1} part; the N^{l-n} part is trivial for n = l - 1")


def chk_intertwined_support(ws):
    q = ws.q
    err, ok, count = 0.0, True, 0
    for n in _n_range(ws):
        ctx, taus = ws.twist(n)
        A = ctx.GL.mats()
        wx = np.matmul(el.w_n(n, q), ctx.V) % q
        L = np.stack([el.l_n(a, q) for a in A])
        step = max(1, 200_000 // len(wx))
        for t in taus:
            fv = section_fv(t, t.bessel, ws.l, n, ctx)
            Mf = intertwining_apply(fv)
            ok &= bool(np.all(in_open_cell(n, ctx.cosets.reps[Mf.support], q)))
            exp = whittaker_star(t, t.bessel, A)
            for lo in range(0, len(A), step):
                g = (np.matmul(L[lo:lo + step, None], wx[None]) % q).reshape(-1, 2 * n + 1, 2 * n + 1)
                vals = Mf.at_identity(g).reshape(-1, len(wx))
                err = max(err, _maxerr(vals - exp[lo:lo + step, None]))
                count += vals.size
    return Outcome(ok and err < ws.tol.eq_abs, max_error=err, count=count)


def chk_intertwined_reduction(ws):
    err, count = 0.0, 0
    for n in range(1, ws.l):
        ctx, taus = ws.twist(n)
        K = ws.kernel(n)
        for t in taus:
            Mf = intertwining_apply(section_fv(t, t.bessel, ws.l, n, ctx))
            for p in ws.cusp:
                B = ws.B[p.index]
                err = max(err, abs(K(B, Mf) - intertwined_reduction(B, t, t.bessel, K)))
                count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


# --------------------------------------------------------------- cell checks


def _cell_sets(l):
    part = partition(l)
    return (set(bessel_support(l).elements), set(part[CellClass(l)]),
            set(part[CellClass(l, True)]), set(part[CellClass(l - 1)]), part)


def chk_membership_cells(ws):
    l, q = ws.l, ws.q
    T = np.array(list(itertools.product(range(1, q), repeat=l)), dtype=INT)
    bad, count = [], 0
    for cls, members in partition(l).items():
        if cls.n < l - 1:
            continue
        for w in members:
            m = open_cell_membership(l, q, T, w)
            if cls.n == l - 1:
                exp = T[:, l - 1] != embedded_open_cell_condition(l, q)
            else:
                exp = np.ones(len(T), dtype=bool)
            if not np.array_equal(m, exp):
                bad.append(cls.label())
            count += len(T)
    return Outcome(not bad, count=count, note=f"mismatch in {sorted(set(bad))}" if bad else "")


def _top_sections(ws):
    ctx, taus = ws.twist(ws.l)
    for t in taus:
        yield t, intertwining_apply(section_fv(t, t.bessel, ws.l, ws.l, ctx))


def chk_full_support_sum(ws):
    from .zeta import zeta_cells

    supp, *_ = _cell_sets(ws.l)
    K = ws.kernel(ws.l)
    err, count = 0.0, 0
    for t, Mf in _top_sections(ws):
        for p in ws.cusp:
            B = ws.B[p.index]
            err = max(err, abs(K(B, Mf) - zeta_cells(B, Mf, K, supp)))
            count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


def chk_conjugate_cell_sum(ws):
    from .zeta import zeta_cells

    _, Bl, Blc, _, _ = _cell_sets(ws.l)
    K = ws.kernel(ws.l)
    err, count = 0.0, 0
    for t, Mf in _top_sections(ws):
        for p in ws.cusp:
            lhs = zeta_cells(ws.B[p.index], Mf, K, Blc)
            rhs = zeta_cells(ws.B[p.partner], Mf, K, Bl)
            err = max(err, abs(lhs - rhs))
            count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


def _torus_half(l, q):
    excl = top_torus_excluded(l, q)
    half, seen = [], set()
    for t in range(1, q):
        if t in excl or t in seen:
            continue
        half.append(t)
        seen.update({t, top_torus_involution(l, q, t)})
    return excl, half


def chk_corank_cell_sum(ws):
    from .zeta import zeta_cells

    l = ws.l
    *_, Bl1, _ = _cell_sets(l)
    excl, half = _torus_half(l, ws.q)
    K = ws.kernel(l)
    err, count = 0.0, 0
    for t, Mf in _top_sections(ws):
        for p in ws.cusp:
            B, Bc = ws.B[p.index], ws.B[p.partner]
            lhs = zeta_cells(B, Mf, K, Bl1, lambda x: x[l - 1] not in excl)
            rhs = zeta_cells(B + Bc, Mf, K, Bl1, lambda x: x[l - 1] in half)
            err = max(err, abs(lhs - rhs))
            count += 1
    note = "torus range empty at this q" if not half else f"half-torus {half}"
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count, note=note)


# -------------------------------------------------------------- gamma checks


def chk_gamma_proportionality(ws):
    table, errors = ws.gammas
    spread = max((r.spread for r in table.rows.values()), default=0.0)
    ok = not errors and spread < ws.tol.gamma_rel and table.rows
    return Outcome(bool(ok), max_error=spread, count=len(table.rows), note="; ".join(errors[:3]))


def chk_gamma_conjugate(ws):
    table, _ = ws.gammas
    err, count = 0.0, 0
    for (pid, n, tid), row in table.rows.items():
        p = ws.pis[int(pid[2:])]
        other = table.rows.get((f"pi{p.partner}", n, tid))
        if other is None:
            continue
        err = max(err, abs(row.gamma - other.gamma))
        count += 1
    return Outcome(count > 0 and err < ws.tol.eq_abs, max_error=err, count=count)


def chk_gamma_seed(ws):
    table, _ = ws.gammas
    err, count = 0.0, 0
    for n in _n_range(ws):
        _, taus = ws.twist(n)
        K = ws.kernel(n)
        for p in ws.cusp[:2]:
            t = taus[-1]
            row = table.rows.get((f"pi{p.index}", n, t.fingerprint))
            if row is None:
                continue
            again = gamma_factor(p, t, K, probes=2, seed=ws.cfg.seed + 1, tol=ws.tol,
                                 B_full=ws.B[p.index])
            err = max(err, abs(again.gamma - row.gamma))
            count += 1
    return Outcome(count > 0 and err < ws.tol.eq_abs, max_error=err, count=count)


# ------------------------------------------------------------- multone checks


def _hom_table(ws, n, sigmas):
    ctx, _ = ws.twist(n)
    odd = ws.odd(n) if n < ws.l else None
    pis = ws.characters[[p.index for p in ws.cusp]]
    return hom_dimensions(pis, np.asarray(sigmas), ws.G, ws.l, n, ctx, odd=odd)


def _hom_check(ws, ns):
    worst, resid, count, hist = 0, 0.0, 0, {}
    for n in ns:
        _, taus = ws.twist(n)
        table, r = _hom_table(ws, n, character_tables(taus))
        worst = max(worst, int(table.max()))
        resid = max(resid, r)
        count += table.size
        for v in table.ravel():
            hist[int(v)] = hist.get(int(v), 0) + 1
    note = "values " + ", ".join(f"{k}:{v}" for k, v in sorted(hist.items()))
    return Outcome(worst <= 1 and resid < 1e-6, max_error=resid, count=count, note=note)


def chk_hom_top(ws):
    return _hom_check(ws, [ws.l])


def chk_hom_low(ws):
    return _hom_check(ws, list(range(1, ws.l)))


def chk_hom_orthogonality(ws):
    """Induced from a character of det: no Whittaker model on GL_l, so no pairing."""
    l, q = ws.l, ws.q
    ctx, _ = ws.twist(l)
    g0 = primitive_root(q)
    log_t = {pow(g0, k, q): k for k in range(q - 1)}
    dets = np.array([log_t[int(d)] for d in mdet(ctx.GL.mats(), q)])
    sigmas = [np.exp(2j * np.pi * j * dets / (q - 1)) for j in range(q - 1)]
    table, resid = _hom_table(ws, l, sigmas)
    return Outcome(bool(np.all(table == 0)) and resid < 1e-6, max_error=resid, count=table.size)


# ------------------------------------------------------------ converse checks


def chk_corank_pair(ws):
    """B_pi and B_{c.pi} agree on t_n(a) t'_n w~_n for every a in GL_n, n <= l - 1."""
    err, count = 0.0, 0
    for n in range(1, ws.l):
        ctx, _ = ws.twist(n)
        idx = ws.G.index_of(corank_points(ws.l, n, ws.q, ctx.GL))
        for p in ws.cusp:
            err = max(err, _maxerr(ws.B[p.index, idx] - ws.B[p.partner, idx]))
            count += len(idx)
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


def converse_classes(ws) -> list[list[int]]:
    """Cuspidal summands grouped by central character and full gamma vector."""
    table, _ = ws.gammas
    keys_ = sorted({(n, t) for (_, n, t) in table.rows})
    vecs = {}
    for p in ws.cusp:
        v = table.vector(f"pi{p.index}")
        vecs[p.index] = np.array([ws.omega(p)] + [v.get(k, np.nan) for k in keys_])
    classes: list[list[int]] = []
    for i, v in vecs.items():
        for c in classes:
            u = vecs[c[0]]
            if np.all(np.abs(u - v) <= ws.tol.gamma_rel * np.maximum(1.0, np.abs(u))):
                c.append(i)
                break
        else:
            classes.append([i])
    return classes


def converse_check(ws) -> Outcome:
    if not ws.cusp:
        raise Skip("no cuspidal generic representations")
    _, errors = ws.gammas
    if errors:
        return Outcome(False, note="gamma table incomplete: " + errors[0])
    classes = converse_classes(ws)
    bad = [c for c in classes if set(c) != {c[0], ws.pis[c[0]].partner}]
    sizes = sorted(len(c) for c in classes)
    note = f"{len(classes)} classes, sizes {sizes}"
    if bad:
        note = f"THEOREM-VIOLATION in classes {bad}; " + note
    return Outcome(not bad, count=len(classes), note=note)


def chk_converse(ws):
    return converse_check(ws)


def chk_bessel_sum(ws):
    if not ws.cusp:
        raise Skip("no cuspidal generic representations")
    err, count = 0.0, 0
    for c in converse_classes(ws):
        for i, j in itertools.combinations_with_replacement(c, 2):
            a = ws.pis[i].bessel + ws.pis[ws.pis[i].partner].bessel
            b = ws.pis[j].bessel + ws.pis[ws.pis[j].partner].bessel
            err = max(err, _maxerr(a - b))
            count += 1
    return Outcome(err < ws.tol.eq_abs, max_error=err, count=count)


# ------------------------------------------------------------------ registry


Check = tuple[str, str, Callable[[Workspace], Outcome]]

REGISTRY: dict[str, list[Check]] = {
    "weyl": [
        ("weyl.support_size", "bessel-support-size", chk_support_size),
        ("weyl.theta_bijection", "theta-bijection", chk_theta_bijection),
        ("weyl.partition", "support-partition", chk_partition),
        ("weyl.class_characterization", "class-theta-characterization", chk_class_characterization),
        ("weyl.w_tilde_action", "w-tilde-root-action", chk_w_tilde_action),
        ("weyl.gl_lift_outside_support", "gl-lift-outside-support", chk_gl_lift),
        ("weyl.top_class_shape", "top-class-shape", chk_top_shape),
        ("weyl.corank_one_shape", "corank-one-class-shape", chk_corank_shape),
    ],
    "groups": [
        ("groups.orders", "order-formulas", chk_orders),
        ("groups.membership", "form-membership", chk_membership),
        ("groups.embed_odd_in_even", "embedding-odd-in-even", chk_embed_low),
        ("groups.embed_even_in_odd", "embedding-even-in-odd", chk_embed_top),
        ("groups.torus_image", "embedded-torus-display", chk_torus_image),
        ("groups.outer_conjugation", "outer-conjugation", chk_outer),
        ("groups.special_elements", "special-elements", chk_special),
        ("groups.bruhat_roundtrip", "bruhat-decomposition", chk_bruhat),
        ("groups.siegel", "siegel-parabolic", chk_siegel),
        ("groups.twisted_cell_matrix", "embedded-twisted-cell-matrix", chk_twisted_cell_matrix),
    ],
    "decompose": [
        ("bessel.completeness", "gelfand-graev-multiplicity-one", chk_completeness),
        ("bessel.hecke_commute", "hecke-commutant", chk_hecke_commute),
        ("bessel.invariance", "gelfand-graev-multiplicity-one", chk_invariance),
        ("bessel.character_orthonormality", "gelfand-graev-multiplicity-one", chk_orthonormality),
    ],
    "bessel": [
        ("bessel.normalization", "bessel-normalization", chk_normalization),
        ("bessel.bi_equivariance", "bessel-bi-equivariance", chk_bi_equivariance),
        ("bessel.support_vanishing", "bessel-support-vanishing", chk_support_vanishing),
        ("bessel.torus_central", "torus-support-central", chk_torus_central),
        ("bessel.upper_triangular_vanishing", "upper-triangular-vanishing", chk_upper_triangular),
        ("bessel.conjugate_formula", "conjugate-bessel", chk_conjugate_formula),
        ("bessel.central_character", "central-character", chk_central_character),
        ("bessel.cuspidal", "cuspidality", chk_cuspidal),
    ],
    "zeta": [
        ("zeta.fv_low", "fv-nonvanishing-low", chk_fv_low),
        ("zeta.fv_corank_one", "fv-nonvanishing-corank-one", chk_fv_corank_one),
        ("zeta.fv_top", "fv-nonvanishing-top", chk_fv_top),
        ("zeta.rep_independence", "zeta-equivariance", chk_rep_independence),
        ("zeta.equivariance", "zeta-equivariance", chk_equivariance),
        ("zeta.intertwined_support", "intertwined-section-support", chk_intertwined_support),
        ("zeta.intertwined_reduction", "intertwined-zeta-reduction", chk_intertwined_reduction),
    ],
    "cells": [
        ("cells.membership", "embedded-cell-membership", chk_membership_cells),
        ("cells.full_support_sum", "support-restricted-zeta", chk_full_support_sum),
        ("cells.conjugate_cell_sum", "conjugate-cell-sum", chk_conjugate_cell_sum),
        ("cells.corank_cell_sum", "corank-cell-sum", chk_corank_cell_sum),
    ],
    "gamma": [
        ("gamma.proportionality", "gamma-proportionality", chk_gamma_proportionality),
        ("gamma.conjugate_invariance", "conjugate-gamma", chk_gamma_conjugate),
        ("gamma.seed_stability", "gamma-proportionality", chk_gamma_seed),
    ],
    "multone": [
        ("multone.top", "multiplicity-one-top", chk_hom_top),
        ("multone.low", "multiplicity-one-low", chk_hom_low),
        ("multone.orthogonality", "multiplicity-one-top", chk_hom_orthogonality),
    ],
    "converse": [
        ("converse.corank_pair_equality", "corank-bessel-equality", chk_corank_pair),
        ("converse.classes", "converse-theorem", chk_converse),
        ("converse.bessel_sum", "bessel-sum-identity", chk_bessel_sum),
    ],
}

# Every result the artifact verifies, by descriptive slug.
REQUIRED_ANCHORS = (
    "order-formulas", "form-membership", "embedding-odd-in-even", "embedding-even-in-odd",
    "embedded-torus-display", "outer-conjugation", "special-elements", "bruhat-decomposition",
    "siegel-parabolic", "embedded-twisted-cell-matrix",
    "bessel-support-size", "theta-bijection", "support-partition", "class-theta-characterization",
    "w-tilde-root-action", "gl-lift-outside-support", "top-class-shape", "corank-one-class-shape",
    "gelfand-graev-multiplicity-one", "hecke-commutant", "bessel-normalization",
    "bessel-bi-equivariance", "bessel-support-vanishing", "torus-support-central",
    "upper-triangular-vanishing", "conjugate-bessel", "central-character", "cuspidality",
    "multiplicity-one-top", "multiplicity-one-low", "zeta-equivariance", "gamma-proportionality",
    "fv-nonvanishing-low", "fv-nonvanishing-corank-one", "fv-nonvanishing-top",
    "intertwined-section-support", "intertwined-zeta-reduction", "embedded-cell-membership",
    "support-restricted-zeta", "conjugate-cell-sum", "corank-cell-sum", "conjugate-gamma",
    "corank-bessel-equality", "bessel-sum-identity", "converse-theorem",
)


def anchor_audit() -> Outcome:
    covered = {a for checks in REGISTRY.values() for _, a, _ in checks}
    missing = sorted(set(REQUIRED_ANCHORS) - covered)
    return Outcome(not missing, count=len(REQUIRED_ANCHORS),
                   note=f"missing {missing}" if missing else "")


# ------------------------------------------------------------------ running


def _run_one(ws: Workspace, name: str, anchor: str, fn, timings: bool) -> CheckRecord:
    t0 = time.perf_counter()
    try:
        out = fn(ws)
        status = "pass" if out.ok else "fail"
    except (Skip, BudgetError) as exc:
        out, status = Outcome(True, note=str(exc)), "skip"
    except MemoryError:
        out, status = Outcome(True, note="out of memory"), "skip"
    except Exception as exc:  # a crashing check is a failing check
        log.exception("check %s crashed", name)
        out, status = Outcome(False, note=f"{type(exc).__name__}: {exc}"), "fail"
    ms = int((time.perf_counter() - t0) * 1000) if timings else None
    return CheckRecord(name=name, paper_anchor=anchor, status=status, max_error=_round(out.max_error),
                       count=int(out.count), runtime_ms=ms, note=out.note)


def run_suite(config: SuiteConfig, progress: Callable[[CheckRecord], None] | None = None) -> Report:
    config.validate()
    ws = Workspace(config)
    report = Report(config)
    for suite in config.selected:
        for name, anchor, fn in REGISTRY[suite]:
            rec = _run_one(ws, name, anchor, fn, config.timings)
            report.checks.append(rec)
            if progress:
                progress(rec)
    if "all" in config.suites:
        rec = _run_one(ws, "harness.anchor_audit", "anchor-audit", lambda _: anchor_audit(),
                       config.timings)
        report.checks.append(rec)
        if progress:
            progress(rec)
    return report


def with_suites(config: SuiteConfig, *suites: str) -> SuiteConfig:
    return replace(config, suites=tuple(suites))
