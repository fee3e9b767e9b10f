"""Command-line entry point: ``so-converse <suite> [options]``.

Exit status is 0 when every executed check passes or is skipped, 1 when a
check fails and 2 on a configuration error (no report is written then).
"""

from __future__ import annotations

import logging
import sys

import click

from .core import DEFAULT_TOL, DomainError, Tolerance
from .genrep import DEFAULT_SEED
from .harness import ConfigError, SuiteConfig, run_suite

SUBCOMMANDS = {
    "enumerate": ("groups",),
    "weyl": ("weyl",),
    "decompose": ("decompose",),
    "bessel": ("decompose", "bessel"),
    "gamma": ("zeta", "gamma"),
    "multone": ("multone",),
    "cells": ("cells",),
    "converse": ("gamma", "converse"),
    "all": ("all",),
}


def _options(fn):
    opts = [
        click.option("--l", "l", type=int, default=2, show_default=True, help="Rank of SO_2l."),
        click.option("--q", "q", type=int, default=3, show_default=True, help="Odd prime field size."),
        click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True),
        click.option("--tol-eq", type=float, default=DEFAULT_TOL.eq_abs, show_default=True,
                     help="Absolute tolerance for identities."),
        click.option("--tol-gamma", type=float, default=DEFAULT_TOL.gamma_rel, show_default=True,
                     help="Relative spread allowed between gamma probes."),
        click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                     help="Directory for cached group enumerations."),
        click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
                     help="Write the JSON report here."),
        click.option("--slow", is_flag=True, help="Allow the slow tier (large groups)."),
        click.option("--allow-noncuspidal", is_flag=True,
                     help="Also compute gamma ratios for non-cuspidal generic summands (experimental)."),
        click.option("--timings", is_flag=True, help="Record per-check runtimes (reports stop being reproducible)."),
        click.option("-v", "--verbose", is_flag=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _run(suites, l, q, seed, tol_eq, tol_gamma, cache_dir, report_path, slow, allow_noncuspidal,
         timings, verbose):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        tol = Tolerance(eq_abs=tol_eq, gamma_rel=tol_gamma, eig_gap=DEFAULT_TOL.eig_gap)
        cfg = SuiteConfig(l=l, q=q, seed=seed, tol=tol, cache_dir=cache_dir, slow=slow, suites=suites,
                          allow_noncuspidal=allow_noncuspidal, timings=timings).validate()
    except (ConfigError, DomainError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)

    def show(rec):
        err = "" if rec.max_error is None else f"  err={rec.max_error:.1e}"
        ms = "" if rec.runtime_ms is None else f"  {rec.runtime_ms} ms"
        note = f"  {rec.note}" if rec.note else ""
        click.echo(f"{rec.status.upper():4} {rec.name} [{rec.paper_anchor}] n={rec.count}{err}{ms}{note}")

    report = run_suite(cfg, progress=show)
    s = report.summary()
    click.echo(f"{s['pass']} passed, {s['fail']} failed, {s['skip']} skipped")
    if report_path:
        report.write(report_path)
    sys.exit(0 if report.ok else 1)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Verify the converse theorem for split SO_2l over small prime fields."""


def _make(name, suites):
    @main.command(name=name, help=f"Run the {', '.join(suites)} checks.")
    @_options
    def cmd(**kw):
        _run(suites, **kw)

    return cmd


for _name, _suites in SUBCOMMANDS.items():
    _make(_name, _suites)


if __name__ == "__main__":
    main()
