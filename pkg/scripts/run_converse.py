"""Compute every gamma factor at (l, q), group the cuspidal summands and export the table."""

import argparse
from pathlib import Path

from soconverse.harness import SuiteConfig, Workspace, converse_check, converse_classes


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--l", type=int, default=2)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--seed", type=int, default=SuiteConfig.seed)
    ap.add_argument("--out", type=Path, default=None, help="CSV path for the gamma table")
    args = ap.parse_args()

    ws = Workspace(SuiteConfig(l=args.l, q=args.q, seed=args.seed).validate())
    print(f"{len(ws.pis)} generic summands, {len(ws.cusp)} cuspidal")
    for p in ws.cusp:
        print(f"  pi{p.index}: dim {p.dim}, partner pi{p.partner}, omega(-1) = {ws.omega(p).real:+.0f}")
    table, errors = ws.gammas
    for e in errors:
        print("gamma error:", e)
    for c in converse_classes(ws):
        print("class", [f"pi{i}" for i in c])
    print(converse_check(ws).note)
    if args.out:
        table.export_csv(args.out)
        print("wrote", args.out)


if __name__ == "__main__":
    main()
