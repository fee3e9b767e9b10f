"""Write each generic summand's Bessel function on the coset representatives as CSV."""

import argparse
from pathlib import Path

from soconverse.genrep import export_bessel_csv
from soconverse.harness import SuiteConfig, Workspace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--l", type=int, default=2)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--out-dir", type=Path, default=Path("bessel_csv"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    ws = Workspace(SuiteConfig(l=args.l, q=args.q).validate())
    for p in ws.pis:
        tag = "cusp" if p.cuspidal else "noncusp"
        print(export_bessel_csv(p, args.out_dir / f"l{args.l}_q{args.q}_pi{p.index}_{tag}.csv"))


if __name__ == "__main__":
    main()
