"""Print the Bessel-support cell classes and their sizes for each rank."""

import argparse

from soconverse.weyl import MAX_RANK, bessel_support, partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-l", type=int, default=MAX_RANK)
    ap.add_argument("--elements", action="store_true", help="also list the signed permutations")
    args = ap.parse_args()
    for l in range(2, args.max_l + 1):
        part = partition(l)
        print(f"l={l}  |support|={len(bessel_support(l).elements)}")
        for cls in sorted(part):
            line = f"  {cls.label():6} {len(part[cls]):3}"
            if args.elements:
                line += "  " + " ".join(str(w.images) for w in part[cls])
            print(line)


if __name__ == "__main__":
    main()
