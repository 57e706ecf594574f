"""Correlation curve mu(T^m A ∩ A) on a Sidon growth schedule, with the 1/r_j bound.

Writes a CSV (m, lower, upper, stage_used, bound) and prints, per stage, the
largest observed ratio upper / bound.

    python scripts/sidon_correlation_curve.py --cuts 3,4,5 --stride 7 --out curve.csv
"""

import argparse
import sys
from fractions import Fraction

from rank1 import sidon_growth_schedule
from rank1.correl import correlation_series, write_csv
from rank1.tower import LevelSet
from rank1.verify import _stage_of, sidon_bound


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h1", type=int, default=1)
    ap.add_argument("--cuts", default="3,4,5")
    ap.add_argument("--growth-factor", type=int, default=2)
    ap.add_argument("--level", type=int, default=0, help="A = level of tower 1")
    ap.add_argument("--stride", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    s = sidon_growth_schedule(args.h1, [int(c) for c in args.cuts.split(",")], args.growth_factor)
    A = LevelSet.level(1, args.level).validate(s)
    bound = sidon_bound(s, A)
    # last usable shift keeps every orbit inside the final tower's resolving range
    m_to = s.h(s.n_towers - 1)
    rows = correlation_series(s, A, A, 0, m_to, args.stride, tolerance=Fraction(0))

    fh = open(args.out, "w") if args.out else sys.stdout
    try:
        write_csv(rows, fh, bound=lambda r: bound(r.m))
    finally:
        if args.out:
            fh.close()

    worst: dict[int, Fraction] = {}
    for r in rows:
        b = bound(r.m)
        if b:
            j = _stage_of(s, r.m)
            worst[j] = max(worst.get(j, Fraction(0)), r.upper / b)
    print(f"heights {s.heights}", file=sys.stderr)
    for j in sorted(worst):
        print(f"stage {j}: max upper/bound = {worst[j]} over m in ({s.h(j)}, {s.h(j + 1)}]", file=sys.stderr)
    return 0 if all(v <= 1 for v in worst.values()) else 1


if __name__ == "__main__":
    raise SystemExit(main())
