"""Table of ||P(j, n) chi_A||^2 against its window majorant on an algebraic schedule.

    python scripts/averaging_norms.py --primes 5,11,23,47
    python scripts/averaging_norms.py --primes 5,11,23,47 --s-last height --n half
"""

import argparse

from rank1 import algebraic_schedule
from rank1.correl import averaging_norm
from rank1.tower import LevelSet


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--primes", default="5,11,23,47")
    ap.add_argument("--h1", type=int, default=0)
    ap.add_argument("--s-last", default="0", help="integer or 'height'")
    ap.add_argument("--n", default="half", help="'half' (n = r_j // 2) or an integer")
    args = ap.parse_args(argv)

    s_last = args.s_last if args.s_last == "height" else int(args.s_last)
    s = algebraic_schedule(args.h1, [int(p) for p in args.primes.split(",")], s_last=s_last)
    A = LevelSet.base(1)
    print(f"heights {s.heights}")
    print(f"{'j':>3} {'r_j':>5} {'n':>4} {'eps':>8} {'value_lo':>10} {'value_hi':>10} {'bound':>10}")
    prev = None
    monotone = True
    for j in range(1, s.n_towers):
        r = s.stage(j).r
        n = r // 2 if args.n == "half" else int(args.n)
        if not 1 <= n <= r - 2:
            continue
        est = averaging_norm(s, j, n, A)
        lo, hi = est.value_bracket
        if prev is not None and hi >= prev:
            monotone = False
        prev = lo
        print(f"{j:>3} {r:>5} {n:>4} {float(est.epsilon):>8.4f} {float(lo):>10.5f} {float(hi):>10.5f} "
              f"{float(est.bound):>10.4f}")
    print("strictly decreasing (certified):", monotone)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
