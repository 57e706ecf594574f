"""How many decay stages each slow function admits, and the certificate where it does.

For every psi in the catalog and both spacings, builds decay_rate_schedule
stage by stage until the cut cap is hit, then runs the decay certificate on
the stages that exist (needs at least two).

    python scripts/decay_feasibility.py --h1 16 --max-stages 3
"""

import argparse
import random

from rank1 import arith
from rank1.schedule import DecayScheduleError, decay_rate_schedule
from rank1.tower import LevelSet
from rank1.verify import decay_constant, decay_samples, verify_decay


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h1", type=int, default=16)
    ap.add_argument("--max-stages", type=int, default=3)
    ap.add_argument("--r-cap", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    for psi in arith.PSI_CATALOG:
        for spacing in ("sidon-set", "growth"):
            built = None
            reason = "all stages built"
            for k in range(args.max_stages, 0, -1):
                try:
                    built = decay_rate_schedule(args.h1, psi, max_stages=k, spacing=spacing, r_cap=args.r_cap)
                    break
                except DecayScheduleError as e:
                    if k == args.max_stages:
                        reason = str(e)
            stages = 0 if built is None else len(built.stages)
            line = f"psi={psi:5s} spacing={spacing:9s} stages={stages}/{args.max_stages}"
            if built is not None:
                line += " r=" + ",".join(str(st.r) for st in built.stages)
            if built is not None and stages >= 2 and max(built.heights[:-1]) < 10**12:
                A = LevelSet.base(1)
                C = decay_constant(built, A)
                rep = verify_decay(built, A, psi, C, decay_samples(built, 1, random.Random(args.seed)))
                line += f" certificate={rep.verdict} (C={float(C):.4f}, {rep.stats['samples']} samples)"
            print(line)
            if stages < args.max_stages:
                print("    " + reason)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
