"""Command-line front end.

    rank1 build --family sidon --h1 1 --cuts 3,4,5,6 --out sched.json
    rank1 verify --schedule sched.json --props sidon
    rank1 sweep --schedule sched.json --set-a E:1 --set-b E:1 --m-from 0 --m-to 3000 --bound sidon

Exit codes: 0 all pass, 1 any fail (or cap exceeded), 2 indeterminate
without fails, 64 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import arith, correl, schedule as sch, tower, verify
from .tower import CapExceeded, LevelSet

EXIT_OK, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_USAGE = 0, 1, 2, 64

PROPS = ("ornstein", "injectivity", "sidon", "decay", "joining", "lemma")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    schedule_source: str | None
    output: str | None
    fmt: str
    cap: int
    tolerance: Fraction | None
    seed: int

    @classmethod
    def from_args(cls, args) -> RunConfig:
        cap = args.cap if args.cap is not None else tower.position_cap()
        if cap <= 0:
            raise UsageError("--cap must be positive")
        tol = None
        if getattr(args, "tolerance", None) is not None:
            tol = arith.parse_fraction(args.tolerance)
            if tol < 0:
                raise UsageError("--tolerance must be non-negative")
        return cls(args.command, getattr(args, "schedule", None), args.out,
                   args.format, cap, tol, args.seed)


def _ints(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {s!r}")


def parse_preset(text: str, schedule: sch.ConstructionSchedule) -> LevelSet:
    """E:j (base), T:j:i (level i), U:j (whole tower), L:j:i1,i2,... (explicit levels)."""
    parts = text.split(":")
    try:
        kind, j = parts[0].upper(), int(parts[1])
        if kind == "E" and len(parts) == 2:
            A = LevelSet.base(j)
        elif kind == "T" and len(parts) == 3:
            A = LevelSet.level(j, int(parts[2]))
        elif kind == "U" and len(parts) == 2:
            A = LevelSet.tower(schedule, j)
        elif kind == "L" and len(parts) == 3:
            A = LevelSet(j, tuple(_ints(parts[2])))
        else:
            raise ValueError
        return A.validate(schedule)
    except (ValueError, IndexError) as e:
        raise UsageError(f"bad set preset {text!r}: {e or 'expected E:j, T:j:i, U:j or L:j:i,...'}")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(cfg: RunConfig) -> sch.ConstructionSchedule:
    if not cfg.schedule_source:
        raise UsageError("--schedule PATH is required")
    with open(cfg.schedule_source) as fh:
        return sch.ConstructionSchedule.from_json(fh.read())


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands ------------------------------------------------------------------

def cmd_build(args, cfg: RunConfig) -> int:
    fam = args.family
    if fam == "explicit":
        if not args.stages:
            raise UsageError("explicit family needs --stages '[[r, [s...]], ...]'")
        stages = json.loads(args.stages)
        s = sch.explicit_schedule(args.h1, [(int(r), [int(x) for x in sp]) for r, sp in stages])
    elif fam == "algebraic":
        primes = _ints(args.primes or "")
        if not primes:
            raise UsageError("algebraic family needs --primes")
        H = None if args.H in (None, "r") else [int(args.H)] * len(primes)
        s_last = args.s_last if args.s_last == "height" else int(args.s_last)
        s = sch.algebraic_schedule(args.h1, primes, H=H, s_last=s_last)
    elif fam == "sidon":
        cuts = _ints(args.cuts or "")
        if not cuts:
            raise UsageError("sidon family needs --cuts")
        s = sch.sidon_growth_schedule(args.h1, cuts, args.growth_factor)
    else:
        s = sch.decay_rate_schedule(args.h1, args.psi, arith.parse_fraction(args.C_hint),
                                    args.max_stages, spacing=args.spacing)
    _emit(s.to_json() + "\n", cfg.output)
    sys.stderr.write("heights: " + " ".join(str(h) for h in s.heights) + "\n")
    for c in s.meta.get("params", {}).get("certificates", []):
        sys.stderr.write(f"stage {c['stage']}: r={c['r']} psi({c['h_next']}) >= sqrt({c['h']}) certified\n")
    return EXIT_OK


def _verify_reports(s: sch.ConstructionSchedule, props: list[str], args, cfg: RunConfig):
    rng = random.Random(cfg.seed)
    J = s.n_towers
    for prop in props:
        if prop in ("ornstein", "injectivity"):
            fn = verify.verify_ornstein if prop == "ornstein" else verify.verify_injectivity
            alg = [j for j in range(1, J) if s.stage(j).algebraic is not None]
            if not alg:
                raise UsageError(f"{prop} needs algebraic stages")
            for j in alg:
                yield fn(s, j)
        elif prop == "sidon":
            for j in range(1, J):
                yield verify.verify_sidon(s, j, args.budget)
        elif prop == "decay":
            psi = s.meta.get("params", {}).get("psi", args.psi)
            A = parse_preset(args.set_a, s) if args.set_a else LevelSet.base(1)
            C = verify.decay_constant(s, A, A.stage)
            yield verify.verify_decay(s, A, psi, C, verify.decay_samples(s, A.stage, rng))
        elif prop == "joining":
            for j in range(1, min(4, J - 1) + 1):
                ls = sorted({0, 1, -1, s.h1, -s.h1, s.h(2) + 1, -(s.h(2) + 1)})
                for l in ls:
                    if abs(l) + s.h(j) <= s.h(J):
                        yield verify.verify_joining_mass(s, j, l)
        elif prop == "lemma":
            for j in range(1, min(3, J - 1) + 1):
                h = s.h(j)
                for _ in range(args.trials):
                    A = LevelSet(j, tuple(rng.sample(range(h + 1), rng.randint(1, min(h + 1, 8)))))
                    B = LevelSet(j, tuple(rng.sample(range(h + 1), rng.randint(1, min(h + 1, 8)))))
                    l = rng.randint(-min(h, 50), min(h, 50))
                    yield verify.verify_lemma_decomposition(s, j, l, A, B)


def cmd_verify(args, cfg: RunConfig) -> int:
    props = [p for p in (args.props or "").split(",") if p]
    if not props:
        raise UsageError("--props must name at least one of " + ",".join(PROPS))
    unknown = set(props) - set(PROPS)
    if unknown:
        raise UsageError(f"unknown properties: {sorted(unknown)}")
    s = _load(cfg)
    reports = list(_verify_reports(s, props, args, cfg))
    _emit(_dump([r.to_dict() for r in reports]), cfg.output)
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "indeterminate": EXIT_INDETERMINATE}[
        verify.merge_verdicts(reports)]


def _result_dict(r: correl.CorrelationResult) -> dict:
    return {"m": str(r.m), "lower": arith.fmt_fraction(r.lower),
            "upper": arith.fmt_fraction(r.upper), "stage_used": r.stage_used}


def cmd_correlate(args, cfg: RunConfig) -> int:
    s = _load(cfg)
    A, B = parse_preset(args.set_a, s), parse_preset(args.set_b, s)
    try:
        r = correl.correlation(s, A, B, args.m, cfg.tolerance, cfg.cap)
        code = EXIT_OK
    except correl.ToleranceUnreachable as e:
        r, code = e.result, EXIT_INDETERMINATE
    _emit(_dump(_result_dict(r)), cfg.output)
    return code


def _bound_fn(s, A, kind: str | None, psi: str | None):
    if kind is None:
        return None
    if kind == "sidon":
        sb = verify.sidon_bound(s, A)
        return lambda r: sb(r.m)
    C = verify.decay_constant(s, A, A.stage)

    def decay(r):
        if r.m <= 1 or (psi == "lnln" and r.m <= 2):
            return None
        return verify.decay_rhs_bounds(C, psi, r.m)[0]

    return decay


def cmd_sweep(args, cfg: RunConfig) -> int:
    s = _load(cfg)
    A, B = parse_preset(args.set_a, s), parse_preset(args.set_b, s)
    if args.m_from > args.m_to or args.stride < 1:
        raise UsageError("need --m-from <= --m-to and --stride >= 1")
    psi = s.meta.get("params", {}).get("psi", args.psi)
    bound = _bound_fn(s, A, args.bound, psi)
    ms = list(range(args.m_from, args.m_to + 1, args.stride))
    buf = io.StringIO()
    results: list[correl.CorrelationResult] = []
    code = EXIT_OK
    chunk = 4096
    def series(part):
        return correl.correlation_series(s, A, B, 0, 0, ms=part, tolerance=cfg.tolerance, cap=cfg.cap)

    try:
        for k in range(0, len(ms), chunk):
            try:
                results.extend(series(ms[k:k + chunk]))
            except CapExceeded:
                # keep every row before the first shift that breaks the cap
                for m in ms[k:k + chunk]:
                    results.extend(series([m]))
    except CapExceeded as e:
        sys.stderr.write(f"cap exceeded after {len(results)} rows: {e}\n")
        code = EXIT_FAIL
    except correl.ToleranceUnreachable as e:
        sys.stderr.write(f"{e}\n")
        code = EXIT_INDETERMINATE
    if cfg.fmt == "csv":
        correl.write_csv(results, buf, bound)
    else:
        buf.write(_dump([_result_dict(r) for r in results]))
    _emit(buf.getvalue(), cfg.output)
    return code


def cmd_coeffs(args, cfg: RunConfig) -> int:
    s = _load(cfg)
    co = verify.joining_coefficients(s, args.j, args.l)
    lo, hi = co.total()
    out = {
        "j": args.j, "l": str(args.l),
        "a": {str(k): arith.fmt_fraction(v) for k, v in sorted(co.a.items())},
        "upper": {str(k): arith.fmt_fraction(v) for k, v in sorted(co.upper.items())},
        "total": [arith.fmt_fraction(lo), arith.fmt_fraction(hi)],
    }
    _emit(_dump(out), cfg.output)
    return EXIT_OK if hi <= 2 else (EXIT_FAIL if lo > 2 else EXIT_INDETERMINATE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rank1", description="Exact rank-one cutting-and-stacking toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--cap", type=int, default=None, help="position cap (env RANK1_CAP)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", default=None, help="rational P/Q")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", parents=[common])
    b.add_argument("--family", choices=("explicit", "algebraic", "sidon", "decay"), required=True)
    b.add_argument("--h1", type=int, default=0)
    b.add_argument("--stages", help="explicit: JSON list of [r, [spacers]]")
    b.add_argument("--primes", help="algebraic: comma-separated primes")
    b.add_argument("--H", default="r", help="algebraic: 'r' (H_j = r_j) or an integer")
    b.add_argument("--s-last", default="0", help="algebraic: integer or 'height'")
    b.add_argument("--cuts", help="sidon: comma-separated cutting numbers")
    b.add_argument("--growth-factor", type=int, default=2)
    b.add_argument("--psi", choices=arith.PSI_CATALOG, default="lnln")
    b.add_argument("--C-hint", default="1")
    b.add_argument("--max-stages", type=int, default=3)
    b.add_argument("--spacing", choices=("sidon-set", "growth"), default="sidon-set")

    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--schedule")
    v.add_argument("--props", default="")
    v.add_argument("--budget", type=int, default=10**6)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--set-a", default=None)
    v.add_argument("--psi", choices=arith.PSI_CATALOG, default="lnln")

    c = sub.add_parser("correlate", parents=[common])
    c.add_argument("--schedule")
    c.add_argument("--set-a", required=True)
    c.add_argument("--set-b", required=True)
    c.add_argument("--m", type=int, required=True)

    w = sub.add_parser("sweep", parents=[common])
    w.add_argument("--schedule")
    w.add_argument("--set-a", required=True)
    w.add_argument("--set-b", required=True)
    w.add_argument("--m-from", type=int, required=True)
    w.add_argument("--m-to", type=int, required=True)
    w.add_argument("--stride", type=int, default=1)
    w.add_argument("--bound", choices=("sidon", "decay"), default=None)
    w.add_argument("--psi", choices=arith.PSI_CATALOG, default="lnln")

    k = sub.add_parser("coeffs", parents=[common])
    k.add_argument("--schedule")
    k.add_argument("--j", type=int, required=True)
    k.add_argument("--l", type=int, required=True)
    return p


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "correlate": cmd_correlate,
            "sweep": cmd_sweep, "coeffs": cmd_coeffs}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help and EXIT_USAGE (via _Parser.error) otherwise
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ValueError, OSError) as e:
        # ValueError covers schedule, prime and JSON errors plus out-of-range inputs
        sys.stderr.write(f"rank1 {args.command}: {e}\n")
        return EXIT_USAGE
    except CapExceeded as e:
        sys.stderr.write(f"rank1 {args.command}: {e}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
