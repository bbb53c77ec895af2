"""Command-line front end: searches, bound tables, verification and the per-exponent table driver."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from ._parallel import TASKS_ENV, default_tasks
from .arith import factor_fundamental, fundamental_part, is_fundamental
from .bounds import bound_table, compute_N, erh_discriminant_bound, round_up_sig
from .directsearch import DEFAULT_MAX_P, direct_search
from .enumerator import SearchConfig, SearchHit, brute_force_range, enumerate_exponent, sort_hits
from .quadforms import class_group, reduced_forms, smallest_split_prime
from .redei import redei_matrix
from .sieve import SieveConfig, sieve_run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCONSISTENT = 3

BRUTE_LIMIT = 10**7
ENUM_CUTOFF = 10**6
FORM_COUNT_LIMIT = 10**6
HIT_FIELDS = ("D", "h", "exponent", "omega", "smallest_split_prime")
SIEVE_FIELDS = ("D", "smallest_split_prime", "exponent_or_minus1")
MODE_NAMES = {"chen": "chen_one_exception", "tatuzawa": "tatuzawa_no_siegel_zero"}


class ConsistencyError(RuntimeError):
    pass


def write_rows(rows: Iterable[dict], fields: tuple[str, ...], out: TextIO, as_json: bool) -> None:
    if as_json:
        for row in rows:
            out.write(json.dumps({k: row[k] for k in fields}) + "\n")
        return
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


def read_rows(inp: TextIO, as_json: bool) -> list[dict[str, int]]:
    if as_json:
        return [{k: int(v) for k, v in json.loads(line).items()} for line in inp if line.strip()]
    return [{k: int(v) for k, v in row.items()} for row in csv.DictReader(inp)]


@dataclass
class Table1Report:
    hits: list[SearchHit]
    counts: dict[int, int]
    largest: dict[int, int]
    regimes: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def lines(self) -> list[str]:
        out = ["exponent  count  largest |D|"]
        for e in range(1, 9):
            out.append(f"{e:>8}  {self.counts.get(e, 0):>5}  {self.largest.get(e, '-')}")
        out.append(f"   total  {self.total:>5}")
        out.extend(f"# {r}" for r in self.regimes)
        return out


def run_table1(
    max_abs_d: int = BRUTE_LIMIT,
    with_direct: bool = True,
    with_enumerate: bool = False,
    bound_mode: str = "chen_one_exception",
    max_p: int = DEFAULT_MAX_P,
    tasks: int = 1,
) -> Table1Report:
    """Fields with E(D) <= 8, stitched from brute force, direct search and the enumerator."""
    if max_abs_d < 3:
        raise ValueError("max_abs_d must be at least 3")
    brute_hi = min(max_abs_d, BRUTE_LIMIT)
    brute = brute_force_range(8, 3, brute_hi + 1, tasks=tasks)
    regimes = [f"unconditional and complete for |D| <= {brute_hi} (direct class groups)"]
    hits = list(brute)
    small = set(brute)
    if with_direct:
        direct = direct_search(max_p, 8, tasks)
        stray = [h for h in direct if abs(h.d) <= brute_hi and h not in small]
        if stray:
            raise ConsistencyError(f"direct search hits missing from brute force: {stray[:5]}")
        hits.extend(direct)
        regimes.append(f"unconditional for E | 8 and smallest split prime <= {max_p} (any |D|)")
    if with_enumerate and max_abs_d > ENUM_CUTOFF:
        cfg = SearchConfig(8, lower_cutoff=ENUM_CUTOFF, bound_mode=bound_mode, max_abs_d=max_abs_d, tasks=tasks)
        enum = enumerate_exponent(cfg)
        want = {h for h in small if 8 % h.exponent == 0 and abs(h.d) > ENUM_CUTOFF}
        got = {h for h in enum if abs(h.d) <= brute_hi}
        if want != got:
            raise ConsistencyError("enumerator and brute force disagree on their overlap")
        hits.extend(enum)
        regimes.append(f"E | 8 up to |D| <= {max_abs_d}: {cfg.caveat()}")
    hits = sort_hits(hits)
    counts = Counter(h.exponent for h in hits)
    largest: dict[int, int] = {}
    for h in hits:
        largest[h.exponent] = h.d
    return Table1Report(hits, dict(counts), largest, regimes)


def verify_hit(d: int) -> dict:
    """Class group data for d together with internal consistency flags."""
    if d >= 0 or not is_fundamental(d):
        hint = ""
        if d < 0:
            hint = f"; did you mean {fundamental_part(d)}?"
        raise ValueError(f"{d} is not a negative fundamental discriminant{hint}")
    fd = factor_fundamental(d)
    M = redei_matrix(fd)
    info = class_group(d)
    rk4 = M.k - 1 - M.rank
    checks = {
        "structure_product": info.h == math.prod(info.divisors),
        "two_rank_genus": info.two_rank == fd.omega - 1,
        "four_rank_redei": info.four_rank == rk4,
        "exponent_last_divisor": info.exponent == (info.divisors[-1] if info.divisors else 1),
    }
    if abs(d) <= FORM_COUNT_LIMIT:
        checks["reduced_form_count"] = sum(1 for _ in reduced_forms(d)) == info.h
    return {
        "D": d,
        "factors": fd.values,
        "redei_rank": M.rank,
        "four_rank": rk4,
        "h": info.h,
        "structure": info.divisors,
        "exponent": info.exponent,
        "smallest_split_prime": smallest_split_prime(d),
        "checks": checks,
        "consistent": all(checks.values()),
    }


def _open_out(path: str | None) -> TextIO:
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit_hits(hits: list[SearchHit], args) -> None:
    out = _open_out(args.out)
    try:
        write_rows((h.row() for h in hits), HIT_FIELDS, out, args.json)
    finally:
        if out is not sys.stdout:
            out.close()


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def bounds_report(c: int, k: int | None = None, mode: str = "chen_one_exception") -> dict:
    """N, d_N, the ERH ceiling and (optionally) the B_s table for exponent c."""
    if c < 1 or c & (c - 1):
        raise ValueError("exponent must be a power of two")
    rep: dict = {"exponent": c}
    if c > 1:
        N, d = compute_N(c.bit_length() - 1)
        rep.update(N=N, d_N=d)
    if c <= 8:
        rep["erh_bound"] = round_up_sig(erh_discriminant_bound(c), 2)
    if k is not None:
        t = bound_table(c, k, mode)
        rep["table"] = [{"rank": s, "threshold": t.threshold(s), "ceiling": t[s]} for s in range(k)]
    return rep


def cmd_bounds(args) -> int:
    rep = bounds_report(args.exponent, args.k, MODE_NAMES[args.bound_mode])
    if args.json:
        print(json.dumps(rep))
        return EXIT_OK
    for key in ("exponent", "N", "d_N", "erh_bound"):
        if key in rep:
            val = f"{rep[key]:.1e}" if key == "erh_bound" else rep[key]
            print(f"{key} {val}")
    for row in rep.get("table", []):
        print(f"B_{row['rank']} {row['ceiling']} (h > {row['threshold']} beyond)")
    return EXIT_OK


def cmd_redei(args) -> int:
    M = redei_matrix(args.D)
    for row in M.as_lists():
        print(" ".join(map(str, row)))
    print(f"rank {M.rank}")
    print(f"four_rank {M.k - 1 - M.rank}")
    return EXIT_OK


def cmd_classgroup(args) -> int:
    info = class_group(args.D)
    print(f"h {info.h}")
    print(f"structure {' x '.join(f'C{d}' for d in info.divisors) or 'trivial'}")
    print(f"exponent {info.exponent}")
    return EXIT_OK


def cmd_brute(args) -> int:
    hits = brute_force_range(args.max_exponent, args.lo, args.hi, args.dividing, args.tasks)
    _emit_hits(hits, args)
    _note(f"# unconditional: all fundamental D with {args.lo} <= |D| < {args.hi}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    cfg = SearchConfig(
        args.exponent,
        k_max=args.k_max,
        lower_cutoff=args.lower_cutoff,
        bound_mode=MODE_NAMES[args.bound_mode],
        max_abs_d=args.max_abs_d,
        k_values=(args.k,) if args.k else None,
        tasks=args.tasks,
    )
    hits = enumerate_exponent(cfg)
    _emit_hits(hits, args)
    _note(f"# {cfg.caveat()}")
    return EXIT_OK


def cmd_direct(args) -> int:
    hits = direct_search(args.max_prime, args.exponent, args.tasks)
    _emit_hits(hits, args)
    _note(f"# unconditional: every D with E(D) | {args.exponent} and smallest split prime <= {args.max_prime}")
    return EXIT_OK


def _sieve_config(args) -> SieveConfig:
    if args.paper_scale:
        cfg = SieveConfig.full_scale()
        _note("# paper-scale sieve: about 40 core-days of work")
        if args.abs_bound is not None:
            cfg = SieveConfig(cfg.moduli, cfg.sieve_primes, args.abs_bound)
        return cfg
    bound = SieveConfig().abs_bound if args.abs_bound is None else args.abs_bound
    if args.modulus_primes or args.sieve_primes_max:
        mods = [int(p) for p in args.modulus_primes.split(",")] if args.modulus_primes else list(SieveConfig().modulus_primes)
        top = args.sieve_primes_max or max(SieveConfig().sieve_primes)
        return SieveConfig.from_primes(mods, top, bound)
    return SieveConfig(abs_bound=bound)


def cmd_sieve(args) -> int:
    cfg = _sieve_config(args)
    hits = sieve_run(cfg, args.exponent, args.lo, args.hi, args.tasks)
    out = _open_out(args.out)
    try:
        write_rows((h.row() for h in hits), SIEVE_FIELDS, out, args.json)
    finally:
        if out is not sys.stdout:
            out.close()
    _note(f"# moduli {cfg.moduli}, sieve primes {cfg.sieve_primes[0]}..{cfg.sieve_primes[-1]}, |D| < {cfg.abs_bound}")
    return EXIT_OK


def cmd_table1(args) -> int:
    rep = run_table1(
        args.max_abs_d,
        with_direct=not args.no_direct,
        with_enumerate=args.enumerate,
        bound_mode=MODE_NAMES[args.bound_mode],
        max_p=args.max_prime,
        tasks=args.tasks,
    )
    print("\n".join(rep.lines()))
    if args.out:
        _emit_hits(rep.hits, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    rec = verify_hit(args.D)
    for key in ("D", "factors", "redei_rank", "four_rank", "h", "structure", "exponent", "smallest_split_prime"):
        print(f"{key} {rec[key]}")
    for name, ok in rec["checks"].items():
        print(f"check {name} {'ok' if ok else 'FAILED'}")
    return EXIT_OK if rec["consistent"] else EXIT_INCONSISTENT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smallexp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def outputs(p):
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--json", action="store_true", help="JSON lines instead of CSV")

    def tasks(p):
        p.add_argument("--tasks", type=int, default=None, help=f"worker processes (default ${TASKS_ENV} or all cores)")

    p = sub.add_parser("bounds", help="N threshold, ERH bound and ceilings B_s for one exponent")
    p.add_argument("--exponent", type=int, required=True)
    p.add_argument("--k", type=int, help="also print B_0..B_{k-1} for k prime factors")
    p.add_argument("--bound-mode", choices=MODE_NAMES, default="chen")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("redei", help="Redei matrix and 4-rank")
    p.add_argument("--disc", dest="D", type=int, required=True)
    p.set_defaults(func=cmd_redei)

    p = sub.add_parser("classgroup", help="class group structure")
    p.add_argument("D", type=int)
    p.set_defaults(func=cmd_classgroup)

    p = sub.add_parser("brute-force", help="all fields with small exponent in a |D| range")
    p.add_argument("--lo", type=int, default=3)
    p.add_argument("--hi", type=int, default=10**7, help="exclusive upper end for |D|")
    p.add_argument("--max-exponent", type=int, default=8)
    p.add_argument("--dividing", action="store_true", help="keep E | max-exponent instead of E <= max-exponent")
    outputs(p)
    tasks(p)
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("enumerate", help="recursive search for E | 2^r above the cutoff")
    p.add_argument("--exponent", type=int, choices=(2, 4, 8), required=True)
    p.add_argument("--bound-mode", choices=MODE_NAMES, default="chen")
    p.add_argument("--k", type=int, help="only this factor count")
    p.add_argument("--k-max", type=int)
    p.add_argument("--max-abs-d", type=int)
    p.add_argument("--lower-cutoff", type=int, default=ENUM_CUTOFF)
    outputs(p)
    tasks(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("direct-search", help="fields with E | c and a small smallest split prime")
    p.add_argument("--max-prime", type=int, default=DEFAULT_MAX_P)
    p.add_argument("--exponent", type=int, default=8)
    outputs(p)
    tasks(p)
    p.set_defaults(func=cmd_direct)

    p = sub.add_parser("sieve", help="bit-vector sieve for |D| without small split primes")
    p.add_argument("--abs-bound", type=int)
    p.add_argument("--paper-scale", action="store_true")
    p.add_argument("--modulus-primes", help="comma-separated odd primes for the CRT modulus")
    p.add_argument("--sieve-primes-max", type=int)
    p.add_argument("--exponent", type=int, default=8)
    p.add_argument("--lo", type=int, default=1)
    p.add_argument("--hi", type=int)
    outputs(p)
    tasks(p)
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("table1", help="per-exponent counts of fields with E(D) <= 8")
    p.add_argument("--max-abs-d", type=int, default=BRUTE_LIMIT)
    p.add_argument("--max-prime", type=int, default=DEFAULT_MAX_P)
    p.add_argument("--no-direct", action="store_true", help="skip the direct search")
    p.add_argument("--enumerate", action="store_true", help="add the E | 8 search above 10^6")
    p.add_argument("--bound-mode", choices=MODE_NAMES, default="chen")
    outputs(p)
    tasks(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("verify", help="recompute and cross-check one discriminant")
    p.add_argument("D", type=int)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "tasks") and args.tasks is None:
        args.tasks = default_tasks()
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
