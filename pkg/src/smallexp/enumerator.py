"""Recursive search for fields with exponent dividing 2^r, and the brute-force oracle.

The recursive search builds D = p_1^* ... p_k^* with exactly k star factors
and increasing primes. Each partial product carries a lower bound s on the
Redei rank; only completions with |D| <= B_s can have exponent dividing c.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _fastforms as ff
from ._parallel import pmap
from .arith import (
    PRIMES,
    FundamentalDiscriminant,
    PrimeStarDisc,
    factor_fundamental,
    from_factors,
    fundamental_abs_mask,
    primorial,
    star,
    star_value,
)
from .bounds import CHEN_A, LOWER_BOUNDS, BoundTable, bound_table, compute_N
from .quadforms import (
    SPLIT_PRIME_CAP,
    class_group,
    order_exceeds,
    power,
    prime_form,
    split_primes,
)
from .redei import lower_redei_bound, redei_matrix

BOUND_MODES = tuple(LOWER_BOUNDS)
TWO_ADIC_SEEDS = (None, -4, -8, 8)
INT64_SAFE = 1 << 62
CHUNK = 1 << 22

CAVEATS = {
    "chen_one_exception": "complete for |D| > {cutoff} with at most one exception "
    "(a field violating Chen's lower bound for L(1, chi))",
    "tatuzawa_no_siegel_zero": "complete for |D| > {cutoff} assuming no Siegel zeros",
}


@dataclass(frozen=True, order=True)
class SearchHit:
    d: int
    h: int
    exponent: int
    omega: int
    smallest_split: int

    @classmethod
    def from_disc(cls, D: int | FundamentalDiscriminant, info=None, q1: int | None = None) -> "SearchHit":
        fd = D if isinstance(D, FundamentalDiscriminant) else factor_fundamental(D)
        info = info or class_group(fd.d)
        q1 = q1 or split_primes(fd.d, 1)[0]
        return cls(fd.d, info.h, info.exponent, fd.omega, q1)

    def row(self) -> dict[str, int]:
        return {
            "D": self.d,
            "h": self.h,
            "exponent": self.exponent,
            "omega": self.omega,
            "smallest_split_prime": self.smallest_split,
        }


def sort_hits(hits) -> list[SearchHit]:
    return sorted(set(hits), key=lambda h: (abs(h.d), h.d))


@dataclass(frozen=True)
class SearchConfig:
    c: int
    k_max: int | None = None
    lower_cutoff: int = CHEN_A
    bound_mode: str = "chen_one_exception"
    max_abs_d: int | None = None
    k_values: tuple[int, ...] | None = None
    tasks: int = 1

    def __post_init__(self):
        if self.c not in (2, 4, 8):
            raise ValueError("exponent must be 2, 4 or 8")
        if self.bound_mode not in BOUND_MODES:
            raise ValueError(f"bound mode must be one of {BOUND_MODES}")
        if self.lower_cutoff < LOWER_BOUNDS[self.bound_mode][1]:
            raise ValueError(f"lower cutoff below the validity range of {self.bound_mode}")

    @property
    def ks(self) -> tuple[int, ...]:
        if self.k_values:
            return tuple(self.k_values)
        kmax = self.k_max or compute_N(self.c.bit_length() - 1)[0]
        return tuple(range(1, kmax + 1))

    def caveat(self) -> str:
        text = CAVEATS[self.bound_mode].format(cutoff=self.lower_cutoff)
        if self.max_abs_d:
            text += f"; window capped at |D| <= {self.max_abs_d}"
        return text


@dataclass
class SearchStats:
    rejected: Counter = field(default_factory=Counter)
    nodes: int = 0
    leaves: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.rejected.update(other.rejected)
        self.nodes += other.nodes
        self.leaves += other.leaves


def check_reason(c: int, factors: Sequence[PrimeStarDisc], bounds: BoundTable) -> tuple[bool, str]:
    """Exponent test for D = product of factors, returning (accepted, deciding step)."""
    D = math.prod(f.value for f in factors)
    if D > 0:
        return False, "sign"
    q1, q2 = split_primes(D, 2)
    if order_exceeds(q1, c, D):
        return False, "order_bound"
    if power(prime_form(D, q1), c).a != 1:
        return False, "first_prime"
    if power(prime_form(D, q2), c).a != 1:
        return False, "second_prime"
    return _check_tail(c, from_factors(factors), bounds)


def _check_tail(c: int, fd: FundamentalDiscriminant, bounds: BoundTable) -> tuple[bool, str]:
    s = redei_matrix(fd).rank
    if abs(fd.d) > bounds[s]:
        return False, "redei_bound"
    if c % class_group(fd.d).exponent:
        return False, "class_group"
    return True, "accepted"


def check(c: int, factors: Sequence[PrimeStarDisc], bounds: BoundTable) -> bool:
    """True iff D = prod(factors) < 0 and E(D) divides c (given the bound table)."""
    return check_reason(c, factors, bounds)[0]


_SPLIT_SEARCH = PRIMES.ensure(SPLIT_PRIME_CAP)
_SPLIT_SEARCH = _SPLIT_SEARCH[_SPLIT_SEARCH <= SPLIT_PRIME_CAP]


def screen(Ds: np.ndarray, c: int, dividing: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised split-prime, order-bound and prime-form tests (numba)."""
    return ff.screen(np.ascontiguousarray(Ds, dtype=np.int64), _SPLIT_SEARCH, c, dividing)


def _last_level(partial, lo_idx, bound, c, bounds, lower_cutoff, stats) -> list[SearchHit]:
    primes = PRIMES.ensure(bound + 1)
    hi_idx = int(np.searchsorted(primes, bound, side="right"))
    if hi_idx <= lo_idx:
        return []
    sign_prod = math.prod(f.value for f in partial)
    ps = primes[lo_idx:hi_idx]
    stats.leaves += len(ps)
    hits = []
    if abs(sign_prod) * bound < INT64_SAFE:
        Ds = sign_prod * np.where(ps % 4 == 1, ps, -ps)
        keep = (Ds < 0) & (-Ds > lower_cutoff)
        stats.rejected["sign_or_cutoff"] += int(len(Ds) - keep.sum())
        ps, Ds = ps[keep], Ds[keep]
        status, q1s = screen(Ds, c, dividing=True)
        stats.rejected["screen"] += int((status == ff.SCREEN_REJECT).sum())
        todo = np.flatnonzero(status != ff.SCREEN_REJECT)
        for i in todo:
            factors = tuple(partial) + (star(int(ps[i])),)
            if status[i] == ff.SCREEN_PASS:
                ok, why = _check_tail(c, from_factors(factors), bounds)
            else:
                ok, why = check_reason(c, factors, bounds)
            stats.rejected[why] += not ok
            if ok:
                hits.append(SearchHit.from_disc(from_factors(factors), q1=int(q1s[i]) or None))
        return hits
    for p in ps:
        factors = tuple(partial) + (star(int(p)),)
        D = sign_prod * star_value(int(p))
        if D > 0 or -D <= lower_cutoff:
            stats.rejected["sign_or_cutoff"] += 1
            continue
        ok, why = check_reason(c, factors, bounds)
        stats.rejected[why] += not ok
        if ok:
            hits.append(SearchHit.from_disc(from_factors(factors)))
    return hits


def next_tuple(
    m: int,
    partial: Sequence[PrimeStarDisc],
    k: int,
    c: int,
    bounds: BoundTable,
    max_abs_d: int | None = None,
    lower_cutoff: int = CHEN_A,
    stats: SearchStats | None = None,
) -> list[SearchHit]:
    """All D with k star factors extending ``partial`` by primes P[m], P[m+1], ...

    ``m`` is a 1-based prime index (P[1] = 2). Returns hits with E(D) | c and
    |D| > lower_cutoff.
    """
    stats = stats if stats is not None else SearchStats()
    stats.nodes += 1
    partial = tuple(partial)
    l = len(partial)
    if l >= k:
        raise ValueError("partial factorization already has k factors")
    B = bounds[lower_redei_bound(partial)]
    if max_abs_d is not None:
        B = min(B, max_abs_d)
    bound = B // abs(math.prod(f.value for f in partial))
    need = k - l
    if need == 1:
        return _last_level(partial, m - 1, bound, c, bounds, lower_cutoff, stats)
    res: list[SearchHit] = []
    i = m - 1
    primes = PRIMES.ensure_count(i + need + 1)
    while True:
        if i + need > len(primes):
            primes = PRIMES.ensure_count(i + need + 1)
        C = math.prod(int(p) for p in primes[i : i + need])
        if C > bound:
            break
        p = int(primes[i])
        # recurse from the next prime index so primes stay distinct
        res.extend(next_tuple(i + 2, partial + (star(p),), k, c, bounds, max_abs_d, lower_cutoff, stats))
        i += 1
    return res


def _branch(args) -> tuple[list[SearchHit], SearchStats]:
    cfg, k, seed = args
    stats = SearchStats()
    partial = () if seed is None else (star(2, seed),)
    if len(partial) >= k or (cfg.max_abs_d is not None and primorial(k) > cfg.max_abs_d):
        return [], stats
    table = bound_table(cfg.c, k, cfg.bound_mode)
    hits = next_tuple(2, partial, k, cfg.c, table, cfg.max_abs_d, cfg.lower_cutoff, stats)
    return hits, stats


def enumerate_exponent(cfg: SearchConfig, stats: SearchStats | None = None) -> list[SearchHit]:
    """All D with E(D) | c and |D| > cutoff, per factor count k and 2-adic branch."""
    units = [(cfg, k, seed) for k in cfg.ks for seed in TWO_ADIC_SEEDS]
    out: list[SearchHit] = []
    for hits, st in pmap(_branch, units, cfg.tasks):
        out.extend(hits)
        if stats is not None:
            stats.merge(st)
    return sort_hits(out)


def _acceptable(e: int, c_max: int, dividing: bool) -> bool:
    return c_max % e == 0 if dividing else e <= c_max


def _brute_chunk(args) -> list[SearchHit]:
    c_max, lo, hi, dividing = args
    n = np.arange(lo, hi, dtype=np.int64)[fundamental_abs_mask(lo, hi)]
    status, q1s = screen(-n, c_max, dividing)
    hits = []
    for i in np.flatnonzero(status != ff.SCREEN_REJECT):
        D = -int(n[i])
        info = class_group(D)
        if _acceptable(info.exponent, c_max, dividing):
            hits.append(SearchHit.from_disc(D, info, int(q1s[i]) or None))
    return hits


def brute_force_range(
    c_max: int, lo: int, hi: int, dividing: bool = False, tasks: int = 1
) -> list[SearchHit]:
    """Every fundamental D with lo <= |D| < hi and E(D) <= c_max (or E | c_max)."""
    lo = max(lo, 3)
    if hi <= lo:
        return []
    units = [(c_max, a, min(a + CHUNK, hi), dividing) for a in range(lo, hi, CHUNK)]
    out: list[SearchHit] = []
    for hits in pmap(_brute_chunk, units, tasks):
        out.extend(hits)
    return sort_hits(out)
