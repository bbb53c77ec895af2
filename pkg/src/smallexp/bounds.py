"""Closed-form lower bounds for h(D) and the discriminant ceilings derived from them.

All real arithmetic runs in mpmath at ``DPS`` decimal digits. Lower bounds are
compared against thresholds through :func:`exceeds`, which shaves a relative
``2**-100`` off the bound so that rounding can only make pruning weaker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from typing import Callable

import mpmath
from mpmath import mpf

from .arith import nth_prime, primorial

DPS = 60
CHEN_A = 10**6
TATUZAWA_MIN_LOG = mpf("11.2")
BACH_MIN_LOG = 25
B_CAP = 10**130
SLACK = mpf(2) ** -100

# Small-exponent ERH rows; the source constants behind them are not published.
ERH_TABLE_STORED = {1: 1.7e3, 2: 6e6, 3: 9.7e10}
ERH_TABLE = {1: 1.7e3, 2: 6e6, 3: 9.7e10, 4: 3.4e15, 5: 2.3e20, 6: 2.5e25, 7: 3.9e30, 8: 8.9e35}

mpmath.mp.dps = DPS


def _log(x) -> mpf:
    return mpmath.log(mpf(x))


def exceeds(lower_bound, threshold) -> bool:
    """Conservative test lower_bound > threshold."""
    return lower_bound * (1 - SLACK) > threshold


def bach_split_prime_bound(absD) -> mpf:
    """Under ERH some prime <= this value splits in Q(sqrt(D))."""
    L = _log(absD)
    if L <= BACH_MIN_LOG:
        raise ValueError("bound needs |D| > e^25")
    return (mpf("1.881") * L + 2 * mpf("0.34") + mpf("5.5")) ** 2


def erh_discriminant_bound(c: int):
    """Least X with 4 * bach_split_prime_bound(|D|)^c < |D| for all |D| > X.

    Rows c <= 3 are stored values (returned as float), rows 4..8 are
    recomputed by bisection on log X (returned as mpf).
    """
    if not 1 <= c <= 8:
        raise ValueError("exponent must be in 1..8")
    if c in ERH_TABLE_STORED:
        return ERH_TABLE_STORED[c]

    def gap(t):
        return t - mpmath.log(4) - c * mpmath.log(bach_split_prime_bound(mpmath.e**t))

    lo, hi = mpf(BACH_MIN_LOG) + mpf("1e-30"), mpf(300)
    # gap is increasing on t > 25 for c <= 8
    if gap(lo) > 0:
        return mpmath.e**lo
    for _ in range(400):
        mid = (lo + hi) / 2
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    return mpmath.e**hi


def round_up_sig(x, digits: int = 2) -> float:
    """Round a positive number up to ``digits`` significant figures."""
    d = Decimal(mpmath.nstr(mpf(x), 40, min_fixed=1, max_fixed=0))
    exp = d.adjusted() - digits + 1
    q = Decimal(1).scaleb(exp)
    return float((d / q).to_integral_value(rounding="ROUND_CEILING") * q)


def tatuzawa_h_lower(absD) -> mpf:
    """h(D) lower bound when L(s, chi) has no zero in [1 - 1/(4 log|D|), 1)."""
    L = _log(absD)
    if L <= TATUZAWA_MIN_LOG:
        raise ValueError("bound needs |D| > e^11.2")
    return mpf("0.655") / (mpmath.pi * mpmath.e) * mpmath.sqrt(mpf(absD)) / L


def tatuzawa_one_exception_lower(A, absD) -> mpf:
    """h(D) lower bound valid for all |D| >= A with at most one exception."""
    LA = _log(A)
    if LA < TATUZAWA_MIN_LOG:
        raise ValueError("A must be >= e^11.2")
    if absD < A:
        raise ValueError("|D| must be >= A")
    return mpf("0.655") / (mpmath.pi * LA) * mpf(absD) ** (mpf(1) / 2 - 1 / LA)


def chen_branches(absD) -> tuple[mpf, mpf]:
    if absD < CHEN_A:
        raise ValueError("bound needs |D| >= 10^6")
    L = _log(absD)
    m = L / _log(CHEN_A)
    s = mpmath.sqrt(mpf(absD))
    first = s / (mpmath.pi * mpf("7.732") * L)
    second = m * mpf("1.5e6") * s / (mpmath.pi * mpmath.e**m * L)
    return first, second


def chen_h_lower(absD) -> mpf:
    """h(D) lower bound for |D| >= 10^6 with at most one exception."""
    return min(chen_branches(absD))


LOWER_BOUNDS: dict[str, tuple[Callable, int]] = {
    "chen_one_exception": (chen_h_lower, CHEN_A),
    "tatuzawa_no_siegel_zero": (tatuzawa_h_lower, math.ceil(math.exp(11.2)) + 1),
}


def compute_N(r: int) -> tuple[int, int]:
    """Least N with d_N >= e^11.2, p_N^(1/2 - 1/log d_N) >= 2^r and
    0.655/(pi e) sqrt(d_N)/log d_N >= 2^(r(N-1)); returns (N, d_N)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    N = 1
    while not N_conditions(r, N):
        N += 1
    return N, primorial(N)


def N_conditions(r: int, N: int) -> bool:
    d = primorial(N)
    L = _log(d)
    if L < TATUZAWA_MIN_LOG:
        return False
    if mpf(nth_prime(N)) ** (mpf(1) / 2 - 1 / L) < 2**r:
        return False
    return mpf("0.655") / (mpmath.pi * mpmath.e) * mpmath.sqrt(mpf(d)) / L >= mpf(2) ** (r * (N - 1))


def genus_class_number_cap(r: int, omega: int) -> int:
    """Largest h(D) compatible with E(D) = 2^r and omega(D) prime factors."""
    return 2 ** (r * (omega - 1))


@dataclass(frozen=True)
class BoundTable:
    c: int
    k: int
    ceilings: tuple[int, ...]
    mode: str = "chen_one_exception"

    def __getitem__(self, rank: int) -> int:
        return self.ceilings[rank]

    def threshold(self, rank: int) -> int:
        return threshold(self.c, self.k, rank)


def threshold(c: int, k: int, rank: int) -> int:
    """Largest class number of exponent dividing c when the Redei rank is ``rank``."""
    return 2**rank * c ** (k - 1 - rank)


@lru_cache(maxsize=None)
def ceiling_for(target: int, mode: str = "chen_one_exception") -> int:
    """Least integer X >= the mode's floor with bound(|D|) > target for every |D| > X.

    Both lower-bound functions are increasing on their domains, so the set
    where the bound exceeds the target is a ray and bisection finds its start.
    """
    bound, floor = LOWER_BOUNDS[mode]
    if exceeds(bound(floor), target):
        return floor
    if not exceeds(bound(B_CAP), target):
        raise ValueError(f"target {target} not reached below 1e130")
    lo, hi = mpmath.log(floor), mpmath.log(B_CAP)
    for _ in range(500):
        if hi - lo < mpf("1e-45"):
            break
        mid = (lo + hi) / 2
        if exceeds(bound(mpmath.e**mid), target):
            hi = mid
        else:
            lo = mid
    # exact to ~45 digits of log X; any error only raises the ceiling
    X = int(mpmath.ceil(mpmath.e**hi))
    assert exceeds(bound(X), target)
    return X


def bound_table(c: int, k: int, mode: str = "chen_one_exception") -> BoundTable:
    """Ceilings B_0..B_{k-1}: beyond B_l, h(D) > 2^l c^(k-1-l)."""
    if c not in (2, 4, 8):
        raise ValueError("bound tables are defined for c in {2, 4, 8}")
    if k < 1:
        raise ValueError("k must be >= 1")
    return BoundTable(c, k, tuple(ceiling_for(threshold(c, k, l), mode) for l in range(k)), mode)
