"""Redei matrices over GF(2) and the 4-rank of Cl(D).

Bit matrices are lists of row integers; column j of a row is bit j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .arith import FundamentalDiscriminant, PrimeStarDisc, factor_fundamental, kronecker

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class RedeiMatrix:
    k: int
    rows: tuple[int, ...]
    neg_count: int

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def as_lists(self) -> list[list[int]]:
        return [[self.entry(i, j) for j in range(self.k)] for i in range(self.k)]

    @property
    def rank(self) -> int:
        return gf2_rank(self.rows)


def _bit(symbol: int) -> int:
    # (-1)^bit = symbol; only called on units
    return 0 if symbol == 1 else 1


def off_diagonal_rows(values: Sequence[int], primes: Sequence[int]) -> tuple[int, ...]:
    """Rows of c_ij with (-1)^c_ij = (p_j^* / p_i) for j != i, diagonal left 0."""
    k = len(values)
    rows = []
    for i in range(k):
        row = 0
        for j in range(k):
            if j != i and kronecker(values[j], primes[i]) == -1:
                row |= 1 << j
        rows.append(row)
    return tuple(rows)


def redei_matrix(D: int | FundamentalDiscriminant) -> RedeiMatrix:
    fd = D if isinstance(D, FundamentalDiscriminant) else factor_fundamental(D)
    values = [f.value for f in fd.factors]
    primes = [f.prime for f in fd.factors]
    rows = []
    for i, row in enumerate(off_diagonal_rows(values, primes)):
        rows.append(row | (bin(row).count("1") & 1) << i)
    return RedeiMatrix(len(rows), tuple(rows), sum(1 for v in values if v < 0))


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank over GF(2) of a matrix given as row bitmasks."""
    pivots: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in pivots:
                pivots[top] = r
                break
            r ^= pivots[top]
    return len(pivots)


def four_rank(D: int | FundamentalDiscriminant) -> int:
    M = redei_matrix(D)
    return M.k - 1 - M.rank


def reciprocity_pair(pi_star: int, pj_star: int) -> int:
    """(p_i^*/p_j)(p_j^*/p_i); -1 exactly when both star values are negative."""
    if -4 in (pi_star, pj_star):
        raise ValueError("the product rule does not cover 2* = -4")
    pi, pj = _prime_of(pi_star), _prime_of(pj_star)
    if pi == pj:
        raise ValueError("primes must differ")
    return kronecker(pi_star, pj) * kronecker(pj_star, pi)


def _prime_of(v: int) -> int:
    return 2 if abs(v) in (4, 8) else abs(v)


def row_sum_vector(D: int | FundamentalDiscriminant) -> tuple[int, ...]:
    M = redei_matrix(D)
    s = 0
    for r in M.rows:
        s ^= r
    return tuple((s >> j) & 1 for j in range(M.k))


def expected_row_sum(D: int | FundamentalDiscriminant) -> tuple[int, ...]:
    """Row sum predicted by reciprocity: zero unless 2* = -4."""
    fd = D if isinstance(D, FundamentalDiscriminant) else factor_fundamental(D)
    if fd.factors[0].value != -4:
        return (0,) * fd.omega
    tilde = -fd.d // 4
    syms = [kronecker(2, tilde)] + [kronecker(2, f.prime) for f in fd.factors[1:]]
    return tuple(_bit(s) for s in syms)


def _block_rank(rows: Sequence[int], r0: int, r1: int, c0: int, c1: int) -> int:
    mask = ((1 << c1) - 1) ^ ((1 << c0) - 1)
    return gf2_rank([rows[i] & mask for i in range(r0, r1)])


@lru_cache(maxsize=1 << 18)
def _min_rank(rows: tuple[int, ...]) -> int:
    l = len(rows)
    if l > EXHAUSTIVE_LIMIT:
        # blocks avoiding the diagonal keep their rank for every completion
        h = l // 2
        return max(_block_rank(rows, 0, h, h, l), _block_rank(rows, h, l, 0, h))
    best = l
    for diag in range(1 << l):
        r = gf2_rank([row | (((diag >> i) & 1) << i) for i, row in enumerate(rows)])
        if r < best:
            best = r
            if best == 0:
                break
    return best


def lower_redei_bound(partial: Sequence[PrimeStarDisc | int]) -> int:
    """Least rank of the leading l x l minor over all diagonal completions.

    Lower bound for the Redei rank of every D whose first l star factors are
    ``partial``. Exhaustive up to 20 factors, block-rank bound beyond.
    """
    values = [p.value if isinstance(p, PrimeStarDisc) else p for p in partial]
    if not values:
        return 0
    primes = [_prime_of(v) for v in values]
    if len(set(primes)) != len(primes):
        raise ValueError("repeated prime in partial factorization")
    return _min_rank(off_diagonal_rows(values, primes))


def rank_lower_bound_from_signs(M: RedeiMatrix) -> int:
    """ceil((t - 1)/2) for t negative star factors."""
    return max(0, math.ceil((M.neg_count - 1) / 2))
