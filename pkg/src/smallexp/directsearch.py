"""Fields in which a given small prime splits with ideal order dividing c.

If the prime ideal above p has order dividing c then p^c is the norm of an
integer (x + y sqrt(D))/2, so 4 p^c = x^2 + |D| y^2 with 1 <= x < 2 p^(c/2).
Every such field is therefore found by scanning x and taking the fundamental
part of x^2 - 4 p^c.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from . import _fastforms as ff
from .arith import PRIMES, fundamental_part, is_fundamental, kronecker
from ._parallel import pmap
from .enumerator import _SPLIT_SEARCH, SearchHit, sort_hits
from .quadforms import class_group, power, prime_form, split_primes

WHEEL_PRIMES = (3, 5, 7, 11, 13, 17, 19)
DEFAULT_MAX_P = 197


def _isqrt_below(T: int) -> int:
    """Largest x with x*x < T."""
    return math.isqrt(T - 1)


def _candidate(T: int, x: int) -> int | None:
    """The fundamental D with |D| y^2 = T - x^2, or None when there is none."""
    N = T - x * x
    if N <= 0:
        return None
    D = fundamental_part(-N)
    y2, rem = divmod(N, -D)
    if rem or math.isqrt(y2) ** 2 != y2:
        return None
    return D


def _ideal_order_divides(D: int, p: int, c: int) -> bool:
    return kronecker(D, p) == 1 and power(prime_form(D, p), c).a == 1


def fields_with_split_prime(p: int, c: int) -> list[int]:
    """Sorted fundamental D < 0 in which p splits and the ideal above p has order | c.

    Plain scan over every x, meant for small p^c; see :func:`direct_search`.
    """
    T = 4 * p**c
    out = set()
    for x in range(1, _isqrt_below(T) + 1):
        D = _candidate(T, x)
        if D is not None and _ideal_order_divides(D, p, c):
            out.add(D)
    return sorted(out, key=abs)


def _qr_table(qs: list[int]) -> np.ndarray:
    """table[j, v] is True iff v is a nonzero square mod qs[j]."""
    width = max(qs) if qs else 1
    tab = np.zeros((len(qs), width), dtype=np.bool_)
    for j, q in enumerate(qs):
        tab[j, (np.arange(1, q) ** 2) % q] = True
    return tab


@njit(cache=True)
def _sift(xmax, W, wheel, qs, Tq, qr):
    out = np.empty(1024, dtype=np.int64)
    n = 0
    base = 0
    while base <= xmax:
        for r in wheel:
            x = base + r
            if x < 1 or x > xmax:
                continue
            keep = True
            for j in range(qs.shape[0]):
                q = qs[j]
                v = x % q
                v = (v * v - Tq[j]) % q
                if qr[j, v]:
                    keep = False
                    break
            if keep:
                if n == out.shape[0]:
                    grown = np.empty(2 * n, dtype=np.int64)
                    grown[:n] = out
                    out = grown
                out[n] = x
                n += 1
        base += W
    return out[:n]


def sift_x(p: int, c: int) -> np.ndarray:
    """x in [1, sqrt(4p^c)) with (x^2 - 4p^c / q) != 1 for every prime q < p.

    If q | y the symbol is 0, otherwise it equals (D/q); so every field whose
    smallest split prime is p keeps at least one of its x.
    """
    T = 4 * p**c
    if T >= 1 << 63:
        raise ValueError("4 p^c must fit in a signed 64-bit word")
    xmax = _isqrt_below(T)
    small = [int(q) for q in PRIMES.ensure(p) if 2 < q < p]
    wq = [q for q in small if q in WHEEL_PRIMES]
    rest = [q for q in small if q not in WHEEL_PRIMES]
    W = math.prod(wq)
    xs = np.arange(W, dtype=np.int64)
    ok = np.ones(W, dtype=bool)
    for q in wq:
        ok &= ~_qr_table([q])[0][((xs % q) ** 2 - T) % q]
    wheel = xs[ok]
    qs = np.array(rest, dtype=np.int64)
    Tq = np.array([T % q for q in rest], dtype=np.int64)
    return _sift(xmax, W, wheel, qs, Tq, _qr_table(rest) if rest else np.zeros((0, 1), dtype=np.bool_))


@njit(cache=True)
def _is_square(n):
    if n < 0:
        return False
    r = np.int64(np.sqrt(np.float64(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r * r == n


@njit(cache=True)
def _fundamental_candidates(xs, T, p, trial):
    """D with |D| y^2 = T - x^2, (D/q) != 1 for primes q < p and (D/p) = 1; else 0.

    Squares are stripped by trial division up to N^(1/3); what remains has at
    most two prime factors, so it is a square or squarefree.
    """
    out = np.zeros(xs.shape[0], np.int64)
    for i in range(xs.shape[0]):
        x = xs[i]
        N = T - x * x
        m = N
        s = 1
        for j in range(trial.shape[0]):
            q = trial[j]
            if q * q * q > m:
                break
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            if e & 1:
                s *= q
        if not _is_square(m):
            s *= m
        D = -s if s % 4 == 3 else -4 * s
        if (N % -D) != 0 or not _is_square(N // -D):
            continue
        ok = ff.kron_prime(D, p) == 1
        for j in range(trial.shape[0]):
            q = trial[j]
            if q >= p or not ok:
                break
            if ff.kron_prime(D, q) == 1:
                ok = False
        if ok:
            out[i] = D
    return out


_TRIAL = PRIMES.ensure(1 << 22)
_TRIAL = _TRIAL[_TRIAL < 1 << 22]


def candidate_discriminants(p: int, c: int) -> list[int]:
    """Distinct D from the sifted x whose smallest split prime is exactly p."""
    Ds = _fundamental_candidates(sift_x(p, c), 4 * p**c, p, _TRIAL)
    return sorted({int(d) for d in Ds if d}, key=abs)


EXTRA_SPLIT_PRIMES = 8


def _more_split_primes_pass(D: int, c: int) -> bool:
    """Necessary condition: ideals above the first few split primes have order | c."""
    return all(power(prime_form(D, q), c).a == 1 for q in split_primes(D, EXTRA_SPLIT_PRIMES))


def search_prime(args) -> list[SearchHit]:
    """Hits with smallest split prime exactly p and E(D) | c."""
    p, c = args
    Ds = candidate_discriminants(p, c)
    if not Ds:
        return []
    status, _ = ff.screen(np.array(Ds, dtype=np.int64), _SPLIT_SEARCH, c, True)
    hits = []
    for D, st in zip(Ds, status):
        if st == ff.SCREEN_REJECT or not _ideal_order_divides(D, p, c):
            continue
        if not _more_split_primes_pass(D, c):
            continue
        info = class_group(D)
        if c % info.exponent == 0:
            hits.append(SearchHit.from_disc(D, info, p))
    return hits


def direct_search(max_p: int = DEFAULT_MAX_P, c: int = 8, tasks: int = 1) -> list[SearchHit]:
    """All fields with E(D) | c whose smallest split prime is at most max_p."""
    if c < 1:
        raise ValueError("c must be positive")
    ps = [int(p) for p in PRIMES.ensure(max_p) if p <= max_p]
    # largest primes first so the slow items start early in parallel runs
    out = []
    for hits in pmap(search_prime, [(p, c) for p in reversed(ps)], tasks):
        out.extend(hits)
    hits = sort_hits(out)
    assert all(is_fundamental(h.d) for h in hits)
    return hits
