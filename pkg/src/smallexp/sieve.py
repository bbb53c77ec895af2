"""Multifocused bit-vector sieve for |D| with no small split prime.

|D| runs over r + K*m where r is assembled by CRT from admissible residues
modulo 16, m1, m2, m3 and K indexes a lane. For each further sieve prime p a
table holds, per residue class r mod p, a 64-bit word whose bit k says whether
-(r + (64b + k) m) can still avoid splitting at p. ANDing the words for all
sieve primes leaves exactly the lanes where no sieve prime splits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from ._parallel import pmap
from .arith import PRIMES, factorint, is_fundamental, is_prime, kronecker
from .quadforms import class_group, order_upto, prime_form, split_primes

LANES = 64
TWO_MOD = 16
TWO_RESIDUES = (3, 4, 8, 11)

FULL_MODULI = (255255, 392863, 3065857)
FULL_SIEVE_PRIMES = tuple(int(p) for p in PRIMES.ensure(193) if 53 <= p <= 193)
FULL_ABS_BOUND = 31 * 10**19
DESK_MODULI = (3 * 5 * 7 * 11, 13 * 17, 19 * 23)
DESK_SIEVE_PRIMES = tuple(int(p) for p in PRIMES.ensure(97) if 29 <= p <= 97)
DESK_ABS_BOUND = 10**12


def _odd_prime_factors(m: int) -> list[int]:
    fac = factorint(m)
    if m % 2 == 0 or any(e > 1 for e in fac.values()):
        raise ValueError(f"modulus {m} must be odd and squarefree")
    return sorted(fac)


@dataclass(frozen=True)
class SieveConfig:
    moduli: tuple[int, ...] = DESK_MODULI
    sieve_primes: tuple[int, ...] = DESK_SIEVE_PRIMES
    abs_bound: int = DESK_ABS_BOUND
    two_mod: int = TWO_MOD
    lane_width: int = LANES

    def __post_init__(self):
        if self.two_mod != TWO_MOD:
            raise ValueError("the 2-adic modulus is fixed at 16")
        if self.lane_width != LANES:
            raise ValueError("lanes are 64-bit words")
        if self.abs_bound < 1:
            raise ValueError("abs_bound must be positive")
        mod_primes = self.modulus_primes
        if len(set(mod_primes)) != len(mod_primes):
            raise ValueError("moduli must be pairwise coprime")
        if not all(is_prime(p) and p > 2 for p in self.sieve_primes):
            raise ValueError("sieve primes must be odd primes")
        if set(mod_primes) & set(self.sieve_primes):
            raise ValueError("sieve primes must not divide the modulus")

    @classmethod
    def full_scale(cls) -> "SieveConfig":
        return cls(FULL_MODULI, FULL_SIEVE_PRIMES, FULL_ABS_BOUND)

    @classmethod
    def from_primes(cls, modulus_primes, sieve_primes_max: int, abs_bound: int, groups: int = 3) -> "SieveConfig":
        """Greedy split of the modulus primes into ``groups`` moduli of similar size."""
        ps = sorted(int(p) for p in modulus_primes)
        if 2 in ps:
            ps.remove(2)
        mods = [1] * groups
        for p in sorted(ps, reverse=True):
            mods[mods.index(min(mods))] *= p
        mods = tuple(sorted(m for m in mods if m > 1))
        top = max(ps) if ps else 2
        sieve = tuple(int(q) for q in PRIMES.ensure(sieve_primes_max) if top < q <= sieve_primes_max)
        return cls(mods, sieve, abs_bound)

    @property
    def modulus_primes(self) -> tuple[int, ...]:
        return tuple(p for m in self.moduli for p in _odd_prime_factors(m))

    @property
    def m(self) -> int:
        return self.two_mod * math.prod(self.moduli)

    @property
    def covered_primes(self) -> tuple[int, ...]:
        return tuple(sorted((2,) + self.modulus_primes + tuple(self.sieve_primes)))

    @property
    def first_unsieved_prime(self) -> int:
        """Smallest prime not covered by the modulus or the sieve primes."""
        covered = set(self.covered_primes)
        for p in PRIMES.ensure_count(len(covered) + 1):
            if int(p) not in covered:
                return int(p)
        raise AssertionError("unreachable")

    def combinations(self) -> int:
        return math.prod(len(admissible_residues(m)) for m in (self.two_mod,) + tuple(self.moduli))


def _qr_mask(p: int) -> np.ndarray:
    """mask[v] is True iff v is a nonzero square mod p."""
    mask = np.zeros(p, dtype=bool)
    mask[(np.arange(1, p) ** 2) % p] = True
    return mask


def admissible_residues(m_i: int) -> list[int]:
    """Residues r mod m_i with (-r/p) != 1 for every prime p | m_i."""
    if m_i == TWO_MOD:
        return list(TWO_RESIDUES)
    ps = _odd_prime_factors(m_i)
    r = np.arange(m_i, dtype=np.int64)
    ok = np.ones(m_i, dtype=bool)
    for p in ps:
        ok &= ~_qr_mask(p)[(-r) % p]
    return np.flatnonzero(ok).tolist()


class ResidueTables(NamedTuple):
    residues: tuple[np.ndarray, ...]
    primes: np.ndarray
    tables: np.ndarray
    first_block: int


def lane_words(p: int, m: int, block: int = 0) -> np.ndarray:
    """l_p[i] for i < p: bit k is 0 iff (-(i + (64 block + k) m) / p) = 1."""
    qr = _qr_mask(p)
    K = np.arange(LANES, dtype=np.int64) + LANES * block
    i = np.arange(p, dtype=np.int64)[:, None]
    v = (-(i + (K[None, :] * (m % p)) % p)) % p
    alive = ~qr[v]
    weights = np.left_shift(np.uint64(1), np.arange(LANES, dtype=np.uint64))
    return (alive.astype(np.uint64) * weights[None, :]).sum(axis=1, dtype=np.uint64)


def build_lane_tables(cfg: SieveConfig, first_block: int = 0, blocks: int = 1) -> ResidueTables:
    residues = tuple(np.array(admissible_residues(mi), dtype=np.int64) for mi in (cfg.two_mod,) + cfg.moduli)
    primes = np.array(cfg.sieve_primes, dtype=np.int64)
    width = int(primes.max()) if len(primes) else 1
    tables = np.zeros((blocks, len(primes), width), dtype=np.uint64)
    for b in range(blocks):
        for j, p in enumerate(cfg.sieve_primes):
            tables[b, j, :p] = lane_words(p, cfg.m, first_block + b)
    return ResidueTables(residues, primes, tables, first_block)


def _crt_terms(cfg: SieveConfig, residues) -> list[np.ndarray]:
    """a * e_i mod m for each residue a, where e_i is the CRT idempotent of m_i."""
    m = cfg.m
    out = []
    for mi, res in zip((cfg.two_mod,) + cfg.moduli, residues):
        co = m // mi
        e = co * pow(co, -1, mi) % m
        out.append(np.array([int(a) * e % m for a in res], dtype=np.uint64))
    return out


@njit(cache=True)
def _addmod(a, b, m):
    s = a + b
    if s >= m or s < a:
        s -= m
    return s


@njit(cache=True)
def _sieve_kernel(t0, t1, t2, t3, m, primes, tables, b0, Ql, Rl, Qh, Rh, lo3, hi3):
    np_ = primes.shape[0]
    cap = 4096
    out_r = np.empty(cap, np.uint64)
    out_k = np.empty(cap, np.int64)
    n = 0
    rp = np.empty(np_, np.int64)
    full = ~np.uint64(0)
    one = np.uint64(1)
    for i3 in range(lo3, hi3):
        for i0 in range(t0.shape[0]):
            s0 = _addmod(t3[i3], t0[i0], m)
            for i1 in range(t1.shape[0]):
                s1 = _addmod(s0, t1[i1], m)
                for i2 in range(t2.shape[0]):
                    r = _addmod(s1, t2[i2], m)
                    klo = Ql + (1 if r < Rl else 0)
                    khi = Qh + (1 if r < Rh else 0)
                    if khi <= klo:
                        continue
                    for j in range(np_):
                        rp[j] = np.int64(r % np.uint64(primes[j]))
                    for blk in range(klo // 64, (khi - 1) // 64 + 1):
                        word = full
                        t = tables[blk - b0]
                        for j in range(np_):
                            word &= t[j, rp[j]]
                            if word == 0:
                                break
                        if word == 0:
                            continue
                        lo_bit = klo - 64 * blk
                        if lo_bit > 0:
                            word &= full << np.uint64(lo_bit)
                        hi_bit = khi - 64 * blk
                        if hi_bit < 64:
                            word &= (one << np.uint64(hi_bit)) - one
                        while word != 0:
                            k = 0
                            while ((word >> np.uint64(k)) & one) == 0:
                                k += 1
                            word &= word - one
                            if n == cap:
                                cap *= 2
                                nr = np.empty(cap, np.uint64)
                                nk = np.empty(cap, np.int64)
                                nr[:n] = out_r[:n]
                                nk[:n] = out_k[:n]
                                out_r = nr
                                out_k = nk
                            out_r[n] = r
                            out_k[n] = 64 * blk + k
                            n += 1
    return out_r[:n], out_k[:n]


def _split_bounds(cfg: SieveConfig, lo: int, hi: int) -> tuple[int, int, int, int]:
    Ql, Rl = divmod(lo, cfg.m)
    Qh, Rh = divmod(hi, cfg.m)
    return Ql, Rl, Qh, Rh


def _run_part(args) -> list[int]:
    cfg, lo, hi, part, parts = args
    Ql, Rl, Qh, Rh = _split_bounds(cfg, lo, hi)
    b0 = Ql // LANES
    nblocks = Qh // LANES - b0 + 1
    tabs = build_lane_tables(cfg, b0, nblocks)
    terms = _crt_terms(cfg, tabs.residues)
    # partition along the longest residue list
    order = sorted(range(4), key=lambda i: len(terms[i]))
    t0, t1, t2, t3 = (terms[i] for i in order)
    step = -(-len(t3) // parts)
    lo3, hi3 = part * step, min(len(t3), (part + 1) * step)
    if lo3 >= hi3:
        return []
    rs, ks = _sieve_kernel(
        t0, t1, t2, t3, np.uint64(cfg.m), tabs.primes, tabs.tables, b0,
        Ql, np.uint64(Rl), Qh, np.uint64(Rh), lo3, hi3,
    )
    m = cfg.m
    return [int(r) + int(k) * m for r, k in zip(rs, ks)]


def sieve_survivors(cfg: SieveConfig, lo: int = 1, hi: int | None = None, tasks: int = 1) -> list[int]:
    """Sorted n in [lo, min(hi, abs_bound)) with n mod 16 in {3,4,8,11} and
    (-n/p) != 1 for every modulus and sieve prime p."""
    hi = cfg.abs_bound if hi is None else min(hi, cfg.abs_bound)
    lo = max(lo, 1)
    if hi <= lo:
        return []
    parts = max(1, tasks)
    out: list[int] = []
    for chunk in pmap(_run_part, [(cfg, lo, hi, i, parts) for i in range(parts)], tasks):
        out.extend(chunk)
    return sorted(out)


def brute_force_survivors(cfg: SieveConfig, lo: int, hi: int) -> list[int]:
    """Direct scan of [lo, hi) for the same survivor condition (test oracle)."""
    n = np.arange(lo, hi, dtype=np.int64)
    ok = np.isin(n % TWO_MOD, TWO_RESIDUES)
    for p in cfg.modulus_primes + tuple(cfg.sieve_primes):
        ok &= ~_qr_mask(p)[(-n) % p]
    return n[ok].tolist()


class SieveHit(NamedTuple):
    d: int
    smallest_split: int
    exponent_or_minus1: int

    def row(self) -> dict[str, int]:
        return {"D": self.d, "smallest_split_prime": self.smallest_split, "exponent_or_minus1": self.exponent_or_minus1}


def classify(n: int, c: int, start: int = 3) -> SieveHit | None:
    """Post-process a survivor: None if -n is not fundamental.

    The exponent is -1 when 4 p^c < |D| or an ideal of order > c
    above one of the first split primes already shows E(D) > c.
    """
    D = -n
    if not is_fundamental(D):
        return None
    qs = split_primes(D, 4, cap=max(10**6, start))
    p = qs[0]
    if 4 * p**c < n:
        return SieveHit(D, p, -1)
    orders = [order_upto(prime_form(D, q), c) for q in qs]
    if 0 in orders or math.lcm(*orders) > c:
        return SieveHit(D, p, -1)
    return SieveHit(D, p, class_group(D).exponent)


def sieve_run(cfg: SieveConfig, c: int = 8, lo: int = 1, hi: int | None = None, tasks: int = 1) -> list[SieveHit]:
    """Fundamental survivors with their smallest split prime and exponent (or -1)."""
    start = cfg.first_unsieved_prime
    hits = []
    for n in sieve_survivors(cfg, lo, hi, tasks):
        h = classify(n, c, start)
        if h is not None:
            assert kronecker(h.d, h.smallest_split) == 1 and h.smallest_split >= start
            hits.append(h)
    return hits
