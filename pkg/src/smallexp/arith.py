"""Exact integer primitives: Kronecker symbols, primes, star-discriminants, CRT."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TWO_STARS = (-4, -8, 8)

# Deterministic Miller-Rabin witnesses, valid for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class PrimeStarDisc(NamedTuple):
    value: int
    prime: int


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for arbitrary integers a and n."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    # factor out powers of two from n
    v = (n & -n).bit_length() - 1
    if v:
        if a % 2 == 0:
            return 0
        n >>= v
        if v & 1 and a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (sieve of Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return np.flatnonzero(sieve).astype(np.int64)


class PrimeTable:
    """Growable table of consecutive primes, extended by segmented sieving."""

    def __init__(self, limit: int = 1 << 16):
        self.limit = max(limit, 100)
        self.primes = primes_up_to(self.limit)

    def ensure(self, limit: int) -> np.ndarray:
        if limit <= self.limit:
            return self.primes
        new_limit = max(limit, 2 * self.limit)
        base = primes_up_to(math.isqrt(new_limit) + 1)
        chunks = [self.primes]
        seg = 1 << 24
        lo = self.limit + 1
        while lo <= new_limit:
            hi = min(lo + seg, new_limit + 1)
            mask = np.ones(hi - lo, dtype=bool)
            for p in base:
                p = int(p)
                if p * p >= hi:
                    break
                start = max(p * p, (lo + p - 1) // p * p)
                mask[start - lo :: p] = False
            chunks.append(np.flatnonzero(mask).astype(np.int64) + lo)
            lo = hi
        self.primes = np.concatenate(chunks)
        self.limit = new_limit
        return self.primes

    def ensure_count(self, n: int) -> np.ndarray:
        while len(self.primes) < n:
            self.ensure(2 * self.limit)
        return self.primes

    def nth(self, n: int) -> int:
        """The n-th prime, 1-based (nth(1) == 2)."""
        return int(self.ensure_count(n)[n - 1])


PRIMES = PrimeTable()


def nth_prime(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return PRIMES.nth(n)


@lru_cache(maxsize=None)
def primorial(n: int) -> int:
    """Product of the first n primes."""
    if n < 1:
        raise ValueError("primorial needs n >= 1")
    return math.prod(int(p) for p in PRIMES.ensure_count(n)[:n])


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    n += 1
    while not is_prime(n):
        n += 1
    return n


def sqrt_mod_prime(a: int, p: int) -> int:
    """Some x with x^2 = a mod p, p prime (Tonelli-Shanks)."""
    a %= p
    if p == 2 or a == 0:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    for p, e in factorint(n).items():
        if e > 1:
            return False
    return True


def factorint(n: int) -> dict[int, int]:
    """Prime factorization of |n|: trial division, then sympy for the cofactor."""
    n = abs(n)
    out: dict[int, int] = {}
    for p in PRIMES.ensure(1 << 16):
        p = int(p)
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    else:
        if n > 1:
            import sympy

            for p, e in sympy.factorint(n).items():
                out[int(p)] = out.get(int(p), 0) + int(e)
            n = 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_mask(lo: int, hi: int) -> np.ndarray:
    """mask[i] is True iff lo + i is squarefree, for 1 <= lo < hi."""
    mask = np.ones(hi - lo, dtype=bool)
    for p in PRIMES.ensure(math.isqrt(hi) + 1):
        q = int(p) * int(p)
        if q >= hi:
            break
        mask[(-lo) % q :: q] = False
    return mask


def fundamental_abs_mask(lo: int, hi: int) -> np.ndarray:
    """mask[i] is True iff -(lo + i) is a fundamental discriminant, 1 <= lo < hi."""
    n = np.arange(lo, hi, dtype=np.int64)
    odd = (n % 4 == 3) & squarefree_mask(lo, hi)
    r16 = n % 16
    even = (r16 == 4) | (r16 == 8)
    qlo = max(1, lo // 4)
    sf4 = squarefree_mask(qlo, hi // 4 + 2)
    idx = np.clip(n // 4 - qlo, 0, len(sf4) - 1)
    return odd | (even & sf4[idx] & (n >= 4))


def is_fundamental(d: int) -> bool:
    """True iff d is the discriminant of a quadratic field."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def fundamental_part(d: int) -> int:
    """The fundamental discriminant of Q(sqrt(d)) for a non-square d."""
    if d == 0:
        raise ValueError("d must be nonzero")
    s = -1 if d < 0 else 1
    for p, e in factorint(d).items():
        if e % 2:
            s *= p
    if s == 1:
        raise ValueError(f"{d} is a square")
    return s if s % 4 == 1 else 4 * s


def star(p: int, two_variant: int | None = None) -> PrimeStarDisc:
    """The prime discriminant attached to p; for p = 2 pick one of -4, -8, 8."""
    if p == 2:
        if two_variant is None:
            raise ValueError("p = 2 needs a selector from (-4, -8, 8)")
        if two_variant not in TWO_STARS:
            raise ValueError(f"bad selector {two_variant} for p = 2")
        return PrimeStarDisc(two_variant, 2)
    if two_variant is not None:
        raise ValueError("selector only allowed for p = 2")
    if p < 3 or not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return PrimeStarDisc(p if p % 4 == 1 else -p, p)


def star_value(p: int) -> int:
    """(-1)^((p-1)/2) p for odd p, without the primality check."""
    return p if p % 4 == 1 else -p


class FundamentalDiscriminant(NamedTuple):
    d: int
    factors: tuple[PrimeStarDisc, ...]

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(f.value for f in self.factors)


def factor_fundamental(d: int) -> FundamentalDiscriminant:
    """Split a fundamental discriminant into star-discriminants with increasing primes."""
    if not is_fundamental(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    fac = factorint(d)
    factors = []
    odd = 1
    for p in sorted(fac):
        if p == 2:
            continue
        factors.append(star(p))
        odd *= factors[-1].value
    if 2 in fac:
        two = d // odd
        factors.insert(0, star(2, two))
    out = FundamentalDiscriminant(d, tuple(factors))
    assert math.prod(out.values) == d
    return out


def from_factors(factors: Sequence[PrimeStarDisc]) -> FundamentalDiscriminant:
    fs = tuple(sorted(factors, key=lambda f: f.prime))
    primes = [f.prime for f in fs]
    if len(set(primes)) != len(primes):
        raise ValueError("repeated prime in factor list")
    return FundamentalDiscriminant(math.prod(f.value for f in fs), fs)


def crt(residues: Iterable[tuple[int, int]]) -> int:
    """Solve x = r_i mod m_i for pairwise coprime m_i; result in [0, prod m_i)."""
    x, m = 0, 1
    for r, mi in residues:
        if math.gcd(m, mi) != 1:
            raise ValueError(f"modulus {mi} not coprime to {m}")
        t = (r - x) * pow(m, -1, mi) % mi
        x += m * t
        m *= mi
    return x % m
