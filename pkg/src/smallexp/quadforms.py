"""Class groups of imaginary quadratic fields via reduced binary quadratic forms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import _fastforms as ff
from .arith import PRIMES, factor_fundamental, is_fundamental, kronecker, sqrt_mod_prime

SPLIT_PRIME_CAP = 10**5


class SplitPrimeOverflow(RuntimeError):
    """No split prime below the search cap."""


class QuadForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 or (abs(b) != a and a != c)


@dataclass(frozen=True)
class ClassGroupInfo:
    h: int
    divisors: tuple[int, ...]
    exponent: int
    two_rank: int

    @property
    def four_rank(self) -> int:
        return sum(1 for n in self.divisors if n % 4 == 0)

    def structure(self) -> str:
        return " x ".join(f"C{n}" for n in self.divisors) or "trivial"


def reduce(f: QuadForm) -> QuadForm:
    """Equivalent reduced form of a positive definite form."""
    a, b, c = f
    D = b * b - 4 * a * c
    if D >= 0 or a <= 0:
        raise ValueError(f"{tuple(f)} is not positive definite")
    while True:
        if b > a or b <= -a:
            b %= 2 * a
            if b > a:
                b -= 2 * a
            c = (b * b - D) // (4 * a)
        if a > c:
            a, b, c = c, -b, a
            continue
        if b < 0 and (a == c or b == -a):
            b = -b
        return QuadForm(a, b, c)


def principal(D: int) -> QuadForm:
    if D % 4 == 0:
        return QuadForm(1, 0, -D // 4)
    return QuadForm(1, 1, (1 - D) // 4)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Reduced representative of the product class (Gauss composition)."""
    D = f.disc
    if g.disc != D:
        raise ValueError(f"discriminants differ: {D} vs {g.disc}")
    (a1, b1, _c1), (a2, b2, c2) = (f, g) if f.a <= g.a else (g, f)
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, y1, _ = _xgcd(a2, a1)
    if s % d == 0:
        x2, y2, d1 = 0, -1, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    return reduce(QuadForm(a3, b3, (b3 * b3 - D) // (4 * a3)))


def inverse(f: QuadForm) -> QuadForm:
    return reduce(QuadForm(f.a, -f.b, f.c))


def power(f: QuadForm, e: int) -> QuadForm:
    """f^e by square-and-multiply on reduced forms."""
    if e < 0:
        return power(inverse(f), -e)
    result = principal(f.disc)
    base = reduce(f)
    while e:
        if e & 1:
            result = compose(result, base)
        base = compose(base, base)
        e >>= 1
    return result


def order_upto(f: QuadForm, limit: int) -> int:
    """Order of the class of f if it is at most ``limit``, else 0."""
    g = reduce(f)
    for j in range(1, limit + 1):
        if g.a == 1:
            return j
        g = compose(g, f)
    return 0


def _ideal_form(D: int, p: int) -> QuadForm:
    if p == 2:
        b = {1: 1, 0: 0, 4: 2}[D % 8]
    else:
        b = sqrt_mod_prime(D, p)
        if (b - D) % 2:
            b = p - b
    return reduce(QuadForm(p, b, (b * b - D) // (4 * p)))


def prime_form(D: int, q: int) -> QuadForm:
    """Reduced form in the class of a prime ideal above the split prime q."""
    if kronecker(D, q) != 1:
        raise ValueError(f"{q} does not split in Q(sqrt({D}))")
    return _ideal_form(D, q)


def split_primes(D: int, count: int = 1, cap: int = SPLIT_PRIME_CAP) -> list[int]:
    """The ``count`` smallest primes q with (D/q) = 1."""
    out = []
    for p in PRIMES.ensure(cap):
        p = int(p)
        if p > cap:
            break
        if kronecker(D, p) == 1:
            out.append(p)
            if len(out) == count:
                return out
    raise SplitPrimeOverflow(f"fewer than {count} split primes <= {cap} for D = {D}")


def smallest_split_prime(D: int, cap: int = SPLIT_PRIME_CAP) -> int:
    return split_primes(D, 1, cap)[0]


def order_exceeds(q: int, c: int, D: int) -> bool:
    """True iff q^c < |D|/4, which forces the prime ideal above q to have order > c."""
    return 4 * q**c < abs(D)


def reduced_forms(D: int) -> Iterator[QuadForm]:
    """All reduced primitive forms of discriminant D < 0, by exhaustive search."""
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            yield QuadForm(a, b, c)
        a += 1


def _relations_python(D: int, gen_primes) -> tuple[int, np.ndarray]:
    elems = [principal(D)]
    vecs = [()]
    index = {elems[0]: 0}
    rows: list[list[int]] = []
    for p in gen_primes:
        p = int(p)
        if kronecker(D, p) == -1:
            continue
        g = _ideal_form(D, p)
        if g in index:
            continue
        ng = len(rows)
        pw, j = g, 1
        while pw not in index:
            pw = compose(pw, g)
            j += 1
        hit = vecs[index[pw]]
        rows.append([-v for v in hit] + [0] * (ng - len(hit)) + [j])
        h = len(elems)
        x = g
        for i in range(1, j):
            for t in range(h):
                y = compose(elems[t], x)
                index[y] = len(elems)
                elems.append(y)
                vecs.append(vecs[t] + (0,) * (ng - len(vecs[t])) + (i,))
            x = compose(x, g)
    n = len(rows)
    rel = np.zeros((n, n), dtype=object)
    for i, row in enumerate(rows):
        rel[i, : len(row)] = row
    return len(elems), rel


def _generator_primes(D: int) -> np.ndarray:
    # classes of prime ideals of norm <= sqrt(|D|/3) generate Cl(D)
    bound = math.isqrt(-D // 3) + 1
    primes = PRIMES.ensure(bound)
    return primes[: np.searchsorted(primes, bound, side="right")]


def invariant_factors(rel) -> tuple[int, ...]:
    """Invariant factors (> 1) of Z^n / (row lattice of a nonsingular square matrix)."""
    m = [[int(x) for x in row] for row in rel]
    n = len(m)
    diag = []
    for t in range(n):
        while True:
            piv = min(
                ((abs(m[i][j]), i, j) for i in range(t, n) for j in range(t, n) if m[i][j]),
                default=None,
            )
            if piv is None:
                raise ValueError("singular relation matrix")
            _, i, j = piv
            m[t], m[i] = m[i], m[t]
            for row in m:
                row[t], row[j] = row[j], row[t]
            p = m[t][t]
            done = True
            for i in range(t + 1, n):
                q = m[i][t] // p
                if q:
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                if m[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = m[t][j] // p
                if q:
                    for row in m:
                        row[j] -= q * row[t]
                if m[t][j]:
                    done = False
            if done:
                break
        diag.append(abs(m[t][t]))
    # enforce the divisibility chain
    for i in range(n):
        for j in range(i + 1, n):
            g = math.gcd(diag[i], diag[j])
            diag[i], diag[j] = g, diag[i] * diag[j] // g
    return tuple(d for d in diag if d > 1)


def class_group(D: int) -> ClassGroupInfo:
    """Order, elementary divisors, exponent and 2-rank of Cl(D)."""
    if D >= 0 or not is_fundamental(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    gens = _generator_primes(D)
    if -D < ff.GROUP_ABS_LIMIT:
        h, _, rel, _ = ff.group_relations(D, gens)
    else:
        h, rel = _relations_python(D, gens)
    divisors = invariant_factors(rel)
    assert math.prod(divisors) == h
    return ClassGroupInfo(
        h=int(h),
        divisors=divisors,
        exponent=divisors[-1] if divisors else 1,
        two_rank=sum(1 for n in divisors if n % 2 == 0),
    )


def class_number(D: int) -> int:
    """h(D): the number of reduced forms, i.e. the size of the enumerated class group."""
    return class_group(D).h


def exponent(D: int) -> int:
    return class_group(D).exponent


def omega(D: int) -> int:
    return factor_fundamental(D).omega
