"""Numba kernels for binary quadratic forms in int64.

Forms are carried as (a, b, c); ``c`` is always recomputed from (a, b, D) so
the only products formed are b*b with |b| <= a. Callers must keep
``a*a < 2**63``: composition of two reduced forms is safe for |D| < 2**33,
composition with a prime form of norm q while q*q*|D|/3 < 8e18.
"""

from __future__ import annotations

import numpy as np
from numba import njit, types
from numba.typed import Dict

GROUP_ABS_LIMIT = 1 << 33
SAFE_PRODUCT = 8 * 10**18
MAX_GENERATORS = 48
SCREEN_REJECT = 0
SCREEN_PASS = 1
SCREEN_FALLBACK = 2


@njit(cache=True)
def xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


@njit(cache=True)
def reduce_form(a, b, D):
    while True:
        if b > a or b <= -a:
            a2 = 2 * a
            b = b % a2
            if b > a:
                b -= a2
        c = (b * b - D) // (4 * a)
        if a > c:
            a, b = c, -b
            continue
        if b < 0 and a == c:
            b = -b
        return a, b, c


@njit(cache=True)
def compose(a1, b1, c1, a2, b2, c2, D):
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1 = 0
        d = a1
    else:
        d, u, v = xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2 = -1
        x2 = 0
        d1 = d
    else:
        d1, x2, y2 = xgcd(s, d)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    t = (y1 % v1) * (y2 % v1) % v1
    t = t * (n % v1) % v1
    r = (t - (x2 % v1) * (c2 % v1) % v1) % v1
    return reduce_form(v1 * v2, b2 + 2 * v2 * r, D)


@njit(cache=True)
def powmod(b, e, m):
    r = 1
    b %= m
    while e > 0:
        if e & 1:
            r = r * b % m
        b = b * b % m
        e >>= 1
    return r


@njit(cache=True)
def kron_prime(D, p):
    """(D/p) for a prime p < 2**31."""
    if p == 2:
        r = D % 8
        if r == 1 or r == 7:
            return 1
        if r == 3 or r == 5:
            return -1
        return 0
    a = D % p
    if a == 0:
        return 0
    return 1 if powmod(a, (p - 1) // 2, p) == 1 else -1


@njit(cache=True)
def sqrt_mod(a, p):
    a %= p
    if a == 0 or p == 2:
        return a
    if p % 4 == 3:
        return powmod(a, (p + 1) // 4, p)
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m = s
    c = powmod(z, q, p)
    t = powmod(a, q, p)
    r = powmod(a, (q + 1) // 2, p)
    while t != 1:
        i = 0
        t2 = t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = powmod(c, 1 << (m - i - 1), p)
        m = i
        c = b * b % p
        t = t * c % p
        r = r * b % p
    return r


@njit(cache=True)
def ideal_form(D, p):
    """Reduced form of a prime ideal above p (split or ramified)."""
    if p == 2:
        r = D % 8
        if r == 1:
            b = 1
        elif r == 0:
            b = 0
        else:
            b = 2
    else:
        b = sqrt_mod(D % p, p)
        if (b - D) % 2 != 0:
            b = p - b
    return reduce_form(p, b, D)


@njit(cache=True)
def _order_upto(a, b, c, D, limit):
    """Order of the class of (a, b, c) if <= limit, else 0."""
    if a == 1:
        return 1
    ga, gb, gc = a, b, c
    for j in range(2, limit + 1):
        ga, gb, gc = compose(ga, gb, gc, a, b, c, D)
        if ga == 1:
            return j
    return 0


@njit(cache=True)
def _power_principal(a, b, c, D, e):
    ga, gb, gc = a, b, c
    for _ in range(e - 1):
        ga, gb, gc = compose(ga, gb, gc, a, b, c, D)
    return ga == 1


@njit(cache=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def screen(Ds, primes, c, dividing):
    """Cheap exponent tests (split primes, order bound, prime-form powers).

    Returns (status, q1): status 0 proves the exponent is not acceptable,
    1 means a full class group is needed, 2 means int64 limits were hit.
    Acceptable means E | c when ``dividing`` else E <= c.
    """
    n = Ds.shape[0]
    status = np.zeros(n, np.int8)
    q1s = np.zeros(n, np.int64)
    for idx in range(n):
        D = Ds[idx]
        if D >= 0:
            continue
        absD = -D
        q1 = 0
        q2 = 0
        for k in range(primes.shape[0]):
            p = primes[k]
            if kron_prime(D, p) == 1:
                if q1 == 0:
                    q1 = p
                else:
                    q2 = p
                    break
        if q2 == 0:
            status[idx] = SCREEN_FALLBACK
            continue
        q1s[idx] = q1
        # order bound: q^c < |D|/4 forces order > c
        pw = 1
        for _ in range(c):
            if pw > absD // (4 * q1):
                pw = absD
                break
            pw *= q1
        if 4 * pw < absD:
            continue
        if q2 * q2 > (SAFE_PRODUCT // absD) * 3:
            status[idx] = SCREEN_FALLBACK
            continue
        a, b, cc = ideal_form(D, q1)
        a2, b2, c2 = ideal_form(D, q2)
        if dividing:
            if not _power_principal(a, b, cc, D, c):
                continue
            if not _power_principal(a2, b2, c2, D, c):
                continue
        else:
            j1 = _order_upto(a, b, cc, D, c)
            if j1 == 0:
                continue
            j2 = _order_upto(a2, b2, c2, D, c)
            if j2 == 0:
                continue
            if j1 // _gcd(j1, j2) * j2 > c:
                continue
        status[idx] = SCREEN_PASS
    return status, q1s


@njit(cache=True)
def _key(a, b):
    return (a << 24) | (b + a)


@njit(cache=True)
def group_relations(D, gen_primes):
    """Enumerate Cl(D) from prime-ideal generators.

    Returns (h, ngen, relations, gens) where relations is an ngen x ngen
    integer matrix whose rows generate all relations between the generator
    classes gens[i] = (a, b, c).
    """
    cap = 64
    A = np.empty(cap, np.int64)
    B = np.empty(cap, np.int64)
    C = np.empty(cap, np.int64)
    vec = np.zeros((cap, MAX_GENERATORS), np.int64)
    table = Dict.empty(key_type=types.int64, value_type=types.int64)
    a0, b0, c0 = reduce_form(1, -D % 2, D)
    A[0], B[0], C[0] = a0, b0, c0
    table[_key(a0, b0)] = 0
    h = 1
    ngen = 0
    rel = np.zeros((MAX_GENERATORS, MAX_GENERATORS), np.int64)
    gens = np.zeros((MAX_GENERATORS, 3), np.int64)
    for k in range(gen_primes.shape[0]):
        p = gen_primes[k]
        if kron_prime(D, p) == -1:
            continue
        ga, gb, gc = ideal_form(D, p)
        if _key(ga, gb) in table:
            continue
        pa, pb, pc = ga, gb, gc
        j = 1
        while _key(pa, pb) not in table:
            pa, pb, pc = compose(pa, pb, pc, ga, gb, gc, D)
            j += 1
        hit = table[_key(pa, pb)]
        for t in range(ngen):
            rel[ngen, t] = -vec[hit, t]
        rel[ngen, ngen] = j
        gens[ngen, 0], gens[ngen, 1], gens[ngen, 2] = ga, gb, gc
        new_h = h * j
        if new_h > cap:
            while cap < new_h:
                cap *= 2
            A2 = np.empty(cap, np.int64)
            B2 = np.empty(cap, np.int64)
            C2 = np.empty(cap, np.int64)
            vec2 = np.zeros((cap, MAX_GENERATORS), np.int64)
            A2[:h] = A[:h]
            B2[:h] = B[:h]
            C2[:h] = C[:h]
            vec2[:h] = vec[:h]
            A, B, C, vec = A2, B2, C2, vec2
        xa, xb, xc = ga, gb, gc
        pos = h
        for i in range(1, j):
            for t in range(h):
                ya, yb, yc = compose(A[t], B[t], C[t], xa, xb, xc, D)
                A[pos], B[pos], C[pos] = ya, yb, yc
                vec[pos] = vec[t]
                vec[pos, ngen] = i
                table[_key(ya, yb)] = pos
                pos += 1
            xa, xb, xc = compose(xa, xb, xc, ga, gb, gc, D)
        h = new_h
        ngen += 1
    return h, ngen, rel[:ngen, :ngen].copy(), gens[:ngen].copy()
