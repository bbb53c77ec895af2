import math
from collections import Counter

import numpy as np
import pytest

from smallexp.arith import fundamental_abs_mask, kronecker
from smallexp.directsearch import (
    candidate_discriminants,
    direct_search,
    fields_with_split_prime,
    sift_x,
)
from smallexp.enumerator import brute_force_range
from smallexp.quadforms import class_group, order_upto, prime_form, smallest_split_prime


def order_divides_oracle(p, c):
    """Scan every fundamental D with |D| <= 4 p^c and test the prime ideal above p."""
    hi = 4 * p**c
    mask = fundamental_abs_mask(3, hi + 1)
    out = []
    for n in np.flatnonzero(mask) + 3:
        D = -int(n)
        if kronecker(D, p) != 1:
            continue
        o = order_upto(prime_form(D, p), c)
        if o and c % o == 0:
            out.append(D)
    return out


def test_fields_with_split_prime_example():
    assert fields_with_split_prime(2, 1) == [-7]


@pytest.mark.property
@pytest.mark.parametrize("p,c", [(2, 1), (2, 4), (2, 8), (3, 2), (3, 5), (3, 8), (5, 4), (5, 6), (7, 4)])
def test_fields_with_split_prime_matches_scan(p, c):
    got = fields_with_split_prime(p, c)
    assert got == order_divides_oracle(p, c)
    assert len(got) < 2 * p ** (c / 2)
    for D in got:
        o = order_upto(prime_form(D, p), c)
        assert o and c % o == 0


@pytest.mark.property
def test_count_bound_for_larger_primes():
    for p in (11, 13, 17):
        for c in (2, 3, 4):
            assert len(fields_with_split_prime(p, c)) < 2 * p ** (c / 2)


def test_sift_keeps_every_productive_x():
    for p, c in ((5, 6), (7, 6), (11, 4)):
        T = 4 * p**c
        xs = set(int(x) for x in sift_x(p, c))
        for D in fields_with_split_prime(p, c):
            if smallest_split_prime(D) != p:
                continue
            y_x = [x for x in range(1, math.isqrt(T - 1) + 1) if (T - x * x) % -D == 0
                   and math.isqrt((T - x * x) // -D) ** 2 == (T - x * x) // -D]
            assert any(x in xs for x in y_x), D


@pytest.mark.property
def test_candidates_are_sifted_supersets():
    for p, c in ((5, 6), (7, 6), (11, 4), (13, 4)):
        cands = set(candidate_discriminants(p, c))
        for D in cands:
            assert smallest_split_prime(D) == p
        for D in fields_with_split_prime(p, c):
            if smallest_split_prime(D) == p:
                assert D in cands


@pytest.mark.property
def test_direct_search_agrees_with_brute_force_below_1e6():
    max_p = 41
    hits = direct_search(max_p, 8)
    brute = brute_force_range(8, 3, 10**6 + 1, dividing=True)
    want = {h.d for h in brute if h.smallest_split <= max_p}
    assert {h.d for h in hits if -h.d <= 10**6} == want
    for h in hits:
        assert smallest_split_prime(h.d) == h.smallest_split <= max_p
        g = class_group(h.d)
        assert 8 % g.exponent == 0 and (g.h, g.exponent) == (h.h, h.exponent)


def test_direct_search_deterministic():
    assert direct_search(23, 4) == direct_search(23, 4, tasks=2)


@pytest.mark.parametrize("c,count", [(3, 17), (5, 27), (6, 432), (7, 33)])
def test_other_exponents(c, count):
    hits = direct_search(197, c)
    assert Counter(h.exponent for h in hits)[c] == count
    assert all(c % h.exponent == 0 for h in hits)


def test_rejects_bad_exponent():
    with pytest.raises(ValueError):
        direct_search(23, 0)
