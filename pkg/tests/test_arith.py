import math

import pytest
from hypothesis import given, strategies as st
from sympy import primerange
from sympy.functions.combinatorial.numbers import jacobi_symbol

from smallexp.arith import (
    PRIMES,
    crt,
    factor_fundamental,
    factorint,
    fundamental_abs_mask,
    fundamental_part,
    is_fundamental,
    is_prime,
    kronecker,
    nth_prime,
    primes_up_to,
    primorial,
    sqrt_mod_prime,
    squarefree_mask,
    star,
)

SMALL_PRIMES = list(primerange(3, 10**4))


def test_kronecker_examples():
    assert kronecker(5, 5) == 0
    assert kronecker(-7, 2) == 1
    assert kronecker(-163, 41) == 1


def test_kronecker_edge_cases():
    assert kronecker(1, 0) == 1
    assert kronecker(-1, 0) == 1
    assert kronecker(2, 0) == 0
    assert kronecker(3, 1) == 1
    assert kronecker(-5, -1) == -1
    assert kronecker(4, 2) == 0


@pytest.mark.property
@given(st.integers(-10**9, 10**9), st.integers(1, 10**6), st.integers(1, 10**6))
def test_kronecker_multiplicative(D, m, n):
    assert kronecker(D, m * n) == kronecker(D, m) * kronecker(D, n)


@pytest.mark.property
@given(st.integers(-10**12, 10**12), st.integers(0, 10**6).map(lambda k: 2 * k + 1))
def test_kronecker_matches_jacobi_for_odd_n(D, n):
    assert kronecker(D, n) == jacobi_symbol(D % n, n)


@pytest.mark.property
@given(st.sampled_from(SMALL_PRIMES[:200]), st.integers(-10**6, 10**6))
def test_kronecker_solvability(q, D):
    if D % q == 0:
        return
    solvable = any((x * x - D) % q == 0 for x in range(q))
    assert (kronecker(D, q) == 1) == solvable


def test_is_fundamental_examples():
    assert is_fundamental(-163)
    assert not is_fundamental(-21)
    assert is_fundamental(-84)
    assert is_fundamental(-4) and is_fundamental(-8) and is_fundamental(8)
    assert not is_fundamental(-12) and not is_fundamental(-16)


def test_star_examples():
    assert star(3).value == -3
    assert star(13).value == 13
    assert star(2, -8).value == -8
    with pytest.raises(ValueError):
        star(2)
    with pytest.raises(ValueError):
        star(3, -4)
    with pytest.raises(ValueError):
        star(9)


@pytest.mark.property
@given(st.sampled_from(SMALL_PRIMES))
def test_star_is_fundamental(p):
    s = star(p)
    assert s.prime == p and is_fundamental(s.value)
    assert s.value == (-1) ** ((p - 1) // 2) * p


def test_factor_fundamental_examples():
    assert factor_fundamental(-5460).values == (-4, -3, 5, -7, 13)
    assert factor_fundamental(-163).values == (-163,)
    assert factor_fundamental(-84).values == (-4, -3, -7)
    assert factor_fundamental(-430950520).values == (8, 5, -7, -11, 13, -47, 229)
    with pytest.raises(ValueError):
        factor_fundamental(-21)


@pytest.mark.property
def test_factor_fundamental_roundtrip_up_to_1e6():
    lo, hi = 3, 10**6 + 1
    mask = fundamental_abs_mask(lo, hi)
    for n in range(lo, hi, 97):
        d = -n
        assert mask[n - lo] == is_fundamental(d)
    for n in (i + lo for i in mask.nonzero()[0][::37]):
        fd = factor_fundamental(-int(n))
        assert math.prod(fd.values) == -n
        ps = [f.prime for f in fd.factors]
        assert ps == sorted(set(ps)) and fd.omega == len(ps)
        assert all(is_fundamental(v) for v in fd.values)


@pytest.mark.property
def test_fundamental_mask_matches_scalar():
    lo, hi = 10**6, 10**6 + 5000
    mask = fundamental_abs_mask(lo, hi)
    assert [bool(m) for m in mask] == [is_fundamental(-n) for n in range(lo, hi)]
    small = fundamental_abs_mask(1, 200)
    assert [n for n in range(1, 200) if small[n - 1]] == [n for n in range(1, 200) if is_fundamental(-n)]


def test_squarefree_mask():
    lo, hi = 999_000, 1_001_000
    mask = squarefree_mask(lo, hi)
    assert list(mask) == [all(e == 1 for e in factorint(n).values()) for n in range(lo, hi)]


def test_fundamental_part():
    assert fundamental_part(-21) == -84
    assert fundamental_part(-4 * 9 * 7) == -7
    assert fundamental_part(-8 * 25) == -8
    with pytest.raises(ValueError):
        fundamental_part(49)


def test_primorial():
    assert primorial(1) == 2
    assert primorial(11) == 200560490130
    assert primorial(24) <= 238 * 10**32
    for n in range(2, 60):
        assert primorial(n) // primorial(n - 1) == nth_prime(n)


def test_primes_and_primality():
    assert list(primes_up_to(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert list(PRIMES.ensure(10**4)[: len(SMALL_PRIMES) + 1]) == [2] + SMALL_PRIMES
    assert is_prime(2**61 - 1) and not is_prime(3215031751)
    assert nth_prime(1) == 2 and nth_prime(1000) == 7919


@given(st.sampled_from(SMALL_PRIMES), st.integers(1, 10**9))
def test_sqrt_mod_prime(p, a):
    if kronecker(a, p) != 1:
        return
    x = sqrt_mod_prime(a, p)
    assert (x * x - a) % p == 0


def test_crt_examples():
    assert crt([(0, 3), (0, 5)]) == 0
    assert crt([(1, 3), (2, 5)]) == 7
    assert crt([(3, 16), (1, 3)]) == 19
    with pytest.raises(ValueError):
        crt([(1, 4), (1, 6)])


@pytest.mark.property
@given(st.lists(st.sampled_from([3, 5, 7, 11, 13, 16, 17, 19]), min_size=1, max_size=5, unique=True), st.data())
def test_crt_property(mods, data):
    res = [(data.draw(st.integers(0, m - 1)), m) for m in mods]
    x = crt(res)
    assert 0 <= x < math.prod(mods)
    assert all(x % m == r for r, m in res)
