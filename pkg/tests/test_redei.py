import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smallexp.arith import factor_fundamental, fundamental_abs_mask, star
from smallexp.quadforms import class_group
from smallexp.redei import (
    expected_row_sum,
    four_rank,
    gf2_rank,
    lower_redei_bound,
    off_diagonal_rows,
    rank_lower_bound_from_signs,
    reciprocity_pair,
    redei_matrix,
    row_sum_vector,
)

ODD_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]


def span_rank(rows):
    """Rank over GF(2) as log2 of the size of the row span (exhaustive)."""
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def all_fundamentals(hi):
    mask = fundamental_abs_mask(3, hi + 1)
    return [-(3 + int(i)) for i in np.flatnonzero(mask)]


def test_redei_examples():
    assert redei_matrix(-163).as_lists() == [[0]]
    assert redei_matrix(-84).as_lists() == [[1, 1, 0], [1, 0, 1], [1, 0, 1]]
    assert redei_matrix(-39).as_lists() == [[0, 0], [0, 0]]


def test_gf2_rank_examples():
    assert gf2_rank([0, 0, 0]) == 0
    assert gf2_rank([1 << i for i in range(7)]) == 7
    assert gf2_rank([0b011, 0b101, 0b101]) == 2


@pytest.mark.property
@given(st.lists(st.integers(0, 2**10 - 1), max_size=10))
def test_gf2_rank_matches_span_size(rows):
    assert gf2_rank(rows) == span_rank(rows)


def test_four_rank_examples():
    assert four_rank(-163) == 0
    assert four_rank(-84) == 0
    assert four_rank(-39) == 1
    assert four_rank(-430950520) == 3


def test_reciprocity_pair_examples():
    assert reciprocity_pair(-3, -7) == -1
    assert reciprocity_pair(5, -3) == 1
    assert reciprocity_pair(13, 5) == 1
    with pytest.raises(ValueError):
        reciprocity_pair(-4, 5)


@pytest.mark.property
@given(st.sampled_from(ODD_PRIMES + [2, 2]), st.sampled_from(ODD_PRIMES), st.sampled_from([-8, 8]))
def test_reciprocity_pair_sign_rule(p, q, two):
    if p == q:
        return
    a = star(p, two) if p == 2 else star(p)
    b = star(q)
    expect = -1 if a.value < 0 and b.value < 0 else 1
    assert reciprocity_pair(a.value, b.value) == expect


def test_row_sum_examples():
    assert row_sum_vector(-84) == (1, 1, 0)
    assert row_sum_vector(-39) == (0, 0)
    assert expected_row_sum(-84) == (1, 1, 0)


def test_lower_redei_bound_examples():
    assert lower_redei_bound([]) == 0
    assert lower_redei_bound([star(3)]) == 0
    assert lower_redei_bound([star(3), star(7)]) == 1
    # (13/5) = (5/13) = -1: off-diagonals equal, diagonal (1,1) gives rank 1
    assert lower_redei_bound([star(5), star(13)]) == 1
    # (29/5) = (5/29) = 1: zero diagonal works
    assert lower_redei_bound([star(5), star(29)]) == 0
    with pytest.raises(ValueError):
        lower_redei_bound([star(3), star(3)])


@pytest.mark.property
def test_matrix_invariants_and_sign_bound():
    rng = random.Random(3)
    Ds = all_fundamentals(10**6)
    for D in rng.sample(Ds, 20000):
        M = redei_matrix(D)
        rows = M.as_lists()
        for i in range(M.k):
            assert rows[i][i] == sum(rows[i][j] for j in range(M.k) if j != i) % 2
        for i in range(M.k):
            assert rows[i][-1] == sum(rows[i][:-1]) % 2
        assert M.rank >= rank_lower_bound_from_signs(M)
        assert 2 * M.rank >= M.neg_count - 1
        assert row_sum_vector(D) == expected_row_sum(D)


@pytest.mark.property
def test_four_rank_and_two_rank_match_class_groups_up_to_1e6():
    for D in all_fundamentals(10**6):
        g = class_group(D)
        fd = factor_fundamental(D)
        assert g.two_rank == fd.omega - 1, D
        assert g.four_rank == four_rank(fd), D


def random_discriminant(rng, k):
    ps = sorted(rng.sample(ODD_PRIMES + [2], k))
    return [star(p, rng.choice((-4, -8, 8))) if p == 2 else star(p) for p in ps]


@pytest.mark.property
def test_lower_bound_sound_on_extensions():
    rng = random.Random(7)
    for _ in range(10000):
        k = rng.randint(2, 9)
        factors = random_discriminant(rng, k)
        l = rng.randint(1, k - 1)
        M = redei_matrix(factor_fundamental(math.prod(f.value for f in factors)))
        assert lower_redei_bound(factors[:l]) <= M.rank


@pytest.mark.property
def test_lower_bound_monotone():
    rng = random.Random(9)
    for _ in range(3000):
        factors = random_discriminant(rng, rng.randint(2, 10))
        vals = [lower_redei_bound(factors[:l]) for l in range(1, len(factors) + 1)]
        assert vals == sorted(vals)


@pytest.mark.property
def test_lower_bound_exact_against_diagonal_search():
    rng = random.Random(13)
    for _ in range(300):
        factors = random_discriminant(rng, rng.randint(1, 7))
        vals = [f.value for f in factors]
        ps = [f.prime for f in factors]
        rows = off_diagonal_rows(vals, ps)
        best = min(
            span_rank([r | (((d >> i) & 1) << i) for i, r in enumerate(rows)]) for d in range(1 << len(rows))
        )
        assert lower_redei_bound(factors) == best


@pytest.mark.property
def test_block_bound_below_exhaustive_minimum(monkeypatch):
    import smallexp.redei as redei

    rng = random.Random(17)
    cases = [random_discriminant(rng, rng.randint(3, 10)) for _ in range(200)]
    exact = [lower_redei_bound(f) for f in cases]
    monkeypatch.setattr(redei, "EXHAUSTIVE_LIMIT", 0)
    redei._min_rank.cache_clear()
    try:
        approx = [lower_redei_bound(f) for f in cases]
    finally:
        redei._min_rank.cache_clear()
    assert all(a <= e for a, e in zip(approx, exact))
    assert any(a > 0 for a in approx)
