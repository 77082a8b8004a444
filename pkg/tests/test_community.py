import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcma.community import (
    Community,
    cohesion,
    merge,
    merge_all,
    overlap,
    shared_mass,
    similarity,
)
from conftest import make_partials, merged_community

A = Community({1: 2, 2: 2, 3: 1}, parts=2, weight=5)
B = Community({2: 1, 3: 1, 4: 1}, parts=1, weight=3)


def test_merge_componentwise_sum():
    c = merge(A, B)
    assert c.scores == {1: 2, 2: 3, 3: 2, 4: 1}
    assert c.parts == 3 and c.weight == 8
    assert c.origin is None


def test_merge_unit_partials():
    x = Community.from_members({1, 2, 3, 4})
    y = Community.from_members({3, 4, 5, 6})
    c = merge(x, y)
    assert c.scores == {1: 1, 2: 1, 3: 2, 4: 2, 5: 1, 6: 1}
    assert c.parts == 2 and c.weight == 8
    assert cohesion(c) == pytest.approx(0.5)


def test_overlap_hand_values():
    assert overlap(A, B) == pytest.approx(0.6)
    assert overlap(B, A) == pytest.approx(0.5)


def test_overlap_reduces_to_member_fraction_on_partials():
    x = Community.from_members({1, 2, 3, 4})
    y = Community.from_members({3, 4, 5, 6})
    assert overlap(x, y) == pytest.approx(len({3, 4}) / 4)


def test_overlap_disjoint_is_zero():
    assert overlap(Community.from_members({1, 2, 3}), Community.from_members({7, 8, 9})) == 0.0


def test_similarity_weighted_average_form():
    f = similarity(A, B)
    assert f == pytest.approx(6 / 11)
    other = (A.weight * B.parts * overlap(A, B) + B.weight * A.parts * overlap(B, A)) / (
        A.weight * B.parts + B.weight * A.parts)
    assert f == pytest.approx(other, rel=1e-12)


def test_similarity_suppression():
    # shared mass 3 per larger part count 2 gives 1.5 < 4: suppressed
    assert similarity(A, B, min_pair_mass=4.0) == 0.0
    assert similarity(A, B, min_pair_mass=1.0) > 0.0


def test_similarity_symmetric_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, _ = merged_community(rng)
        b, _ = merged_community(rng)
        assert similarity(a, b) == similarity(b, a)
        assert similarity(a, b, 4.0) == similarity(b, a, 4.0)


def test_cohesion_of_partial_is_one():
    assert cohesion(Community.from_members({1, 2, 3})) == 1.0


def test_merge_commutative_associative():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, _ = merged_community(rng)
        b, _ = merged_community(rng)
        c, _ = merged_community(rng)
        ab = merge(a, b)
        assert ab.canonical() == merge(b, a).canonical()
        assert ab.overlap_mass == merge(b, a).overlap_mass
        left = merge(ab, c)
        right = merge(a, merge(b, c))
        assert left.canonical() == right.canonical()
        assert left.overlap_mass == right.overlap_mass


def test_score_never_exceeds_parts():
    rng = np.random.default_rng(4)
    for _ in range(200):
        c, _ = merged_community(rng)
        assert all(1 <= s <= c.parts for s in c.scores.values())
        assert c.weight == sum(c.scores.values())


def _from_scratch_cohesion(parts):
    """Pairwise-overlap average over the constituent partials."""
    total = 0.0
    w = sum(p.weight for p in parts)
    for i, x in enumerate(parts):
        for j, y in enumerate(parts):
            if i != j:
                total += x.weight * overlap(x, y)
    return total / (w * (len(parts) - 1))


def test_incremental_cohesion_matches_from_scratch():
    rng = np.random.default_rng(5)
    for _ in range(200):
        c, parts = merged_community(rng, n_partials=int(rng.integers(2, 8)))
        assert cohesion(c) == pytest.approx(_from_scratch_cohesion(parts), rel=1e-10)


def test_overlap_merge_identities():
    rng = np.random.default_rng(6)
    for _ in range(300):
        a, _ = merged_community(rng)
        b, _ = merged_community(rng)
        c, _ = merged_community(rng)
        bc = merge(b, c)
        lhs = overlap(a, bc)
        rhs = (b.parts * overlap(a, b) + c.parts * overlap(a, c)) / (b.parts + c.parts)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-15)
        lhs2 = overlap(bc, a)
        rhs2 = (b.weight * overlap(b, a) + c.weight * overlap(c, a)) / (b.weight + c.weight)
        assert lhs2 == pytest.approx(rhs2, rel=1e-10, abs=1e-15)
        # merged similarity never beats the better constituent pairing
        assert similarity(a, bc) <= max(similarity(a, b), similarity(a, c)) + 1e-12


def test_overlap_decomposes_over_constituent_partials():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, pa = merged_community(rng, n_partials=int(rng.integers(1, 6)))
        b, pb = merged_community(rng, n_partials=int(rng.integers(1, 6)))
        direct = overlap(a, b)
        total = sum(x.weight * overlap(x, y) for x in pa for y in pb)
        assert direct == pytest.approx(total / (a.weight * b.parts), rel=1e-10, abs=1e-15)


def test_merge_all_and_errors():
    rng = np.random.default_rng(8)
    parts = make_partials(rng, 5)
    c = merge_all(parts)
    assert c.parts == 5
    with pytest.raises(ValueError):
        merge_all([])


@given(st.sets(st.integers(0, 100), min_size=1, max_size=20))
@settings(max_examples=50)
def test_from_members_invariants(members):
    c = Community.from_members(members, origin=min(members))
    assert c.parts == 1 and c.weight == len(members)
    assert set(c.scores) == set(members)
    assert all(s == 1 for s in c.scores.values())
    assert c.overlap_mass == 0 and cohesion(c) == 1.0
