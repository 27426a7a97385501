import itertools

import numpy as np
import pytest

from sparsela.matching import Bipartite, HallViolator, Matching, augment, maximum_matching_size, perfect_match


def brute_max(B):
    """Largest k such that some k rows can be matched to distinct columns."""
    m, n = B.shape
    best = 0
    for cols in itertools.permutations(range(n), min(m, n)):
        best = max(best, sum(bool(B[i, c]) for i, c in zip(range(m), cols)))
    return best


def test_direct_match_path_length_one():
    B = Bipartite.from_pattern(np.array([[1, 0], [0, 1]]))
    res = augment(B, Matching(2, 2), 1)
    assert res.path_labels() == "x1-y1"


def test_isolated_x2_augmenting_path():
    # the state in which x2 has lost every suitor
    B = Bipartite.from_pattern(np.array([[0, 1, 0], [1, 1, 0], [1, 0, 1]]))
    M = Matching(3, 3)
    M.add(1, 2)
    M.add(3, 1)
    res = augment(B, M, 2)
    assert res.path_labels() == "x2-y1-x3-y3"
    assert sorted(res.matching.pairs()) == [(1, 2), (2, 1), (3, 3)]
    assert res.matching.is_valid(B)


def test_star_violator():
    # y1 adjacent to x1, x2, x3; x2 and x3 are held by y2 and y3 only through y1
    B = Bipartite.from_pattern(np.array([[1, 0, 0], [1, 0, 0], [1, 0, 0]]))
    M = Matching(3, 3)
    M.add(1, 1)
    res = augment(B, M, 2)
    assert isinstance(res, HallViolator)
    assert res.verify(B)
    assert len(res.T) < len(res.S)


def test_augment_requires_single():
    B = Bipartite.from_pattern(np.eye(2))
    M = Matching(2, 2)
    M.add(1, 1)
    with pytest.raises(ValueError):
        augment(B, M, 1)


@pytest.mark.parametrize("policy", ["hms", "hmp", "hungarian_only"])
def test_identity_pattern(policy):
    res = perfect_match(Bipartite.from_pattern(np.eye(5)), policy)
    assert res.perfect
    assert sorted(res.matching.pairs()) == [(j, j) for j in range(1, 6)]


def test_block_example_has_proper_diagonal():
    res = perfect_match(Bipartite.from_pattern(np.array([[0, 1, 0], [0, 1, 1], [1, 1, 1]])))
    assert res.perfect and res.matching.size == 3


@pytest.mark.parametrize("policy", ["hms", "hmp", "hungarian_only"])
def test_all_4x4_perfect_patterns(policy):
    perms = [np.eye(4, dtype=bool)[list(p)] for p in itertools.permutations(range(4))]
    count = 0
    for bits in range(0, 1 << 16, 7):
        B = np.array([(bits >> k) & 1 for k in range(16)], bool).reshape(4, 4)
        if not any((B & P).sum() == 4 for P in perms):
            continue
        res = perfect_match(Bipartite.from_pattern(B), policy)
        assert res.perfect and res.matching.is_valid(Bipartite.from_pattern(B))
        count += 1
    assert count > 1000


def test_random_sizes_and_violators(rng):
    for _ in range(300):
        n = int(rng.integers(1, 7))
        B = rng.random((n, n)) < 0.35
        G = Bipartite.from_pattern(B)
        res = perfect_match(G)
        assert res.matching.is_valid(G)
        assert res.matching.size == brute_max(B) == maximum_matching_size(G)
        if not res.perfect:
            assert res.violator.verify(G)
