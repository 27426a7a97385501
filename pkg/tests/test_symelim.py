import itertools

import numpy as np
import pytest

from sparsela.matcore import tridiagonal
from sparsela.symelim import (
    EliminationTree, UGraph, bfs_levels, components, dissection_order, elimination_sequence, etree,
    fill_edges, grid_graph, is_chordal, is_perfect_order, numeric_structure, orgm_order,
    pseudo_peripheral, random_chordal, symbolic_cholesky,
)

EX1 = UGraph.from_edges(6, [(1, 2), (1, 3), (2, 3), (3, 4), (5, 6), (1, 6)])
ORDERS = {
    (1, 2, 3, 4, 5, 6): [(6, 2), (6, 3), (6, 4)],
    (1, 3, 6, 2, 4, 5): [(3, 2), (4, 3), (5, 3), (5, 4), (6, 4), (6, 5)],
    (5, 4, 2, 6, 3, 1): [],
}


def random_symmetric(rng, n, p=0.3):
    M = np.triu(rng.random((n, n)) < p, 1)
    return M | M.T | np.eye(n, dtype=bool)


def path(n):
    return UGraph.from_edges(n, [(k, k + 1) for k in range(1, n)])


def test_path_leaf_first_no_fill():
    assert fill_edges(path(5), [1, 2, 3, 4, 5]) == []


def test_star_center_first():
    star = UGraph.from_edges(5, [(1, k) for k in range(2, 6)])
    assert len(fill_edges(star, [1, 2, 3, 4, 5])) == 6


@pytest.mark.parametrize("q", list(ORDERS))
def test_example_fill_positions(q):
    A = EX1.pattern()
    sf = symbolic_cholesky(A, list(q))
    assert sorted(sf.fill_positions(A, list(q))) == ORDERS[q]
    assert len(fill_edges(EX1, list(q))) == len(ORDERS[q])


def test_elimination_sequence_shrinks():
    steps = elimination_sequence(EX1, [1, 2, 3, 4, 5, 6])
    assert len(steps) == 6


def test_tridiagonal_tree_is_a_chain():
    assert etree(tridiagonal(6)).parent == [2, 3, 4, 5, 6, 6]


def test_diagonal_forest():
    assert etree(np.eye(4)).parent == [1, 2, 3, 4]


def test_chordal_no_fill():
    A = EX1.pattern()
    q = [5, 4, 2, 6, 3, 1]
    sf = symbolic_cholesky(A, q)
    assert sf.enn == np.tril(A).sum()


def test_symbolic_matches_numeric_and_ancestors(rng):
    for _ in range(100):
        n = int(rng.integers(2, 9))
        M = random_symmetric(rng, n)
        q = list(rng.permutation(n) + 1)
        sf = symbolic_cholesky(M, q)
        L = numeric_structure(M, q)
        assert [sorted(int(i) + 1 for i in np.nonzero(L[:, j])[0]) for j in range(n)] == sf.cols
        tree = EliminationTree(sf.parent)
        for j, col in enumerate(sf.cols, start=1):
            assert all(i in tree.ancestors(j) for i in col if i > j)


def test_orgm_on_tree_and_cycle():
    T = UGraph.from_edges(6, [(1, 2), (1, 3), (3, 4), (3, 5), (5, 6)])
    assert fill_edges(T, orgm_order(T)) == []
    C4 = UGraph.from_edges(4, [(1, 2), (2, 3), (3, 4), (4, 1)])
    assert len(fill_edges(C4, orgm_order(C4))) >= 1
    assert all(fill_edges(C4, list(q)) for q in itertools.permutations(range(1, 5)))


def test_chordality():
    assert is_chordal(EX1) and is_perfect_order(EX1, [5, 4, 2, 6, 3, 1])
    K = UGraph.from_edges(5, list(itertools.combinations(range(1, 6), 2)))
    assert is_chordal(K) and is_perfect_order(K, [3, 1, 5, 2, 4])
    assert not is_chordal(UGraph.from_edges(4, [(1, 2), (2, 3), (3, 4), (4, 1)]))


def test_random_chordal_graphs(rng):
    for _ in range(100):
        G = random_chordal(int(rng.integers(3, 15)), rng)
        assert is_perfect_order(G, orgm_order(G))


def test_level_structures():
    L = bfs_levels(path(5), 1)
    assert (L.depth, L.width) == (4, 1)
    star = UGraph.from_edges(6, [(1, k) for k in range(2, 7)])
    L = bfs_levels(star, 1)
    assert (L.depth, L.width) == (1, 5)


def test_grid_middle_level_separates():
    G = grid_graph(4, 4)
    L = bfs_levels(G, pseudo_peripheral(G))
    mid = L.depth // 2
    sep = set(L.levels[mid])
    rest = set(range(1, 17)) - sep
    shallow = {v for lv in L.levels[:mid] for v in lv}
    parts = components(G, rest)
    assert all(not (set(c) & shallow) or set(c) <= shallow for c in parts)


def test_dissection_picks_articulation_vertex():
    # two 5-cliques joined through vertex 6
    edges = [e for grp in (range(1, 6), range(7, 12)) for e in itertools.combinations(grp, 2)]
    K = UGraph.from_edges(11, edges + [(5, 6), (6, 7)])
    q, tree = dissection_order(K)
    assert tree.separator == [6]
    assert q[-1] == 6


def test_dissection_on_path_and_grid():
    # one dissection level: the separator is eliminated last, each side
    # from its far end towards the separator
    q, _ = dissection_order(path(9))
    assert fill_edges(path(9), q) == []
    G = grid_graph(7, 7)
    q, _ = dissection_order(G)
    assert symbolic_cholesky(G.pattern(), q).enn <= symbolic_cholesky(G.pattern()).enn
