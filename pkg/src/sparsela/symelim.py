"""Symmetric elimination: elimination graphs, elimination trees, symbolic
Cholesky, perfect orders, the ORGM ordering and level-structure dissection.

Vertices are 1..n.  An elimination order q lists vertices in the order
they are eliminated; position k of q becomes row/column k of QAQ'.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


class UGraph:
    """Undirected graph with adjacency sets (no loops)."""

    def __init__(self, n: int, adj=None):
        self.n = n
        self.adj = [set() for _ in range(n + 1)]
        if adj is not None:
            for i, nb in enumerate(adj, start=1):
                for j in nb:
                    if j != i:
                        self.adj[i].add(int(j))
                        self.adj[int(j)].add(i)

    @classmethod
    def from_pattern(cls, A):
        B = np.asarray(A) != 0
        if B.shape[0] != B.shape[1] or not (B == B.T).all():
            raise ValueError("symmetric pattern required")
        return cls(B.shape[0], [[int(j) + 1 for j in np.nonzero(r)[0]] for r in B])

    @classmethod
    def from_edges(cls, n, edges):
        G = cls(n)
        for a, b in edges:
            if a != b:
                G.adj[a].add(b)
                G.adj[b].add(a)
        return G

    def edges(self):
        return sorted((i, j) for i in range(1, self.n + 1) for j in self.adj[i] if i < j)

    def degree(self, v):
        return len(self.adj[v])

    def pattern(self):
        B = np.eye(self.n, dtype=bool)
        for i, j in self.edges():
            B[i - 1, j - 1] = B[j - 1, i - 1] = True
        return B

    def subgraph(self, verts):
        vs = set(verts)
        return {v: self.adj[v] & vs for v in vs}

    def copy(self):
        G = UGraph(self.n)
        G.adj = [set(a) for a in self.adj]
        return G


def _graph(G):
    return G if isinstance(G, UGraph) else UGraph.from_pattern(G)


def _check_order(q, n):
    if sorted(q) != list(range(1, n + 1)):
        raise ValueError("q must be a permutation of 1..n")


@dataclass
class EliminationStep:
    vertex: int
    neighbors: set
    fill: list  # new edges (a, b), a < b


def elimination_sequence(G, q):
    """Eliminate vertices in order q; each step removes the vertex and makes
    its remaining neighbors a clique.  Returns the steps with fill edges."""
    G = _graph(G).copy()
    _check_order(q, G.n)
    steps = []
    for v in q:
        nb = set(G.adj[v])
        fill = []
        srt = sorted(nb)
        for a_i, a in enumerate(srt):
            for b in srt[a_i + 1:]:
                if b not in G.adj[a]:
                    G.adj[a].add(b)
                    G.adj[b].add(a)
                    fill.append((a, b))
        for w in nb:
            G.adj[w].discard(v)
        G.adj[v] = set()
        steps.append(EliminationStep(v, nb, fill))
    return steps


def fill_edges(G, q):
    return [e for s in elimination_sequence(G, q) for e in s.fill]


def permuted_pattern(A, q):
    B = np.asarray(A) != 0
    idx = [i - 1 for i in q]
    return B[np.ix_(idx, idx)]


@dataclass
class SymbolicFactor:
    cols: list  # cols[j-1] = sorted enn(L^j), positions in the permuted order
    parent: list  # parent[j-1] = h(j)

    @property
    def enn(self):
        return sum(len(c) for c in self.cols)

    def fill(self, A, q):
        P = permuted_pattern(A, q)
        return self.enn - int(np.tril(P).sum())

    def fill_positions(self, A, q):
        P = permuted_pattern(A, q)
        return sorted((i, j) for j, c in enumerate(self.cols, start=1) for i in c if not P[i - 1, j - 1])


@dataclass
class EliminationTree:
    parent: list  # parent[j-1] = h(j); roots point to themselves
    children: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.parent)
        self.children = [[] for _ in range(n)]
        for j, h in enumerate(self.parent, start=1):
            if h != j:
                self.children[h - 1].append(j)

    @property
    def roots(self):
        return [j for j, h in enumerate(self.parent, start=1) if h == j]

    def ancestors(self, j):
        out = []
        while self.parent[j - 1] != j:
            j = self.parent[j - 1]
            out.append(j)
        return out


def symbolic_cholesky(A, q=None) -> SymbolicFactor:
    """Column structure of L by the children-union recursion:
    enn(L^j) = ∪_{k ∈ g(j)} enn(L^k) ∪ enn(A^j) − {1..j} + {j}."""
    B = np.asarray(A) != 0
    if B.shape[0] != B.shape[1] or not (B == B.T).all():
        raise ValueError("symmetric pattern required")
    n = B.shape[0]
    q = list(q) if q is not None else list(range(1, n + 1))
    _check_order(q, n)
    P = permuted_pattern(B, q)
    cols, parent = [], []
    children = [[] for _ in range(n + 1)]
    for j in range(1, n + 1):
        s = {int(i) + j for i in np.nonzero(P[j - 1:, j - 1])[0]}
        for k in children[j]:
            s.update(i for i in cols[k - 1] if i > j)
        s.add(j)
        below = [i for i in s if i > j]
        h = min(below) if below else j
        if h != j:
            children[h].append(j)
        cols.append(sorted(s))
        parent.append(h)
    return SymbolicFactor(cols, parent)


def etree(A, q=None) -> EliminationTree:
    return EliminationTree(symbolic_cholesky(A, q).parent)


def numeric_structure(A, q=None, rng=None):
    """Oracle: pattern of the Cholesky factor from floating-point
    factorization with generic (random, diagonally dominant) values."""
    B = np.asarray(A) != 0
    n = B.shape[0]
    q = list(q) if q is not None else list(range(1, n + 1))
    P = permuted_pattern(B, q)
    rng = rng or np.random.default_rng(12345)
    V = np.triu(rng.uniform(0.5, 1.0, (n, n)) * P, 1)
    S = V + V.T
    S += np.diag(np.abs(S).sum(axis=1) + 1.0)
    L = np.linalg.cholesky(S)
    return np.abs(L) > 1e-14


def orgm_order(G, start=None) -> list:
    """Maximum-cardinality reverse numbering: vertices are numbered n..1,
    each time choosing an unnumbered vertex adjacent to the most numbered
    ones (smallest label on ties).  Returns the elimination order."""
    G = _graph(G)
    n = G.n
    count = [0] * (n + 1)
    numbered = [False] * (n + 1)
    rev = []
    for step in range(n):
        if step == 0 and start is not None:
            v = start
        else:
            v = max((u for u in range(1, n + 1) if not numbered[u]), key=lambda u: (count[u], -u))
        numbered[v] = True
        rev.append(v)
        for w in G.adj[v]:
            count[w] += 1
    return rev[::-1]


def is_perfect_order(G, q) -> bool:
    return not fill_edges(G, q)


def is_chordal(G) -> bool:
    return is_perfect_order(G, orgm_order(G))


@dataclass
class LevelStructure:
    root: int
    levels: list

    @property
    def depth(self):
        return len(self.levels) - 1

    @property
    def width(self):
        return max(len(L) for L in self.levels)


def bfs_levels(G, root, within=None) -> LevelStructure:
    G = _graph(G)
    if not 1 <= root <= G.n:
        raise ValueError(f"root {root} out of range")
    allowed = set(within) if within is not None else None
    seen = {root}
    levels = [[root]]
    while True:
        nxt = set()
        for v in levels[-1]:
            for w in G.adj[v]:
                if w not in seen and (allowed is None or w in allowed):
                    nxt.add(w)
        if not nxt:
            break
        seen |= nxt
        levels.append(sorted(nxt))
    return LevelStructure(root, levels)


def pseudo_peripheral(G, start=None, within=None) -> int:
    """Iterate root ← minimum-degree vertex of the deepest level while the
    depth keeps increasing."""
    G = _graph(G)
    verts = sorted(within) if within is not None else list(range(1, G.n + 1))
    allowed = set(verts)

    def deg(v):
        return len(G.adj[v] & allowed)

    root = start if start is not None else min(verts, key=lambda v: (deg(v), v))
    ls = bfs_levels(G, root, allowed)
    while True:
        cand = min(ls.levels[-1], key=lambda v: (deg(v), v))
        nls = bfs_levels(G, cand, allowed)
        if nls.depth <= ls.depth:
            return root
        root, ls = cand, nls


def components(G, verts):
    G = _graph(G)
    left = set(verts)
    out = []
    while left:
        s = min(left)
        comp = {s}
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for w in G.adj[v]:
                if w in left and w not in comp:
                    comp.add(w)
                    dq.append(w)
        left -= comp
        out.append(sorted(comp))
    return out


@dataclass
class SeparatorNode:
    separator: list
    children: list = field(default_factory=list)
    leaf: list = field(default_factory=list)


def _orgm_sub(G, verts):
    """Reverse maximum-cardinality numbering of a leaf block in which the
    neighbours outside the block (separators, eliminated later) count as
    already numbered, so boundary vertices go last."""
    block = set(verts)
    count = {v: sum(1 for w in G.adj[v] if w not in block) for v in block}
    rev = []
    while count:
        v = max(count, key=lambda u: (count[u], -u))
        del count[v]
        rev.append(v)
        for w in G.adj[v]:
            if w in count:
                count[w] += 1
    return rev[::-1]


def dissection_order(G, min_block=8):
    """Nested dissection with BFS-level separators.  Returns (q, tree)."""
    G = _graph(G)

    def rec(verts):
        if len(verts) < min_block:
            return _orgm_sub(G, verts), SeparatorNode([], leaf=sorted(verts))
        comps = components(G, verts)
        if len(comps) > 1:
            order, node = [], SeparatorNode([])
            for c in comps:
                o, ch = rec(c)
                order += o
                node.children.append(ch)
            return order, node
        root = pseudo_peripheral(G, within=verts)
        ls = bfs_levels(G, root, verts)
        n = len(verts)
        acc = 0
        sep = ls.levels[-1]
        for L in ls.levels:
            acc += len(L)
            if acc >= n / 2:
                sep = L
                break
        rest = set(verts) - set(sep)
        order, node = [], SeparatorNode(sorted(sep))
        for c in components(G, rest):
            o, ch = rec(c)
            order += o
            node.children.append(ch)
        return order + sorted(sep), node

    q, tree = rec(list(range(1, G.n + 1)))
    return q, tree


def grid_graph(r, c):
    G = UGraph(r * c)
    for i in range(r):
        for j in range(c):
            v = i * c + j + 1
            if j + 1 < c:
                G.adj[v].add(v + 1)
                G.adj[v + 1].add(v)
            if i + 1 < r:
                G.adj[v].add(v + c)
                G.adj[v + c].add(v)
    return G


def random_chordal(n, rng, p=0.5):
    """Random chordal graph: vertex k joins a random clique formed by a
    vertex among 1..k-1 and part of its later-numbered neighborhood, so
    the reverse insertion order is a perfect elimination order."""
    G = UGraph(n)
    for k in range(2, n + 1):
        a = int(rng.integers(1, k))
        nb = {a} | {w for w in G.adj[a] if rng.random() < p}
        # keep a clique: only neighbors of a that are pairwise adjacent
        clique = [a]
        for w in sorted(nb - {a}):
            if all(w in G.adj[x] for x in clique):
                clique.append(w)
        for w in clique:
            G.adj[k].add(w)
            G.adj[w].add(k)
    return G
