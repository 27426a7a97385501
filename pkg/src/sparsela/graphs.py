"""Directed graphs: depth-first forests, strongly connected components,
transitive closure and coherent reorderings.

Vertices are 1..n.  Searches are canonical: roots and children are
taken in a given vertex order (natural order by default), smallest first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DiGraph:
    def __init__(self, n: int, succ: Sequence[Sequence[int]] | None = None):
        self.n = n
        self.succ: list[list[int]] = [[] for _ in range(n + 1)]
        if succ is not None:
            if len(succ) != n:
                raise ValueError("one successor list per vertex is required")
            for i, s in enumerate(succ, start=1):
                for j in s:
                    if not 1 <= j <= n:
                        raise ValueError(f"successor {j} of {i} outside 1..{n}")
                self.succ[i] = sorted(set(int(j) for j in s))

    @classmethod
    def from_pattern(cls, B, loops=False):
        """Graph with j in Gamma(i) iff B[i, j] is nonzero."""
        B = np.asarray(B) != 0
        n = B.shape[0]
        succ = []
        for i in range(n):
            s = [j + 1 for j in np.nonzero(B[i])[0] if loops or j != i]
            succ.append(s)
        return cls(n, succ)

    @classmethod
    def from_edges(cls, n, edges):
        succ = [[] for _ in range(n)]
        for a, b in edges:
            succ[a - 1].append(b)
        return cls(n, succ)

    def inverse(self) -> "DiGraph":
        pred = [[] for _ in range(self.n)]
        for i in range(1, self.n + 1):
            for j in self.succ[i]:
                pred[j - 1].append(i)
        return DiGraph(self.n, pred)

    def adjacency(self) -> np.ndarray:
        B = np.zeros((self.n, self.n), dtype=bool)
        for i in range(1, self.n + 1):
            for j in self.succ[i]:
                B[i - 1, j - 1] = True
        return B

    def edges(self):
        return [(i, j) for i in range(1, self.n + 1) for j in self.succ[i]]

    def relabel(self, perm: Sequence[int]) -> "DiGraph":
        """Graph with vertex v renamed perm[v-1]."""
        succ = [[] for _ in range(self.n)]
        for i, j in self.edges():
            succ[perm[i - 1] - 1].append(perm[j - 1])
        return DiGraph(self.n, succ)


@dataclass
class DfsForest:
    parent: list  # parent[v] (0 for roots); index 0 unused
    roots: list
    visit: list  # vertices in visitation order
    ret: list  # vertices in return order
    trees: list = field(default_factory=list)  # vertex sets of each tree, visit order

    def visit_rank(self):
        r = [0] * (len(self.parent))
        for k, v in enumerate(self.visit, start=1):
            r[v] = k
        return r

    def return_rank(self):
        r = [0] * (len(self.parent))
        for k, v in enumerate(self.ret, start=1):
            r[v] = k
        return r


def dfs_forest(G: DiGraph, vertex_order: Sequence[int] | None = None) -> DfsForest:
    """Canonical depth-first forest with an explicit stack."""
    n = G.n
    order = list(vertex_order) if vertex_order is not None else list(range(1, n + 1))
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("vertex_order must be a permutation of 1..n")
    rank = [0] * (n + 1)
    for k, v in enumerate(order):
        rank[v] = k
    children = [sorted(G.succ[v], key=lambda w: rank[w]) for v in range(n + 1)]

    seen = [False] * (n + 1)
    parent = [0] * (n + 1)
    visit, ret, roots, trees = [], [], [], []
    for r in order:
        if seen[r]:
            continue
        roots.append(r)
        tree = [r]
        seen[r] = True
        visit.append(r)
        stack = [(r, 0)]
        while stack:
            v, k = stack[-1]
            ch = children[v]
            while k < len(ch) and seen[ch[k]]:
                k += 1
            if k == len(ch):
                stack.pop()
                ret.append(v)
                continue
            w = ch[k]
            stack[-1] = (v, k + 1)
            seen[w] = True
            parent[w] = v
            visit.append(w)
            tree.append(w)
            stack.append((w, 0))
        trees.append(tree)
    return DfsForest(parent, roots, visit, ret, trees)


@dataclass
class SccPartition:
    comp: list  # comp[v] = component number (1-based, topological), index 0 unused
    components: list  # lists of vertices, sources of the reduced graph first
    order: list  # coherent reordering q (visit order of the second search)
    first: DfsForest = None
    second: DfsForest = None

    @property
    def count(self):
        return len(self.components)

    def as_sets(self):
        return [set(c) for c in self.components]


def tarjan_scc(G: DiGraph) -> SccPartition:
    """Two-pass search: canonical DFS on G records the return order; a DFS
    on the inverse graph taking vertices in reverse return order yields one
    tree per strongly connected component, in topological order."""
    first = dfs_forest(G)
    reverse_return = list(reversed(first.ret))
    second = dfs_forest(G.inverse(), reverse_return)
    comp = [0] * (G.n + 1)
    for k, tree in enumerate(second.trees, start=1):
        for v in tree:
            comp[v] = k
    return SccPartition(comp, [list(t) for t in second.trees], list(second.visit), first, second)


def reduced_graph(G: DiGraph, part: SccPartition) -> DiGraph:
    succ = [set() for _ in range(part.count)]
    for i, j in G.edges():
        a, b = part.comp[i], part.comp[j]
        if a != b:
            succ[a - 1].add(b)
    return DiGraph(part.count, [sorted(s) for s in succ])


def has_cycle(G: DiGraph, ignore_loops=True) -> bool:
    color = [0] * (G.n + 1)
    for r in range(1, G.n + 1):
        if color[r]:
            continue
        stack = [(r, iter(G.succ[r]))]
        color[r] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if w == v and ignore_loops:
                    continue
                if color[w] == 1:
                    return True
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, iter(G.succ[w])))
                    break
            else:
                color[v] = 2
                stack.pop()
    return False


def transitive_closure(G: DiGraph) -> np.ndarray:
    """Reflexive-transitive closure: C[i, j] true iff j is reachable from i
    (every vertex reaches itself through the empty path)."""
    n = G.n
    C = np.zeros((n, n), dtype=bool)
    for s in range(1, n + 1):
        stack = [s]
        C[s - 1, s - 1] = True
        while stack:
            v = stack.pop()
            for w in G.succ[v]:
                if not C[s - 1, w - 1]:
                    C[s - 1, w - 1] = True
                    stack.append(w)
    return C


@dataclass
class Coherence:
    criterion1: bool
    criterion2: bool

    @property
    def ok(self):
        return self.criterion1 and self.criterion2

    @property
    def violated(self):
        return [k for k, good in ((1, self.criterion1), (2, self.criterion2)) if not good]

    def __bool__(self):
        return self.ok


def is_coherent(G: DiGraph, q: Sequence[int]) -> Coherence:
    """Check both coherence criteria of an order q against the natural
    (reachability) order of G.

    1. if a reaches b but b does not reach a, a comes before b;
    2. whenever a, c are equivalent, everything between them is too.
    """
    n = G.n
    if sorted(q) != list(range(1, n + 1)):
        raise ValueError("q must be a permutation of 1..n")
    C = transitive_closure(G)
    pos = {v: k for k, v in enumerate(q)}
    crit1 = True
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if C[a - 1, b - 1] and not C[b - 1, a - 1] and pos[a] > pos[b]:
                crit1 = False
    eq = C & C.T
    crit2 = True
    for x in range(n):
        for z in range(x + 2, n):
            a, c = q[x], q[z]
            if eq[a - 1, c - 1]:
                for y in range(x + 1, z):
                    if not eq[a - 1, q[y] - 1]:
                        crit2 = False
    return Coherence(crit1, crit2)
