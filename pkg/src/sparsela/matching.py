"""Bipartite matching: augmenting paths, the Hungarian M-alternating
search with Hall-violator extraction, and the greedy min-weight
heuristics HMS (simple minimum) and HMP (minimum pair).

X vertices are rows, Y vertices columns, both numbered from 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class Bipartite:
    def __init__(self, nx: int, ny: int, adj):
        self.nx = nx
        self.ny = ny
        self.adj = [[]] + [sorted(set(a)) for a in adj]  # X -> Y, index 0 unused
        if len(self.adj) != nx + 1:
            raise ValueError("one adjacency list per X vertex is required")
        self.radj = [[] for _ in range(ny + 1)]
        for x in range(1, nx + 1):
            for y in self.adj[x]:
                if not 1 <= y <= ny:
                    raise ValueError(f"edge ({x},{y}) outside the Y side")
                self.radj[y].append(x)

    @classmethod
    def from_pattern(cls, B):
        B = np.asarray(B) != 0
        return cls(B.shape[0], B.shape[1], [[int(j) + 1 for j in np.nonzero(r)[0]] for r in B])

    def transpose(self) -> "Bipartite":
        return Bipartite(self.ny, self.nx, [self.radj[y] for y in range(1, self.ny + 1)])

    def has_edge(self, x, y):
        return y in self.adj[x]


class Matching:
    def __init__(self, nx: int, ny: int):
        self.mate_x = [0] * (nx + 1)
        self.mate_y = [0] * (ny + 1)

    @property
    def size(self):
        return sum(1 for v in self.mate_x[1:] if v)

    def pairs(self):
        return [(x, y) for x, y in enumerate(self.mate_x) if x and y]

    def add(self, x, y):
        if self.mate_x[x] or self.mate_y[y]:
            raise ValueError(f"x{x} or y{y} already matched")
        self.mate_x[x] = y
        self.mate_y[y] = x

    def copy(self):
        M = Matching(len(self.mate_x) - 1, len(self.mate_y) - 1)
        M.mate_x = list(self.mate_x)
        M.mate_y = list(self.mate_y)
        return M

    def xor(self, path_edges) -> "Matching":
        """Symmetric difference M ⊕ C for a set of (x, y) edges."""
        edges = set(self.pairs()) ^ set(path_edges)
        M = Matching(len(self.mate_x) - 1, len(self.mate_y) - 1)
        for x, y in sorted(edges):
            M.add(x, y)
        return M

    def is_valid(self, B: Bipartite) -> bool:
        for x, y in self.pairs():
            if self.mate_y[y] != x or not B.has_edge(x, y):
                return False
        return all(self.mate_x[x] == y for y, x in enumerate(self.mate_y) if y and x)

    def transpose(self) -> "Matching":
        M = Matching(len(self.mate_y) - 1, len(self.mate_x) - 1)
        M.mate_x, M.mate_y = list(self.mate_y), list(self.mate_x)
        return M


@dataclass
class HallViolator:
    """S ⊆ X with Γ(S) = T and #T = #S - 1."""

    S: set
    T: set
    side: str = "x"

    def verify(self, B: Bipartite) -> bool:
        if self.side == "y":
            B = B.transpose()
        gamma = set()
        for x in self.S:
            gamma.update(B.adj[x])
        return gamma == self.T and len(gamma) < len(self.S)


@dataclass
class Augmented:
    matching: Matching
    path: list  # alternating vertex list as ('x', i) / ('y', j) tuples

    def path_labels(self):
        return "-".join(f"{s}{k}" for s, k in self.path)


def path_edges(path):
    """Edges of an alternating path given as [('x',a), ('y',b), ...]."""
    out = []
    for u, v in zip(path, path[1:]):
        x, y = (u[1], v[1]) if u[0] == "x" else (v[1], u[1])
        out.append((x, y))
    return out


def augment(B: Bipartite, M: Matching, x: int):
    """Grow the canonical M-alternating depth-first tree rooted at the
    single vertex x.  Returns ``Augmented`` with M ⊕ C for the first
    augmenting path found, or a ``HallViolator`` S = V_H ∩ X."""
    if M.mate_x[x]:
        raise ValueError(f"x{x} is not single")
    in_tree_y = set()
    in_tree_x = {x}
    stack = [(x, 0)]
    via = {x: None}  # X vertex -> Y vertex through which it was reached
    while stack:
        u, k = stack[-1]
        nbrs = B.adj[u]
        while k < len(nbrs) and nbrs[k] in in_tree_y:
            k += 1
        if k == len(nbrs):
            stack.pop()
            continue
        y = nbrs[k]
        stack[-1] = (u, k + 1)
        in_tree_y.add(y)
        if not M.mate_y[y]:
            # the stack is the root-to-leaf chain of X vertices in the tree
            path = [("x", x)]
            for w, _ in stack[1:]:
                path += [("y", via[w]), ("x", w)]
            path.append(("y", y))
            return Augmented(M.xor(path_edges(path)), path)
        nx_ = M.mate_y[y]
        in_tree_x.add(nx_)
        via[nx_] = y
        stack.append((nx_, 0))
    gamma = set(in_tree_y)
    return HallViolator(set(in_tree_x), gamma)


@dataclass
class MatchResult:
    matching: Matching
    violator: HallViolator | None = None
    trace: list = field(default_factory=list)

    @property
    def perfect(self):
        return self.violator is None


def _weights(B, M):
    """Number of single suitors of every single vertex, per side."""
    wx = {x: sum(1 for y in B.adj[x] if not M.mate_y[y]) for x in range(1, B.nx + 1) if not M.mate_x[x]}
    wy = {y: sum(1 for x in B.radj[y] if not M.mate_x[x]) for y in range(1, B.ny + 1) if not M.mate_y[y]}
    return wx, wy


def perfect_match(B: Bipartite, policy: str = "hms", threshold: int = 2) -> MatchResult:
    """Maximum matching built greedily (HMS/HMP) with Hungarian augmentation
    for isolated single vertices.

    ``policy``: ``hms`` (switching to HMP when the minimum weight is at most
    ``threshold``), ``hmp`` (always min-min pairs) or ``hungarian_only``.
    """
    if policy not in ("hms", "hmp", "hungarian_only"):
        raise ValueError(f"unknown policy {policy!r}")
    M = Matching(B.nx, B.ny)
    trace = []
    if policy == "hungarian_only":
        violator = None
        for x in range(1, B.nx + 1):
            res = augment(B, M, x)
            if isinstance(res, HallViolator):
                violator = violator or res
                continue
            trace.append(("augment", x, res.path_labels()))
            M = res.matching
        return MatchResult(M, violator, trace)

    # a vertex without an augmenting path never gains one later, so it is
    # set aside and the search goes on towards a maximum matching
    BT = None
    violator = None
    dead_x, dead_y = set(), set()
    while True:
        wx, wy = _weights(B, M)
        wx = {x: w for x, w in wx.items() if x not in dead_x}
        wy = {y: w for y, w in wy.items() if y not in dead_y}
        if not wx and not wy:
            break
        # isolated single vertices first: they go to the Hungarian search
        zx = [x for x, w in wx.items() if w == 0]
        zy = [y for y, w in wy.items() if w == 0]
        if zx or zy:
            if zx:
                x = min(zx)
                res = augment(B, M, x)
                if isinstance(res, HallViolator):
                    violator = violator or res
                    dead_x.add(x)
                    continue
                trace.append(("augment", f"x{x}", res.path_labels()))
                M = res.matching
            else:
                y = min(zy)
                if BT is None:
                    BT = B.transpose()
                res = augment(BT, M.transpose(), y)
                if isinstance(res, HallViolator):
                    res.side = "y"
                    violator = violator or res
                    dead_y.add(y)
                    continue
                trace.append(("augment", f"y{y}", res.path_labels()))
                M = res.matching.transpose()
            continue
        cand = [(w, 0, x) for x, w in wx.items()] + [(w, 1, y) for y, w in wy.items()]
        wmin = min(c[0] for c in cand)
        use_pair = policy == "hmp" or wmin <= threshold
        best = None
        for w, side, v in sorted(cand):
            if w != wmin:
                continue
            suitors = [s for s in (B.adj[v] if side == 0 else B.radj[v]) if not (M.mate_y[s] if side == 0 else M.mate_x[s])]
            for s in suitors:
                ws = wy[s] if side == 0 else wx[s]
                key = (ws, s)
                if best is None or key < best[0]:
                    best = (key, side, v, s)
            if not use_pair:
                break  # HMS: first minimum-weight vertex only
        _, side, v, s = best
        x, y = (v, s) if side == 0 else (s, v)
        M.add(x, y)
        trace.append(("match", f"x{x}", f"y{y}", wmin))
    return MatchResult(M, violator, trace)


def maximum_matching_size(B: Bipartite) -> int:
    M = Matching(B.nx, B.ny)
    for x in range(1, B.nx + 1):
        res = augment(B, M, x)
        if isinstance(res, Augmented):
            M = res.matching
    return M.size
