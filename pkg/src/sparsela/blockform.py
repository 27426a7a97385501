"""Macro-structure of sparse matrices: proper permutations, the P4
block-triangular ordering, and block-angular partitions of the rows."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fillasym import P3Result, p3_order, symbolic_lu
from .graphs import DiGraph, tarjan_scc
from .matching import Bipartite, HallViolator, perfect_match


class StructurallySingularError(ValueError):
    def __init__(self, violator: HallViolator):
        super().__init__(f"no zero-free diagonal; Hall violator S={sorted(violator.S)}")
        self.violator = violator


def proper_permutation(pattern, policy="hms") -> list:
    """Row permutation p placing a zero-free diagonal: p[j-1] is the row
    matched to column j, so (PA)[j, j] = A[p(j), j] is nonzero."""
    B = np.asarray(pattern) != 0
    if B.shape[0] != B.shape[1]:
        raise ValueError("square pattern required")
    # match columns (X side) to rows (Y side)
    res = perfect_match(Bipartite.from_pattern(B.T), policy=policy)
    if not res.perfect:
        raise StructurallySingularError(res.violator)
    return list(res.matching.mate_x[1:])


@dataclass
class BlockTriangular:
    p: list  # row labels in final order
    q: list  # column labels in final order
    sizes: list  # n(1) .. n(h), in final order
    blocks: list  # column-label sets per block
    block_p3: list = field(default_factory=list)
    proper: list = field(default_factory=list)  # the proper permutation used

    @property
    def h(self):
        return len(self.sizes)

    def permuted(self, pattern):
        B = np.asarray(pattern) != 0
        return B[np.ix_([i - 1 for i in self.p], [j - 1 for j in self.q])]

    @property
    def spikes(self):
        return [s for r in self.block_p3 for s in r.spikes]

    def is_block_lower(self, pattern) -> bool:
        P = self.permuted(pattern)
        start = 0
        for s in self.sizes:
            if P[start:start + s, start + s:].any():
                return False
            start += s
        return True


def block_triangular(pattern, proper=None, lower=True):
    """Steps 1 and 2 of P4 (plus the reversal of step 3): returns the
    permuted-index vectors and the block sizes."""
    B = np.asarray(pattern) != 0
    n = B.shape[0]
    p = list(proper) if proper is not None else proper_permutation(B)
    PB = B[[i - 1 for i in p]]
    part = tarjan_scc(DiGraph.from_pattern(PB))
    comps = [list(c) for c in part.components]
    if lower:
        comps = comps[::-1]
    order = [v for c in comps for v in c]
    rows = [p[v - 1] for v in order]
    return rows, order, [len(c) for c in comps], [set(c) for c in comps], p


def p4(pattern, proper=None) -> BlockTriangular:
    """Partition and pivot pre-positioning: proper permutation, coherent
    order, reversal to block lower triangular form, then P3 per block."""
    B = np.asarray(pattern) != 0
    rows, cols, sizes, blocks, p = block_triangular(B, proper)
    final_r, final_c, results = [], [], []
    start = 0
    for s in sizes:
        br, bc = rows[start:start + s], cols[start:start + s]
        sub = B[np.ix_([i - 1 for i in br], [j - 1 for j in bc])]
        r = p3_order(sub)
        # translate block-local labels back to matrix labels
        rp = [br[i - 1] for i in r.p]
        cq = [bc[j - 1] for j in r.q]
        spikes = [bc[j - 1] for j in r.spikes]
        tops = {bc[j - 1]: start + t for j, t in r.spike_tops.items()}
        results.append(P3Result(rp, cq, spikes, tops, r.trace, [bc[j - 1] for j in r.recalled]))
        final_r += rp
        final_c += cq
        start += s
    return BlockTriangular(final_r, final_c, sizes, blocks, results, p)


def p4_fill(pattern, bt: BlockTriangular):
    _, f = symbolic_lu(bt.permuted(pattern))
    return [(bt.p[i - 1], bt.q[j - 1]) for i, j in f]


@dataclass
class PartitionCost:
    c: int  # residual (multicolored) columns
    balance: float
    alpha: float
    sizes: list

    @property
    def total(self):
        return self.c + self.alpha * self.balance


def column_colors(pattern, colors):
    B = np.asarray(pattern) != 0
    colors = np.asarray(colors)
    return [set(colors[np.nonzero(B[:, j])[0]].tolist()) for j in range(B.shape[1])]


def partition_cost(pattern, colors, alpha=1.0, h=None) -> PartitionCost:
    """f(p) = c(p) + α Σ_k (m/h − s(k))² for a row coloring p: M → {1..h}."""
    B = np.asarray(pattern) != 0
    m = B.shape[0]
    colors = list(colors)
    if len(colors) != m:
        raise ValueError("one color per row is required")
    h = h or max(colors)
    qs = column_colors(B, colors)
    c = sum(1 for q in qs if len(q) >= 2)
    sizes = [colors.count(k) for k in range(1, h + 1)]
    balance = sum((m / h - s) ** 2 for s in sizes)
    return PartitionCost(c, balance, alpha, sizes)


def greedy_balanced(m, h):
    """Baseline: consecutive rows in h nearly equal groups."""
    return [min(h, i * h // m + 1) for i in range(m)]


def improve_partition(pattern, colors, alpha=1.0, h=None, budget=1000):
    """First-improvement local search over single-row recolorings."""
    B = np.asarray(pattern) != 0
    cur = list(colors)
    h = h or max(cur)
    best = partition_cost(B, cur, alpha, h).total
    evals = 0
    improved = True
    while improved and evals < budget:
        improved = False
        for i in range(len(cur)):
            for k in range(1, h + 1):
                if k == cur[i]:
                    continue
                old = cur[i]
                cur[i] = k
                cost = partition_cost(B, cur, alpha, h).total
                evals += 1
                if cost < best - 1e-12:
                    best = cost
                    improved = True
                else:
                    cur[i] = old
                if evals >= budget:
                    return cur
    return cur


@dataclass
class AngularPartition:
    colors: list
    row_blocks: list  # row labels per color
    col_blocks: list  # column labels per color
    residual: list  # multicolored column labels
    cost: PartitionCost

    def order(self):
        rows = [i for b in self.row_blocks for i in b]
        cols = [j for b in self.col_blocks for j in b] + self.residual
        return rows, cols


def angular_partition(pattern, colors, alpha=1.0, h=None) -> AngularPartition:
    B = np.asarray(pattern) != 0
    h = h or max(colors)
    qs = column_colors(B, colors)
    row_blocks = [[i + 1 for i, c in enumerate(colors) if c == k] for k in range(1, h + 1)]
    col_blocks = [[j + 1 for j, q in enumerate(qs) if q == {k}] for k in range(1, h + 1)]
    # empty columns carry no color; keep them with the residual block
    residual = [j + 1 for j, q in enumerate(qs) if len(q) != 1]
    return AngularPartition(list(colors), row_blocks, col_blocks, residual,
                            partition_cost(B, colors, alpha, h))
