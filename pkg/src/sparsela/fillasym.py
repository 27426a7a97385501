"""Fill prediction and pivot selection for unsymmetric elimination.

Counts assume no numerical cancellation: once a position fills it stays
nonzero.  Indices returned to callers are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PivotError(ArithmeticError):
    pass


class StructurallySingular(ValueError):
    pass


def _bool(P):
    P = np.asarray(P)
    return P != 0


def tewarson_G(pattern) -> np.ndarray:
    """G = B (B̄)' B: G[i, j] is the fill caused by pivoting on (i, j)."""
    B = _bool(pattern).astype(np.int64)
    return B @ (1 - B).T @ B


def markowitz_F(pattern) -> np.ndarray:
    """Markowitz count (r_i - 1)(c_j - 1): off-pivot nonzeros in the pivot
    column times off-pivot nonzeros in the pivot row."""
    B = _bool(pattern).astype(np.int64)
    r = B.sum(axis=1)
    c = B.sum(axis=0)
    return np.outer(np.maximum(r - 1, 0), np.maximum(c - 1, 0))


def fill_metric(pattern, metric="tewarson"):
    if metric == "tewarson":
        return tewarson_G(pattern)
    if metric == "markowitz":
        return markowitz_F(pattern)
    raise ValueError(f"unknown metric {metric!r}")


def argmin_positions(pattern, metric="tewarson"):
    B = _bool(pattern)
    G = fill_metric(B, metric)
    vals = G[B]
    if vals.size == 0:
        return set()
    best = vals.min()
    return {(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(B & (G == best)))}


def choose_pivot(A, metric="tewarson", multmax=None, pivomin=None):
    """Pivot (i, j) of the active block A minimizing the metric among
    admissible nonzeros; ties go to the smallest (i, j).

    A nonzero is vetoed when its largest multiplier reaches ``multmax`` or
    when its magnitude is at most ``pivomin``.  Boolean input is treated as
    structure only and never vetoed.
    """
    A = np.asarray(A)
    B = A != 0
    G = fill_metric(B, metric)
    numeric = A.dtype != bool
    best = None
    for i, j in zip(*np.nonzero(B)):
        if numeric:
            piv = abs(A[i, j])
            if pivomin is not None and piv <= pivomin:
                continue
            if multmax is not None:
                col = np.abs(A[:, j].astype(float))
                col[i] = 0.0
                if col.max(initial=0.0) / float(piv) >= multmax:
                    continue
        key = (G[i, j], i, j)
        if best is None or key < best:
            best = key
    if best is None:
        raise PivotError("every candidate pivot was vetoed")
    return best[1] + 1, best[2] + 1


@dataclass
class EliminationResult:
    p: list
    q: list
    pivots: list  # (row label, col label) per step
    fill: int
    fill_positions: list  # (row label, col label)
    step_fill: list
    pattern_LU: np.ndarray  # B(M+U) in the final order


def eliminate(A, metric="tewarson", multmax=None, pivomin=None) -> EliminationResult:
    """Greedy local-fill elimination: at each stage choose_pivot on the
    active block, swap it into place, update structure (and values)."""
    A = np.asarray(A)
    numeric = A.dtype != bool
    W = A.astype(float) if numeric else A.astype(bool).astype(float)
    S = A != 0
    n = A.shape[0]
    rows, cols = list(range(1, n + 1)), list(range(1, n + 1))
    pivots, fills, step_fill = [], [], []
    for k in range(n):
        block = W[k:, k:] if numeric else S[k:, k:]
        i, j = choose_pivot(block, metric, multmax, pivomin)
        r, c = k + i - 1, k + j - 1
        for X in (W, S):
            X[[k, r]] = X[[r, k]]
            X[:, [k, c]] = X[:, [c, k]]
        rows[k], rows[r] = rows[r], rows[k]
        cols[k], cols[c] = cols[c], cols[k]
        pivots.append((rows[k], cols[k]))
        nf = 0
        for ii in range(k + 1, n):
            if not S[ii, k]:
                continue
            m = W[ii, k] / W[k, k] if numeric else 1.0
            for jj in range(k + 1, n):
                if S[k, jj]:
                    if not S[ii, jj]:
                        S[ii, jj] = True
                        nf += 1
                        fills.append((rows[ii], cols[jj]))
                    if numeric:
                        W[ii, jj] -= m * W[k, jj]
            if numeric:
                W[ii, k] = m
        step_fill.append(nf)
    return EliminationResult(rows, cols, pivots, sum(step_fill), fills, step_fill, S)


def symbolic_lu(pattern):
    """Symbolic Gauss without pivoting (no cancellation).  Returns the
    pattern of M+U and the list of 1-based fill positions."""
    S = _bool(pattern).copy()
    n = min(S.shape)
    fills = []
    for k in range(n):
        for i in range(k + 1, S.shape[0]):
            if not S[i, k]:
                continue
            for j in range(k + 1, S.shape[1]):
                if S[k, j] and not S[i, j]:
                    S[i, j] = True
                    fills.append((i + 1, j + 1))
    return S, fills


@dataclass
class P3Result:
    p: list  # row labels in final order
    q: list  # column labels in final order
    spikes: list  # column labels with entries above the diagonal
    spike_tops: dict  # spike label -> position (1-based) of its topmost entry
    trace: list = field(default_factory=list)
    recalled: list = field(default_factory=list)  # columns brought back from S

    def permuted(self, pattern):
        B = _bool(pattern)
        return B[np.ix_([i - 1 for i in self.p], [j - 1 for j in self.q])]

    def fill(self, pattern):
        """Symbolic fill positions (row label, col label) in P3 order."""
        _, f = symbolic_lu(self.permuted(pattern))
        return [(self.p[i - 1], self.q[j - 1]) for i, j in f]


def _heights(B, rows, cols, weights, k):
    # cumulative k-height: nonzeros of each column in rows of weight <= k
    sel = [i for i in rows if weights[i] <= k]
    if not sel:
        return {j: 0 for j in cols}
    return {j: int(B[sel, j].sum()) for j in cols}


def p3_order(pattern) -> P3Result:
    """Pivot pre-positioning heuristic P3 (possibly rectangular input)."""
    B = _bool(pattern)
    m, n = B.shape
    rows = list(range(m))
    cols = list(range(n))
    S: list = []
    out_rows, out_cols, trace, recalled = [], [], [], []
    while rows:
        weights = {i: int(B[i, cols].sum()) if cols else 0 for i in rows}
        rho = min(weights.values())
        h = min(i for i in rows if weights[i] == rho)
        if rho == 0:
            if not S:
                raise StructurallySingular(f"row {h + 1} has no placeable column")
            t = S.pop(0)
            out_rows.append(h)
            out_cols.append(t)
            rows.remove(h)
            recalled.append(t + 1)
            trace.append(("recall", 0, h + 1, t + 1))
            continue
        wmax = max(weights.values())
        hts = {k: _heights(B, rows, cols, weights, k) for k in range(rho, wmax + 1)}
        t = min(cols, key=lambda j: tuple(-hts[k][j] for k in range(rho, wmax + 1)) + (j,))
        if rho == 1:
            h = min(i for i in rows if weights[i] == 1 and B[i, t])
            out_rows.append(h)
            out_cols.append(t)
            rows.remove(h)
            cols.remove(t)
            trace.append(("place", 1, h + 1, t + 1))
        else:
            cols.remove(t)
            S.insert(0, t)
            trace.append(("exile", rho, None, t + 1))
    out_cols += cols + S  # leftover columns of a wide pattern
    p = [i + 1 for i in out_rows]
    q = [j + 1 for j in out_cols]
    P = B[np.ix_(out_rows, out_cols)]
    spikes, tops = [], {}
    for k in range(min(len(p), len(q))):
        above = np.nonzero(P[:k, k])[0]
        if above.size:
            spikes.append(q[k])
            tops[q[k]] = int(above[0]) + 1
    return P3Result(p, q, spikes, tops, trace, recalled)


def fill_confined_to_spikes(pattern, res: P3Result) -> bool:
    """Every fill position lies in a spike column, below that spike's top."""
    P = res.permuted(pattern)
    _, fills = symbolic_lu(P)
    for i, j in fills:
        label = res.q[j - 1]
        if label not in res.spike_tops or i <= res.spike_tops[label]:
            return False
    return True
