"""LU factorization by Gauss elimination and by the Doolittle scheme.

Factors are stored packed: multipliers strictly below the diagonal, U on
and above it.  Rows are kept in pivot order (multipliers travel with their
rows), so ``F.p`` is the permuted-index vector with ``A[p-1] = L @ U``;
the equivalent pivot-transposition vector is ``F.t``.

Entries may be floats or ``fractions.Fraction`` (object arrays); the
arithmetic is generic so small-integer examples stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .matcore import Permutation, as_dense

DEFAULT_EPS = 1e-12


class SingularMatrixError(ArithmeticError):
    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


@dataclass
class LUFactors:
    LU: np.ndarray
    p: Permutation
    q: Permutation
    pivoting: str
    divisions: int = 0
    mulsubs: int = 0
    growth: float = 0.0  # max |U|
    growth_all: float = 0.0  # max over every intermediate kA (Gauss only)

    @property
    def n(self):
        return self.LU.shape[0]

    @property
    def L(self):
        L = np.tril(self.LU, -1)
        for k in range(self.n):
            L[k, k] = 1
        return L

    @property
    def U(self):
        return np.triu(self.LU)

    @property
    def M(self):
        return np.tril(self.LU, -1)

    @property
    def t(self):
        return self.p.pivots()

    def permuted(self, A):
        """P A Q for the recorded permutations."""
        A = as_dense(A) if not isinstance(A, np.ndarray) else A
        return A[np.ix_(self.p.index(), self.q.index())]

    def solve(self, b):
        b = np.asarray(b)
        y = solve_lower(self.L, b[self.p.index()], unit=True)
        z = solve_upper(self.U, y)
        x = np.empty_like(z)
        x[self.q.index()] = z
        return x


def _zero_like(A):
    return Fraction(0) if A.dtype == object else 0.0


def _prepare(A):
    A = as_dense(A) if not isinstance(A, np.ndarray) else A
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    if A.dtype == object:
        return A.copy()
    return np.array(A, dtype=float)


def _tol(A, eps):
    amax = max((abs(v) for v in A.flat), default=0)
    return eps * amax


def factor_gauss(A, pivoting="partial", eps=DEFAULT_EPS) -> LUFactors:
    """Gauss elimination with pivoting ``none``, ``partial`` or ``total``."""
    if pivoting not in ("none", "partial", "total"):
        raise ValueError(f"unknown pivoting {pivoting!r}")
    W = _prepare(A)
    n = W.shape[0]
    tol = _tol(W, eps)
    rows, cols = list(range(1, n + 1)), list(range(1, n + 1))
    divs = ms = 0
    growth_all = max((abs(v) for v in W.flat), default=0)
    for k in range(n):
        if pivoting == "partial":
            r = max(range(k, n), key=lambda i: (abs(W[i, k]), -i))
            c = k
        elif pivoting == "total":
            r, c = max(((i, j) for i in range(k, n) for j in range(k, n)),
                       key=lambda ij: (abs(W[ij]), -ij[0], -ij[1]))
        else:
            r = c = k
        if abs(W[r, c]) <= tol or W[r, c] == 0:
            raise SingularMatrixError(f"zero pivot at step {k + 1}", k + 1)
        if r != k:
            W[[k, r]] = W[[r, k]]
            rows[k], rows[r] = rows[r], rows[k]
        if c != k:
            W[:, [k, c]] = W[:, [c, k]]
            cols[k], cols[c] = cols[c], cols[k]
        piv = W[k, k]
        for i in range(k + 1, n):
            if W[i, k] == 0:
                continue
            m = W[i, k] / piv
            divs += 1
            W[i, k] = m
            for j in range(k + 1, n):
                if W[k, j] != 0:
                    W[i, j] = W[i, j] - m * W[k, j]
                    ms += 1
        if k + 1 < n:
            growth_all = max(growth_all, max((abs(v) for v in W[k + 1:, k + 1:].flat), default=0))
    F = LUFactors(W, Permutation(rows), Permutation(cols), pivoting, divs, ms)
    F.growth = max((abs(v) for v in np.triu(W).flat), default=0)
    F.growth_all = growth_all
    return F


def _two_product(a, b):
    # Dekker's error-free product: a*b = p + e exactly
    p = a * b
    split = 134217729.0  # 2**27 + 1

    def halves(x):
        c = split * x
        hi = c - (c - x)
        return hi, x - hi

    ah, al = halves(a)
    bh, bl = halves(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def inner_residual(a0, xs, ys):
    """a0 - Σ x_k y_k with a single rounding (exact for Fractions)."""
    if isinstance(a0, Fraction) or any(isinstance(v, Fraction) for v in xs):
        return a0 - sum((x * y for x, y in zip(xs, ys)), Fraction(0))
    parts = [float(a0)]
    for x, y in zip(xs, ys):
        p, e = _two_product(float(x), float(y))
        parts.append(-p)
        parts.append(-e)
    return math.fsum(parts)


def factor_doolittle(A, pivoting="partial", eps=DEFAULT_EPS) -> LUFactors:
    """Doolittle: every entry of M+U is one long inner product against the
    original matrix, accumulated exactly and rounded once."""
    if pivoting not in ("none", "partial", "total"):
        raise ValueError(f"unknown pivoting {pivoting!r}")
    A0 = _prepare(A)
    n = A0.shape[0]
    tol = _tol(A0, eps)
    D = A0.copy()
    rows, cols = list(range(1, n + 1)), list(range(1, n + 1))
    divs = ms = 0

    def schur(i, j, k):
        # entry (i, j) of kA: A_ij - Σ_{l<k} M_il U_lj
        return inner_residual(A0[i, j], [D[i, l] for l in range(k)], [D[l, j] for l in range(k)])

    for k in range(n):
        if pivoting == "total":
            cand = {(i, j): schur(i, j, k) for i in range(k, n) for j in range(k, n)}
            (r, c) = max(cand, key=lambda ij: (abs(cand[ij]), -ij[0], -ij[1]))
            v = {i: cand[(i, c)] for i in range(k, n)}
        else:
            v = {i: schur(i, k, k) for i in range(k, n)}
            r = max(range(k, n), key=lambda i: (abs(v[i]), -i)) if pivoting == "partial" else k
            c = k
        ms += k * (n - k)
        if abs(v[r]) <= tol or v[r] == 0:
            raise SingularMatrixError(f"zero pivot at step {k + 1}", k + 1)
        if r != k:
            for X in (A0, D):
                X[[k, r]] = X[[r, k]]
            rows[k], rows[r] = rows[r], rows[k]
            v[k], v[r] = v[r], v[k]
        if c != k:
            for X in (A0, D):
                X[:, [k, c]] = X[:, [c, k]]
            cols[k], cols[c] = cols[c], cols[k]
        D[k, k] = v[k]
        for j in range(k + 1, n):
            D[k, j] = schur(k, j, k)
            ms += k
        for i in range(k + 1, n):
            D[i, k] = v[i] / D[k, k]
            divs += 1
    F = LUFactors(D, Permutation(rows), Permutation(cols), pivoting, divs, ms)
    F.growth = F.growth_all = max((abs(v) for v in np.triu(D).flat), default=0)
    return F


def factor_preordered(A, p, q, spikes=(), eps=DEFAULT_EPS) -> LUFactors:
    """Gauss elimination in a fixed order (rows p, columns q), used after
    P3/P4.  A zero pivot in a spike column is repaired by exchanging it with
    a later spike column that has a nonzero in the pivot row."""
    A = _prepare(A)
    n = A.shape[0]
    rows, cols = list(p), list(q)
    W = A[np.ix_([i - 1 for i in rows], [j - 1 for j in cols])].copy()
    tol = _tol(W, eps)
    spike_set = set(spikes)
    divs = ms = 0
    swaps = []
    for k in range(n):
        if abs(W[k, k]) <= tol or W[k, k] == 0:
            alt = [j for j in range(k + 1, n) if cols[j] in spike_set and abs(W[k, j]) > tol]
            if cols[k] not in spike_set or not alt:
                raise SingularMatrixError(f"zero pivot at step {k + 1}", k + 1)
            j = alt[0]
            W[:, [k, j]] = W[:, [j, k]]
            cols[k], cols[j] = cols[j], cols[k]
            swaps.append((k + 1, j + 1))
        for i in range(k + 1, n):
            if W[i, k] == 0:
                continue
            m = W[i, k] / W[k, k]
            divs += 1
            W[i, k] = m
            for j in range(k + 1, n):
                if W[k, j] != 0:
                    W[i, j] = W[i, j] - m * W[k, j]
                    ms += 1
    F = LUFactors(W, Permutation(rows), Permutation(cols), "preordered", divs, ms)
    F.growth = max((abs(v) for v in np.triu(W).flat), default=0)
    F.spike_swaps = swaps
    return F


def solve_upper(U, b, access="by_row"):
    U = np.asarray(U)
    n = U.shape[0]
    x = np.array(b, dtype=U.dtype if U.dtype == object else float).copy()
    for k in range(n):
        if U[k, k] == 0:
            raise SingularMatrixError(f"zero diagonal at {k + 1}", k + 1)
    if access == "by_row":
        for i in range(n - 1, -1, -1):
            s = x[i]
            for j in range(i + 1, n):
                s = s - U[i, j] * x[j]
            x[i] = s / U[i, i]
    elif access == "by_col":
        for j in range(n - 1, -1, -1):
            x[j] = x[j] / U[j, j]
            for i in range(j):
                x[i] = x[i] - x[j] * U[i, j]
    else:
        raise ValueError(f"unknown access {access!r}")
    return x


def solve_lower(L, b, access="by_row", unit=False):
    L = np.asarray(L)
    n = L.shape[0]
    x = np.array(b, dtype=L.dtype if L.dtype == object else float).copy()
    if not unit:
        for k in range(n):
            if L[k, k] == 0:
                raise SingularMatrixError(f"zero diagonal at {k + 1}", k + 1)
    if access == "by_row":
        for i in range(n):
            s = x[i]
            for j in range(i):
                s = s - L[i, j] * x[j]
            x[i] = s if unit else s / L[i, i]
    elif access == "by_col":
        for j in range(n):
            if not unit:
                x[j] = x[j] / L[j, j]
            for i in range(j + 1, n):
                x[i] = x[i] - x[j] * L[i, j]
    else:
        raise ValueError(f"unknown access {access!r}")
    return x


def flops_report(F: LUFactors) -> dict:
    """Operation counts: those recorded while factoring plus the cost of
    one right-hand side (forward and back substitution), counted over the
    stored pattern of the factors."""
    n = F.n
    fwd = sum(1 for i in range(n) for j in range(i) if F.LU[i, j] != 0)
    back = sum(1 for i in range(n) for j in range(i + 1, n) if F.LU[i, j] != 0)
    return {
        "n": n,
        "factor_divisions": F.divisions,
        "factor_mulsubs": F.mulsubs,
        "forward_mulsubs": fwd,
        "back_mulsubs": back,
        "solve_divisions": n,
        "divisions": F.divisions,
        "mulsubs": F.mulsubs + fwd + back,
    }


def formula_counts(n: int) -> dict:
    return {"divisions": n * (n - 1) // 2, "mulsubs": n * (n * n - 1) // 3 + n * (n - 1) // 2}


def solve(A, b, pivoting="partial"):
    return factor_gauss(A, pivoting).solve(b)
