"""Block-angular Cholesky (bch) and the blocked update of its factor (bup),
with a simulated parallel cost ledger.

A block-angular matrix has h diagonal blocks Bᵏ (m(k)×n(k)) and coupling
blocks Cᵏ (m(k)×n0) sharing the trailing n0 = n(h+1) columns.  Its factor
U (AᵗA = UᵗU) keeps the same shape: Vᵏ upper triangular, Wᵏ (n(k)×n0) and
the southeast triangle S.  Nodes 1..h own block k, node 0 owns S.

FLOP model: one multiply-add, division or square root is one FLOP; a plane
rotation costs 4 per column it touches.  Parallel steps cost the maximum
over the nodes involved, sequenced steps add up.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .orthosym import NotPositiveDefinite, givens

CASES = ("I", "II", "III", "IV", "V")


def comm_factor(h, regime="serial"):
    """Number of sequential transfers needed to gather h blocks at node 0."""
    if regime == "serial":
        return h
    if regime == "parallel":
        return max(1, math.ceil(math.log2(h))) if h > 1 else 1
    raise ValueError(f"unknown regime {regime!r}")


@dataclass
class Step:
    name: str
    ptime: int
    inc: int
    nodes: dict = field(default_factory=dict)  # node -> flops, for parallel steps


@dataclass
class CostLedger:
    regime: str = "serial"
    dbmax: int = 0
    h: int = 1
    steps: list = field(default_factory=list)

    def add(self, name, ptime=0, inc=0, nodes=None):
        self.steps.append(Step(name, int(ptime), int(inc), dict(nodes or {})))

    def parallel(self, name, per_node: dict, inc=0):
        """Operations running concurrently on distinct nodes cost the max."""
        self.add(name, max(per_node.values(), default=0), inc, per_node)

    @property
    def ptime(self):
        return sum(s.ptime for s in self.steps)

    @property
    def inc(self):
        return sum(s.inc for s in self.steps)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["step", "ptime", "inc"])
        for s in self.steps:
            w.writerow([s.name, s.ptime, s.inc])
        w.writerow(["total", self.ptime, self.inc])
        return buf.getvalue()


class BlockAngular:
    def __init__(self, B, C):
        if len(B) != len(C) or not B:
            raise ValueError("need h >= 1 pairs of blocks")
        self.B = [np.asarray(b, dtype=float) for b in B]
        self.C = [np.asarray(c, dtype=float) for c in C]
        n0 = {c.shape[1] for c in self.C}
        if len(n0) != 1:
            raise ValueError("coupling blocks must share the column count")
        for b, c in zip(self.B, self.C):
            if b.shape[0] != c.shape[0]:
                raise ValueError("Bᵏ and Cᵏ must have equal row counts")

    @property
    def h(self):
        return len(self.B)

    @property
    def n0(self):
        return self.C[0].shape[1]

    def m(self, k):
        return self.B[k].shape[0]

    def nk(self, k):
        return self.B[k].shape[1]

    @property
    def dbmax(self):
        return max([b.shape[0] for b in self.B] + [b.shape[1] for b in self.B] + [self.n0])

    def row_offsets(self):
        return np.cumsum([0] + [b.shape[0] for b in self.B])

    def col_offsets(self):
        return np.cumsum([0] + [b.shape[1] for b in self.B])

    def assemble(self):
        ro, co = self.row_offsets(), self.col_offsets()
        A = np.zeros((ro[-1], co[-1] + self.n0))
        for k in range(self.h):
            A[ro[k]:ro[k + 1], co[k]:co[k + 1]] = self.B[k]
            A[ro[k]:ro[k + 1], co[-1]:] = self.C[k]
        return A

    def copy(self):
        return BlockAngular([b.copy() for b in self.B], [c.copy() for c in self.C])


@dataclass
class BlockedU:
    V: list
    W: list
    S: np.ndarray

    def assemble(self):
        ns = [v.shape[1] for v in self.V]
        n0 = self.S.shape[1]
        off = np.cumsum([0] + ns)
        U = np.zeros((off[-1] + n0, off[-1] + n0))
        for k, (v, w) in enumerate(zip(self.V, self.W)):
            U[off[k]:off[k + 1], off[k]:off[k + 1]] = v
            U[off[k]:off[k + 1], off[-1]:] = w
        U[off[-1]:, off[-1]:] = self.S
        return U

    def copy(self):
        return BlockedU([v.copy() for v in self.V], [w.copy() for w in self.W], self.S.copy())


# ---- block primitives --------------------------------------------------

def partial_cholesky(F, G=None):
    """Eliminate the first n columns of [[F, G], [Gᵗ, 0]]: returns V, W, Z
    with VᵗV = F, VᵗW = G, Z = −WᵗW, and the FLOP count."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    G = np.zeros((n, 0)) if G is None else np.asarray(G, dtype=float).reshape(n, -1)
    l = G.shape[1]
    M = np.zeros((n + l, n + l))
    M[:n, :n] = F
    M[:n, n:] = G
    flops = 0
    for j in range(n):
        d = M[j, j]
        if d <= 0:
            raise NotPositiveDefinite(j + 1)
        r = math.sqrt(d)
        M[j, j] = r
        M[j, j + 1:] /= r
        t = n + l - j - 1
        M[j + 1:, j + 1:] -= np.triu(np.outer(M[j, j + 1:], M[j, j + 1:]))
        flops += 1 + t + t * (t + 1) // 2
    V = np.triu(M[:n, :n])
    W = M[:n, n:].copy()
    Z = np.triu(M[n:, n:])
    Z = Z + np.triu(Z, 1).T
    return V, W, Z, flops


def cholesky_upper(F):
    V, _, _, flops = partial_cholesky(F)
    return V, flops


def partial_inverse_transform(V, W, y1, y2):
    """Solve [[V, W], [0, I]]ᵗ [u1; u2] = [y1; y2]: u1 = V⁻ᵗy1 and
    u2 = y2 − Wᵗu1."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    u1 = np.array(y1, dtype=float)
    for i in range(n):
        if V[i, i] == 0:
            raise ArithmeticError("singular triangular block")
        u1[i] = (u1[i] - V[:i, i] @ u1[:i]) / V[i, i]
    W = np.asarray(W, dtype=float).reshape(n, -1)
    u2 = np.asarray(y2, dtype=float) - W.T @ u1
    return u1, u2, n * (n + 1) // 2 + n * W.shape[1]


def _rotate(M, i, k, c, s, start):
    ri = M[i, start:].copy()
    rk = M[k, start:].copy()
    M[i, start:] = c * ri + s * rk
    M[k, start:] = c * rk - s * ri
    return 4 * (M.shape[1] - start)


def hessenberg_to_triangular(V, W=None, start=0):
    """Apply G(start, start+1), G(start+1, start+2), … to [V W] so the
    subdiagonal of the upper Hessenberg V vanishes.  V may have one column
    fewer than rows; then its last row ends up zero.  In place."""
    n, c = V.shape
    l = 0 if W is None else W.shape[1]
    M = V if W is None else np.hstack([V, W])
    flops = 0
    for i in range(start, min(n - 1, c)):
        if M[i + 1, i] == 0:
            continue
        cs, sn = givens(M[i, i], M[i + 1, i])
        flops += _rotate(M, i, i + 1, cs, sn, i)
        M[i + 1, i] = 0.0
    if W is not None:
        V[:] = M[:, :c]
        W[:] = M[:, c:c + l]
    return flops


def column_triangle_reduce(u, V):
    """Rotations G(n−1, n), …, G(1, 2) on [u V] collapse u into its first
    entry; V turns from triangular into upper Hessenberg.  In place."""
    n = len(u)
    M = np.column_stack([u, V]) if V.size else np.asarray(u, dtype=float).reshape(-1, 1).copy()
    flops = 0
    for i in range(n - 2, -1, -1):
        if M[i + 1, 0] == 0:
            continue
        cs, sn = givens(M[i, 0], M[i + 1, 0])
        # row i+1 is zero left of column i+1 of V, row i left of column i
        ri = M[i].copy()
        rk = M[i + 1].copy()
        cols = [0] + list(range(1 + i, M.shape[1]))
        M[i, cols] = cs * ri[cols] + sn * rk[cols]
        M[i + 1, cols] = cs * rk[cols] - sn * ri[cols]
        M[i + 1, 0] = 0.0
        flops += 4 * len(cols)
    u[:] = M[:, 0]
    if V.size:
        V[:] = M[:, 1:]
    return flops


# ---- blocked Cholesky --------------------------------------------------

def bch_bound(dbmax, h, regime="serial"):
    f = comm_factor(h, regime)
    return (4 + 1 / 3) * dbmax ** 3 + f * dbmax ** 2, f * dbmax ** 2


def bch(A: BlockAngular, regime="serial", fused=True):
    """Blocked Cholesky of AᵗA with per-node cost accounting."""
    h, n0 = A.h, A.n0
    led = CostLedger(regime, A.dbmax, h)
    f = comm_factor(h, regime)
    BtB, BtC, CtC = [], [], []
    fl1 = {}
    for k in range(h):
        b, c = A.B[k], A.C[k]
        m, n = b.shape
        BtB.append(b.T @ b)
        BtC.append(b.T @ c)
        CtC.append(c.T @ c)
        fl1[k + 1] = m * n * (n + 1) // 2 + m * n * n0 + m * n0 * (n0 + 1) // 2
    led.parallel("1 block products", fl1)
    if not fused:
        led.add("2 gather C'C", f * n0 * n0, f * n0 * n0)
    V, W, Zk, fl3 = [], [], [], {}
    for k in range(h):
        v, w, z, fl = partial_cholesky(BtB[k], BtC[k])
        V.append(v)
        W.append(w)
        if fused:
            z = z + CtC[k]
            fl += n0 * (n0 + 1) // 2
        Zk.append(z)
        fl3[k + 1] = fl
    led.parallel("3 partial Cholesky", fl3)
    Z = sum(Zk) if fused else sum(Zk) + sum(CtC)
    led.add("4 gather Z" if not fused else "2+4 gather C'C + Z", f * n0 * n0, f * n0 * n0)
    S, fl5 = cholesky_upper(Z) if n0 else (np.zeros((0, 0)), 0)
    led.add("5 Cholesky of S", fl5)
    return BlockedU(V, W, S), led


def gram_residual(A, U):
    """‖AᵗA − UᵗU‖_max / max(1, ‖AᵗA‖_max)."""
    Ad = A.assemble() if isinstance(A, BlockAngular) else np.asarray(A, float)
    Ud = U.assemble() if isinstance(U, BlockedU) else np.asarray(U, float)
    G = Ad.T @ Ad
    return float(np.abs(G - Ud.T @ Ud).max() / max(1.0, np.abs(G).max()))


def random_block_angular(rng, h, dbmax, square=True, density=1.0):
    """Random instance with every dimension ≤ dbmax.  With ``square`` the
    assembled matrix is square (Σm(k) = Σn(k) + n0), as a basis is."""
    while True:
        n0 = int(rng.integers(1, max(2, dbmax // 2) + 1))
        ns = [int(rng.integers(1, dbmax)) for _ in range(h)]
        if square:
            extra = [0] * h
            for _ in range(n0):
                extra[int(rng.integers(h))] += 1
            ms = [n + e for n, e in zip(ns, extra)]
        else:
            ms = [int(rng.integers(n, dbmax + 1)) for n in ns]
        if max(ms + ns + [n0]) <= dbmax and sum(ms) >= sum(ns) + n0:
            break

    def block(m, n):
        M = rng.standard_normal((m, n))
        if density < 1:
            M *= rng.random((m, n)) < density
        return M

    B = [block(m, n) for m, n in zip(ms, ns)]
    C = [block(m, n0) for m in ms]
    return BlockAngular(B, C)


# ---- blocked update ----------------------------------------------------

def bup_bound(case, dbmax, h, regime="serial"):
    f = comm_factor(h, regime)
    d = dbmax
    return {
        "I": (12 * d * d, 3 * d),
        "II": (12 * d * d, 3 * d),
        "III": (8 * d * d, 2 * d),
        "IV": (12 * d * d + f * d, f * d),
        "V": (6 * d * d + f * d, f * d),
    }[case]


def classify(ink, outk, h):
    """Case of an update with entering block ink and leaving block outk
    (blocks 1..h diagonal, h+1 the coupling block)."""
    r = h + 1
    if ink == r and outk == r:
        return "V"
    if ink == r:
        return "IV"
    if outk == r:
        return "III"
    return "II" if ink == outk else "I"


def _tri_solve_t(S, z):
    """S⁻ᵗz for upper triangular S."""
    n = S.shape[0]
    u = np.array(z, dtype=float)
    for i in range(n):
        u[i] = (u[i] - S[:i, i] @ u[:i]) / S[i, i]
    return u, n * (n + 1) // 2


def bup(A: BlockAngular, U: BlockedU, a, ink, outk, outj, regime="serial"):
    """Replace column outj (1-based, within block outk) by the column a,
    which has the structure of block ink.  For ink ≤ h, a holds the
    m(ink) entries of the rows of block ink; for ink = h+1 it is a full
    column.  A and U are updated in place; returns the case's ledger."""
    h, n0 = A.h, A.n0
    case = classify(ink, outk, h)
    led = CostLedger(regime, A.dbmax, h)
    f = comm_factor(h, regime)
    ro = A.row_offsets()
    a = np.asarray(a, dtype=float)
    j = outj - 1
    ki, ko = ink - 1, outk - 1

    if case in ("I", "II", "III"):
        b, c = A.B[ki], A.C[ki]
        m, n = b.shape
        if a.shape != (m,):
            raise ValueError(f"entering column must have {m} entries")
        # 1 y = Aᵗa restricted to block ink and the coupling columns
        y, yc = b.T @ a, c.T @ a
        led.add("1 y = A'a", m * n + m * n0)
        # 2 partial inverse transform on node ink
        u, z, fl = partial_inverse_transform(U.V[ki], U.W[ki], y, yc)
        led.add("2 partial inverse transform", fl)
        led.add("3 send z", 0, n0)
        ur, fl = _tri_solve_t(U.S, z)
        led.add("4 u = S^-t z", fl)
        U.V[ki] = np.column_stack([U.V[ki], u])
        A.B[ki] = np.column_stack([b, a])
        if case in ("I", "II"):
            _remove_diag_column(A, U, ko, j)
            flo = hessenberg_to_triangular(U.V[ko], U.W[ko], start=j)
            fls = column_triangle_reduce(ur, U.S)
            led.parallel("5 Hessenberg reductions", {outk: flo, 0: fls})
            rho, srow = ur[0], U.S[0].copy()
            if case == "I":
                # S row 1 (with ρ) joins block ink, the last row of outk joins S
                _append_row(U, ki, rho, srow)
                wrow = U.W[ko][-1].copy()
                U.V[ko] = U.V[ko][:-1]
                U.W[ko] = U.W[ko][:-1]
                U.S = np.vstack([wrow, U.S[1:]])
                led.add("6 row migrations", 0, (n0 + 1) + n0)
                led.add("7 S Hessenberg to triangular", hessenberg_to_triangular(U.S))
            else:
                # the block lost its last row's partner: rotate the last
                # row of V/W against [ρ, S row 1] (2 × (n0 + 1) problem)
                V, W = U.V[ki], U.W[ki]
                last = V.shape[0] - 1
                top = np.concatenate([[V[last, -1]], W[last]])
                bot = np.concatenate([[rho], srow])
                M = np.vstack([top, bot])
                cs, sn = givens(M[0, 0], M[1, 0])
                fl6 = _rotate(M, 0, 1, cs, sn, 0)
                M[1, 0] = 0.0
                V[last, -1], W[last] = M[0, 0], M[0, 1:]
                U.S[0] = M[1, 1:]
                led.add("6 send last row and rotate", fl6, n0 + 1)
                led.add("7 return row; S Hessenberg to triangular", hessenberg_to_triangular(U.S), n0 + 1)
                _trim_square(U, ki)
        else:  # III: a coupling column leaves
            for k in range(h):
                U.W[k] = np.delete(U.W[k], j, axis=1)
                A.C[k] = np.delete(A.C[k], j, axis=1)
            fls = column_triangle_reduce(ur, U.S)
            U.S = np.delete(U.S, j, axis=1)
            led.add("5 reduce [u S]; drop S column", fls)
            rho, srow = ur[0], U.S[0].copy()
            _append_row(U, ki, rho, srow)
            U.S = U.S[1:]
            led.add("6 send row to block ink", 0, n0)
            led.add("7 S Hessenberg to triangular", hessenberg_to_triangular(U.S))
    else:
        if a.shape != (ro[-1],):
            raise ValueError(f"entering coupling column must have {ro[-1]} entries")
        ys, xs, fl1 = [], [], {}
        for k in range(h):
            ak = a[ro[k]:ro[k + 1]]
            ys.append(A.B[k].T @ ak)
            xs.append(A.C[k].T @ ak)
            fl1[k + 1] = A.m(k) * (A.nk(k) + n0)
        led.parallel("1 y = A'a per block", fl1)
        us, z, fl2 = [], np.zeros(n0), {}
        for k in range(h):
            uk, zk, fl = partial_inverse_transform(U.V[k], U.W[k], ys[k], xs[k])
            us.append(uk)
            z += zk
            fl2[k + 1] = fl
        led.parallel("2 partial inverse transforms", fl2)
        # z here already includes the coupling contribution of every block;
        # the sums arrive at node 0 in comm_factor(h) rounds
        led.add("3 gather z", f * n0, f * n0)
        # the coupling part of a is the sum over blocks: handled through xs
        ur, fl = _tri_solve_t(U.S, z)
        led.add("4 u = S^-t z", fl)
        for k in range(h):
            U.W[k] = np.column_stack([U.W[k], us[k]])
            A.C[k] = np.column_stack([A.C[k], a[ro[k]:ro[k + 1]]])
        U.S = np.column_stack([U.S, ur])
        if case == "IV":
            _remove_diag_column(A, U, ko, j)
            flo = hessenberg_to_triangular(U.V[ko], U.W[ko], start=j)
            led.add("5 remove column; reduce block outk", flo)
            wrow = U.W[ko][-1].copy()
            U.V[ko] = U.V[ko][:-1]
            U.W[ko] = U.W[ko][:-1]
            U.S = np.vstack([wrow, U.S])
            led.add("6 move row to S; reduce", hessenberg_to_triangular(U.S), U.S.shape[1])
        else:
            for k in range(h):
                U.W[k] = np.delete(U.W[k], j, axis=1)
                A.C[k] = np.delete(A.C[k], j, axis=1)
            U.S = np.delete(U.S, j, axis=1)
            led.add("5 swap columns", 0)
            led.add("6 S Hessenberg to triangular", hessenberg_to_triangular(U.S, start=j))
    return case, led


def _remove_diag_column(A, U, k, j):
    if U.V[k].shape[1] <= 1:
        raise ValueError("a diagonal block cannot lose its last column")
    U.V[k] = np.delete(U.V[k], j, axis=1)
    A.B[k] = np.delete(A.B[k], j, axis=1)


def _append_row(U, k, rho, srow):
    V, W = U.V[k], U.W[k]
    newv = np.zeros(V.shape[1])
    newv[-1] = rho
    U.V[k] = np.vstack([V, newv])
    U.W[k] = np.vstack([W, srow])


def _trim_square(U, k):
    V = U.V[k]
    if V.shape[0] != V.shape[1]:
        raise AssertionError("block lost its square shape")


def is_upper_blocked(U: BlockedU, tol=0.0):
    ok = all(v.shape[0] == v.shape[1] and np.abs(np.tril(v, -1)).max(initial=0) <= tol for v in U.V)
    return ok and np.abs(np.tril(U.S, -1)).max(initial=0) <= tol
