"""Basis-change machinery: the general modification series, Sherman-Morrison,
column-replacement inverse updates, and two updatable LU forms (the
Bartels-Golub Hessenberg reduction and the Saunders kernel update).

Basis positions, row labels and column labels are 1-based."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blockform import StructurallySingularError, p4
from .fillasym import StructurallySingular
from .lufact import LUFactors, SingularMatrixError, factor_gauss, factor_preordered, solve_lower, solve_upper

REINVERT_EVERY = 50
RESIDUAL_LIMIT = 1e-6


class DivergentSeries(ArithmeticError):
    pass


class SingularUpdate(ArithmeticError):
    pass


def _arr(x):
    a = np.asarray(x)
    return a if a.dtype == object else a.astype(float)


def modification_series(V, dA, alpha, k_max=30):
    """(A + α δA)⁻¹ ≈ V + Σ_{k=1}^{k_max} (−α)^k (V δA)^k V."""
    V = _arr(V)
    M = alpha * (V.astype(float) @ np.asarray(dA, dtype=float))
    rho = max(abs(np.linalg.eigvals(M)), default=0.0)
    if rho >= 1:
        raise DivergentSeries(f"spectral radius of αVδA is {rho:.3g} >= 1")
    VdA = V @ np.asarray(dA, dtype=float)
    term = V.astype(float).copy()
    out = term.copy()
    for _ in range(k_max):
        term = -alpha * (VdA @ term)
        out += term
    return out


def sherman_morrison(V, u, w, alpha=1, tol=1e-14):
    """Inverse of A + α u wᵗ from V = A⁻¹: V + β V u wᵗ V with
    β = −(α⁻¹ + wᵗ V u)⁻¹."""
    V = _arr(V)
    u, w = _arr(u), _arr(w)
    Vu = V @ u
    if not np.any(Vu != 0) or alpha == 0:
        return V.copy()
    den = 1 / alpha + w @ Vu
    if abs(den) <= tol * max(1.0, abs(float(w @ Vu))):
        raise SingularUpdate("α⁻¹ + wᵗVu vanishes")
    beta = -1 / den
    return V + beta * np.outer(Vu, w @ V)


def replace_column_inverse(V, a, j, tol=1e-14):
    """Inverse after column j (1-based) of A is replaced by a; only V is
    needed: β = −(V_j a)⁻¹ and Â⁻¹ = V + β (Va − e_j) V_j."""
    V = _arr(V)
    a = _arr(a)
    Va = V @ a
    piv = Va[j - 1]
    if abs(piv) <= tol * max(1.0, float(np.abs(Va.astype(float)).max())):
        raise SingularUpdate("V_j a vanishes; the new basis is singular")
    d = Va.copy()
    d[j - 1] = d[j - 1] - 1
    return V - np.outer(d, V[j - 1]) / piv


def _apply_ops(ops, y):
    for op in ops:
        if op[0] == "swap":
            _, r, s = op
            y[[r - 1, s - 1]] = y[[s - 1, r - 1]]
        else:
            _, t, s, m = op
            y[t - 1] -= m * y[s - 1]
    return y


class UpdatableBasis:
    """Common part: the basis matrix, the base transform L⁻¹P and the log
    of elementary row operations applied after it."""

    def __init__(self, B, reinvert_every=REINVERT_EVERY, residual_limit=RESIDUAL_LIMIT):
        self.B = np.array(B, dtype=float)
        self.n = self.B.shape[0]
        self.reinvert_every = reinvert_every
        self.residual_limit = residual_limit
        self.updates = 0
        self.reinversions = 0
        self._factor()

    # subclasses fill the factored state
    def _factor(self):
        raise NotImplementedError

    def _base_transform(self, F: LUFactors, b):
        y = np.asarray(b, dtype=float)[F.p.index()]
        return solve_lower(F.L, y, unit=True)

    def transform(self, b):
        """T b: the base L⁻¹P followed by the logged row operations."""
        return _apply_ops(self.log, self._base_transform(self.F, b))

    def _solve(self, b):
        raise NotImplementedError

    def solve(self, b):
        x = self._solve(b)
        b = np.asarray(b, dtype=float)
        r = np.abs(b - self.B @ x).max(initial=0.0)
        if r > self.residual_limit * max(1.0, np.abs(b).max(initial=0.0)):
            self.reinvert()
            x = self._solve(b)
        return x

    def replace(self, s, a):
        a = np.asarray(a, dtype=float)
        self._update(s, a)
        self.B[:, s - 1] = a
        self.updates += 1
        if self.updates >= self.reinvert_every:
            self.reinvert()

    def reinvert(self):
        self._factor()
        self.reinversions += 1

    def inverse(self):
        return np.column_stack([self._solve(e) for e in np.eye(self.n)])


class BartelsGolubBasis(UpdatableBasis):
    """LU chain form.  T B[:, cols] = U where cols[k] is the basis position
    held by column k of U."""

    def _factor(self):
        self.F = factor_gauss(self.B, "partial")
        self.U = self.F.U.astype(float)
        self.cols = list(self.F.q.p)
        self.log = []
        self.multipliers = []
        self.updates = 0

    def _update(self, s, a):
        n = self.n
        at = self.transform(a)
        j = self.cols.index(s)
        # cyclic shift: drop column j, the transformed column goes last
        self.U = np.column_stack([np.delete(self.U, j, axis=1), at])
        self.cols = self.cols[:j] + self.cols[j + 1:] + [s]
        H = self.U
        step_ops = []
        for i in range(j, n - 1):
            if H[i + 1, i] == 0:
                continue
            if abs(H[i + 1, i]) > abs(H[i, i]):
                H[[i, i + 1]] = H[[i + 1, i]]
                step_ops.append(("swap", i + 1, i + 2))
            m = H[i + 1, i] / H[i, i]
            H[i + 1, i:] -= m * H[i, i:]
            H[i + 1, i] = 0.0
            step_ops.append(("elim", i + 2, i + 1, m))
            self.multipliers.append(m)
        self.log += step_ops
        d = np.abs(np.diag(H))
        if (d <= 1e-14 * max(1.0, np.abs(H).max())).any():
            raise SingularUpdate("updated basis is singular")

    def _solve(self, b):
        z = solve_upper(self.U, self.transform(b))
        x = np.empty(self.n)
        x[[c - 1 for c in self.cols]] = z
        return x


@dataclass
class KernelSnapshot:
    rows: list
    cols: list
    pattern: np.ndarray


class SaundersBasis(UpdatableBasis):
    """Saunders form Ũ = [D E; 0 K].

    D maps a column label (basis position) to its (row label, value) and
    holds no other entry.  E maps a D row to its entries in kernel
    columns.  K is the dense kernel on rows ``krows`` and columns
    ``kcols``, kept upper triangular."""

    def __init__(self, B, reinvert_every=REINVERT_EVERY, residual_limit=RESIDUAL_LIMIT,
                 use_p4=True, tol=1e-12):
        self.use_p4 = use_p4
        self.tol = tol
        self.fallbacks = 0
        self.kernel_history = []
        self.last_kernel: KernelSnapshot | None = None
        super().__init__(B, reinvert_every, residual_limit)

    def _factor(self):
        F = None
        if self.use_p4:
            try:
                bt = p4(self.B != 0)
                F = factor_preordered(self.B, bt.p, bt.q, bt.spikes)
            except (SingularMatrixError, StructurallySingularError, StructurallySingular):
                F = None
        if F is None:
            F = factor_gauss(self.B, "partial")
        self.F = F
        self.log = []
        self.updates = 0
        self._split(F.U.astype(float), list(F.q.p), list(range(1, self.n + 1)))

    def _split(self, U, col_labels, row_labels):
        n = U.shape[0]
        off = np.triu(U, 1) != 0
        spike = [bool(off[:, k].any()) for k in range(n)]
        self.D = {col_labels[k]: (row_labels[k], U[k, k]) for k in range(n) if not spike[k]}
        kidx = [k for k in range(n) if spike[k]]
        self.krows = [row_labels[k] for k in kidx]
        self.kcols = [col_labels[k] for k in kidx]
        self.K = U[np.ix_(kidx, kidx)].copy()
        self.E = {}
        for k in range(n):
            if not spike[k]:
                ent = {col_labels[c]: U[k, c] for c in kidx if U[k, c] != 0}
                if ent:
                    self.E[row_labels[k]] = ent

    @classmethod
    def from_upper(cls, U, **kw):
        """Basis equal to an upper triangular U (T = I); columns with
        entries above the diagonal form the kernel."""
        obj = cls.__new__(cls)
        obj.use_p4 = False
        obj.tol = kw.get("tol", 1e-12)
        obj.fallbacks = 0
        obj.kernel_history = []
        obj.last_kernel = None
        obj.B = np.array(U, dtype=float)
        obj.n = obj.B.shape[0]
        obj.reinvert_every = kw.get("reinvert_every", REINVERT_EVERY)
        obj.residual_limit = kw.get("residual_limit", RESIDUAL_LIMIT)
        obj.updates = obj.reinversions = 0
        obj.F = None
        obj.log = []
        obj._split(obj.B, list(range(1, obj.n + 1)), list(range(1, obj.n + 1)))
        return obj

    @classmethod
    def from_parts(cls, n, D, E, K, krows, kcols, **kw):
        """Basis given directly in Saunders form (T = I): D maps column to
        (row, value), E maps row to {kernel column: value}, K is the
        kernel on ``krows`` × ``kcols``."""
        B = np.zeros((n, n))
        for c, (r, v) in D.items():
            B[r - 1, c - 1] = v
        for r, ent in E.items():
            for c, v in ent.items():
                B[r - 1, c - 1] = v
        K = np.array(K, dtype=float)
        B[np.ix_([r - 1 for r in krows], [c - 1 for c in kcols])] = K
        obj = cls.from_upper(np.eye(n), **kw)
        obj.B = B
        obj.D = dict(D)
        obj.E = {r: dict(e) for r, e in E.items()}
        obj.K = K.copy()
        obj.krows, obj.kcols = list(krows), list(kcols)
        return obj

    def transform(self, b):
        y = np.asarray(b, dtype=float).copy() if self.F is None else self._base_transform(self.F, b)
        return _apply_ops(self.log, y)

    @property
    def kernel_dim(self):
        return len(self.kcols)

    def _update(self, s, a):
        at = self.transform(a)
        before = self.kernel_dim
        was_spike = s in self.kcols
        krow_set = set(self.krows)
        if s in self.D:
            # triangular column leaves: its row joins the kernel as last row
            r, _ = self.D.pop(s)
            erow = self.E.pop(r, {})
            last = np.array([erow.get(c, 0.0) for c in self.kcols])
            self.K = np.vstack([self.K, last]) if self.K.size else last.reshape(1, -1)
            self.krows.append(r)
            krow_set.add(r)
            newcol = np.array([at[i - 1] for i in self.krows])
            self.K = np.column_stack([self.K, newcol]) if self.K.size else newcol.reshape(-1, 1)
            self.kcols.append(s)
            self._store_e_column(s, at, krow_set)
            self._snapshot()
            ok = self._reduce_last_row()
        else:
            j = self.kcols.index(s)
            for r in list(self.E):
                self.E[r].pop(s, None)
                if not self.E[r]:
                    del self.E[r]
            newcol = np.array([at[i - 1] for i in self.krows])
            self.K = np.column_stack([np.delete(self.K, j, axis=1), newcol])
            self.kcols = self.kcols[:j] + self.kcols[j + 1:] + [s]
            self._store_e_column(s, at, krow_set)
            self._snapshot()
            ok = self._reduce_hessenberg(j)
        if not ok:
            # rejected kernel pivot: start again from a fresh factorization
            self.B[:, s - 1] = a
            self.fallbacks += 1
            self.reinvert()
            return
        # (kernel dim before, after, leaving column was a spike)
        self.kernel_history.append((before, self.kernel_dim, was_spike))

    def _store_e_column(self, s, at, krow_set):
        for i in range(1, self.n + 1):
            if i not in krow_set and at[i - 1] != 0:
                self.E.setdefault(i, {})[s] = at[i - 1]

    def _snapshot(self):
        self.last_kernel = KernelSnapshot(list(self.krows), list(self.kcols), self.K != 0)

    def _swap_rows(self, i, k):
        self.K[[i, k]] = self.K[[k, i]]
        # row labels stay with positions; the logged swap moves the values
        self.log.append(("swap", self.krows[i], self.krows[k]))

    def _elim(self, t, s, col):
        m = self.K[t, col] / self.K[s, col]
        self.K[t, col:] -= m * self.K[s, col:]
        self.K[t, col] = 0.0
        self.log.append(("elim", self.krows[t], self.krows[s], m))

    def _pivot_ok(self):
        d = np.abs(np.diag(self.K))
        return not (d <= self.tol * max(1.0, np.abs(self.K).max(initial=0.0))).any()

    def _reduce_hessenberg(self, j):
        m = self.kernel_dim
        for i in range(j, m - 1):
            if self.K[i + 1, i] == 0:
                continue
            if abs(self.K[i + 1, i]) > abs(self.K[i, i]):
                self._swap_rows(i, i + 1)
            self._elim(i + 1, i, i)
        return self._pivot_ok()

    def _reduce_last_row(self):
        m = self.kernel_dim
        last = m - 1
        for k in range(m - 1):
            if self.K[last, k] == 0:
                continue
            if abs(self.K[last, k]) > abs(self.K[k, k]):
                # the eliminated-so-far last row is upper in column k;
                # the displaced row continues as the last row
                self._swap_rows(k, last)
            self._elim(last, k, k)
        return self._pivot_ok()

    def _solve(self, b):
        y = self.transform(b)

        zk = solve_upper(self.K, np.array([y[r - 1] for r in self.krows])) if self.kcols else np.zeros(0)
        zmap = dict(zip(self.kcols, zk))
        x = np.empty(self.n)
        for c, v in zmap.items():
            x[c - 1] = v
        for c, (r, d) in self.D.items():
            acc = y[r - 1] - sum(v * zmap[k] for k, v in self.E.get(r, {}).items())
            x[c - 1] = acc / d
        return x

    def reduced_upper(self):
        """Ũ as a dense array in the order [D columns, kernel columns]."""
        dcols = list(self.D)
        drows = [self.D[c][0] for c in dcols]
        rows, cols = drows + self.krows, dcols + self.kcols
        U = np.zeros((self.n, self.n))
        for i, c in enumerate(dcols):
            U[i, i] = self.D[c][1]
            for k, v in self.E.get(drows[i], {}).items():
                U[i, cols.index(k)] = v
        nd = len(dcols)
        U[nd:, nd:] = self.K
        return rows, cols, U
