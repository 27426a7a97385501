"""Induced norms with witnesses, condition numbers, the perturbation bound,
Wilkinson's backward-error bound and residual diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fpscale import FPSystem, fl
from .lufact import SingularMatrixError, factor_gauss


class PerturbationTooLarge(ValueError):
    pass


def _dense(A):
    if hasattr(A, "to_dense"):
        return A.to_dense()
    return np.asarray(A, dtype=float)


def norm(A, p=1):
    """Induced matrix norm (p = 1 or inf) and a vector attaining it.

    For p = 1 the witness is the unit vector of the heaviest column; for
    p = inf it is the sign pattern of the heaviest row."""
    A = _dense(A)
    if A.ndim == 1:
        return float(np.linalg.norm(A, 1 if p == 1 else np.inf)), None
    if p == 1:
        sums = np.abs(A).sum(axis=0)
        k = int(np.argmax(sums))
        w = np.zeros(A.shape[1])
        w[k] = 1.0
    elif p in ("inf", np.inf, float("inf")):
        sums = np.abs(A).sum(axis=1)
        k = int(np.argmax(sums))
        w = np.where(A[k] >= 0, 1.0, -1.0)
    else:
        raise ValueError(f"unsupported norm {p!r}")
    return float(sums[k]), w


def vnorm(x, p=1):
    x = np.asarray(x, dtype=float)
    if p == 1:
        return float(np.abs(x).sum())
    if p == 2:
        return float(np.sqrt(x @ x))
    return float(np.abs(x).max(initial=0.0))


def inverse(A):
    """A⁻¹ by one LU factorization and n solves against the columns of I."""
    A = _dense(A)
    F = factor_gauss(A, "partial")
    return np.column_stack([F.solve(e) for e in np.eye(A.shape[0])])


def cond(A, p=1) -> float:
    A = _dense(A)
    return norm(A, p)[0] * norm(inverse(A), p)[0]


def norm2(A, iters=50, tol=1e-10, rng=None) -> float:
    """Largest singular value from power iteration on AᵗA."""
    A = _dense(A)
    rng = rng or np.random.default_rng(0)
    x = rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = A.T @ (A @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        if abs(ny - lam) <= tol * ny:
            lam = ny
            break
        lam = ny
    return float(np.sqrt(lam))


@dataclass
class NormReport:
    norm1: float
    norminf: float
    norm2: float
    witness1: np.ndarray
    witnessinf: np.ndarray
    cond1: float | None = None
    condinf: float | None = None
    growth: float | None = None

    def rows(self):
        out = [("norm1", self.norm1), ("norminf", self.norminf), ("norm2", self.norm2)]
        out += [(k, getattr(self, k)) for k in ("cond1", "condinf", "growth") if getattr(self, k) is not None]
        return out


def norm_report(A) -> NormReport:
    A = _dense(A)
    n1, w1 = norm(A, 1)
    ni, wi = norm(A, "inf")
    rep = NormReport(n1, ni, norm2(A), w1, wi)
    if A.shape[0] == A.shape[1]:
        try:
            F = factor_gauss(A, "partial")
            Ainv = np.column_stack([F.solve(e) for e in np.eye(A.shape[0])])
            rep.cond1 = n1 * norm(Ainv, 1)[0]
            rep.condinf = ni * norm(Ainv, "inf")[0]
            rep.growth = F.growth
        except SingularMatrixError:
            pass
    return rep


def perturbation_bound(A, dA_norm, db_norm, b_norm, p="inf", cond_value=None, A_norm=None):
    """Bound on ‖δx‖/‖x‖ when solving (A + δA)(x + δx) = b + δb:
    cond/(1 − cond‖δA‖/‖A‖) · (‖δb‖/‖b‖ + ‖δA‖/‖A‖)."""
    A = _dense(A)
    nA = norm(A, p)[0] if A_norm is None else A_norm
    k = cond(A, p) if cond_value is None else cond_value
    if dA_norm * k / nA >= 1:
        raise PerturbationTooLarge("‖δA‖‖A⁻¹‖ >= 1")
    return k / (1 - k * dA_norm / nA) * (db_norm / b_norm + dA_norm / nA)


def observed_ratio(A, dA, b, db, p="inf"):
    A = _dense(A)
    x = np.linalg.solve(A, b)
    xp = np.linalg.solve(A + np.asarray(dA, float), np.asarray(b, float) + np.asarray(db, float))
    pp = 1 if p == 1 else "inf"
    return vnorm(xp - x, pp) / vnorm(x, pp), xp


def wilkinson_bound(n, g, u):
    """‖δA‖∞ ≤ (2n + 1) g u."""
    return (2 * n + 1) * g * u


def growth(F) -> float:
    return F.growth


def residual(A, x, b, p="inf"):
    A = _dense(A)
    r = np.asarray(b, float) - A @ np.asarray(x, float)
    return vnorm(r, 1 if p == 1 else "inf")


def backward_error(A, x, b):
    """Smallest ‖δA‖∞ with (A + δA)x = b: ‖r‖∞ / ‖x‖∞, attained by
    δA = r e_kᵗ / x_k where |x_k| is largest."""
    return residual(A, x, b) / vnorm(x, "inf")


def spf_doolittle_solve(A, b, sys: FPSystem):
    """Doolittle with partial pivoting in the simulated system; inner
    products are accumulated exactly and rounded once (extended
    accumulation).  Returns (x̃, g) with g = max |U| as stored."""
    A = [[fl(Fraction(v).limit_denominator(10 ** 12) if isinstance(v, float) else v, sys) for v in row]
         for row in np.asarray(A, dtype=object)]
    n = len(A)
    b = [fl(Fraction(v).limit_denominator(10 ** 12) if isinstance(v, float) else v, sys) for v in b]
    W = [row[:] for row in A]
    perm = list(range(n))
    for k in range(n):
        for i in range(k, n):  # candidate U[k][k] values for every row
            W[i][k] = fl(A[perm[i]][k] - sum(W[i][j] * W[j][k] for j in range(k)), sys)
        r = max(range(k, n), key=lambda i: (abs(W[i][k]), -i))
        if W[r][k] == 0:
            raise SingularMatrixError("zero pivot in simulated factorization", k + 1)
        W[k], W[r] = W[r], W[k]
        perm[k], perm[r] = perm[r], perm[k]
        for j in range(k + 1, n):
            W[k][j] = fl(A[perm[k]][j] - sum(W[k][i] * W[i][j] for i in range(k)), sys)
        for i in range(k + 1, n):
            W[i][k] = fl(W[i][k] / W[k][k], sys)
    y = []
    for i in range(n):
        y.append(fl(b[perm[i]] - sum(W[i][j] * y[j] for j in range(i)), sys))
    x = [Fraction(0)] * n
    for i in reversed(range(n)):
        x[i] = fl((y[i] - sum(W[i][j] * x[j] for j in range(i + 1, n))) / W[i][i], sys)
    g = max(abs(W[i][j]) for i in range(n) for j in range(i, n))
    return np.array([float(v) for v in x]), float(g)
