"""Orthogonal and symmetric factorizations: Givens and Householder QR,
Cholesky, LDLᵗ, least squares, projections and the equality-constrained
quadratic program."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lufact import solve_lower, solve_upper


class NotPositiveDefinite(ArithmeticError):
    def __init__(self, index):
        super().__init__(f"non-positive pivot at index {index}")
        self.index = index


class RankDeficient(ArithmeticError):
    pass


def givens(a, b):
    """(c, s) with [[c, s], [-s, c]] @ [a, b] = [r, 0], r = hypot(a, b)."""
    if b == 0:
        return (1.0, 0.0) if a >= 0 else (-1.0, 0.0)
    r = math.hypot(a, b)
    return a / r, b / r


def apply_rot(A, i, k, c, s, cols=None):
    """Rotate rows i and k of A in place (0-based indices)."""
    sl = slice(None) if cols is None else cols
    ri = A[i, sl].copy()
    rk = A[k, sl].copy()
    A[i, sl] = c * ri + s * rk
    A[k, sl] = c * rk - s * ri


def householder_vector(x):
    """Unit u such that (I − 2uuᵗ)x = −sign(x₁)‖x‖e₁."""
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("zero vector has no reflector")
    v = x.copy()
    v[0] += math.copysign(nrm, x[0])
    return v / np.linalg.norm(v)


def apply_reflect(A, u):
    """A ← (I − 2uuᵗ)A in place; A may be a vector."""
    if A.ndim == 1:
        A -= 2.0 * u * (u @ A)
    else:
        A -= 2.0 * np.outer(u, u @ A)
    return A


@dataclass
class QRFactors:
    R: np.ndarray
    method: str
    transforms: list = field(default_factory=list)
    m: int = 0
    _Q: np.ndarray = None

    @property
    def Q(self):
        if self._Q is None:
            self._Q = self.apply_q(np.eye(self.m))
        return self._Q

    def apply_qt(self, b):
        """Qᵗb through the stored transform sequence."""
        y = np.array(b, dtype=float)
        for t in self.transforms:
            if t[0] == "rot":
                _, i, k, c, s = t
                yi, yk = y[i].copy(), y[k].copy()
                y[i] = c * yi + s * yk
                y[k] = c * yk - s * yi
            else:
                _, j, u = t
                y[j:] = apply_reflect(y[j:], u)
        return y

    def apply_q(self, y):
        y = np.array(y, dtype=float)
        for t in reversed(self.transforms):
            if t[0] == "rot":
                _, i, k, c, s = t
                yi, yk = y[i].copy(), y[k].copy()
                y[i] = c * yi - s * yk
                y[k] = s * yi + c * yk
            else:
                _, j, u = t
                y[j:] = apply_reflect(y[j:], u)
        return y

    @property
    def rank_deficient(self):
        d = np.abs(np.diag(self.R))
        return bool((d <= 1e-13 * max(d.max(initial=0.0), 1.0)).any())


def qr(A, method="householder", want_q=False) -> QRFactors:
    A = np.array(A, dtype=float)
    m, n = A.shape
    if m < n:
        raise ValueError("qr needs m >= n")
    W = A.copy()
    ops = []
    if method == "givens":
        for j in range(n):
            for i in range(m - 1, j, -1):
                if W[i, j] == 0:
                    continue
                c, s = givens(W[i - 1, j], W[i, j])
                apply_rot(W, i - 1, i, c, s)
                W[i, j] = 0.0
                ops.append(("rot", i - 1, i, c, s))
    elif method == "householder":
        for j in range(min(n, m - 1)):
            x = W[j:, j]
            if np.linalg.norm(x[1:]) == 0:
                continue
            u = householder_vector(x)
            W[j:, j:] = apply_reflect(W[j:, j:], u)
            W[j + 1:, j] = 0.0
            ops.append(("refl", j, u))
    else:
        raise ValueError(f"unknown method {method!r}")
    F = QRFactors(np.triu(W[:n]), method, ops, m)
    if want_q:
        F.Q  # noqa: B018 - materialize now
    return F


@dataclass
class CholFactors:
    C: np.ndarray = None  # S = C Cᵗ
    L: np.ndarray = None  # S = L D Lᵗ
    D: np.ndarray = None


def _check_symmetric(S):
    S = np.array(S, dtype=float)
    if S.shape[0] != S.shape[1] or not np.allclose(S, S.T, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(S).max(initial=0))):
        raise ValueError("symmetric matrix required")
    return S


def cholesky(S) -> CholFactors:
    S = _check_symmetric(S)
    n = S.shape[0]
    C = np.zeros_like(S)
    for j in range(n):
        d = S[j, j] - C[j, :j] @ C[j, :j]
        if d <= 0:
            raise NotPositiveDefinite(j + 1)
        C[j, j] = math.sqrt(d)
        C[j + 1:, j] = (S[j + 1:, j] - C[j + 1:, :j] @ C[j, :j]) / C[j, j]
    return CholFactors(C=C)


def ldl(S) -> CholFactors:
    S = _check_symmetric(S)
    n = S.shape[0]
    L = np.eye(n)
    D = np.zeros(n)
    for j in range(n):
        D[j] = S[j, j] - (L[j, :j] ** 2) @ D[:j]
        if D[j] <= 0:
            raise NotPositiveDefinite(j + 1)
        for i in range(j + 1, n):
            L[i, j] = (S[i, j] - (L[i, :j] * L[j, :j]) @ D[:j]) / D[j]
    return CholFactors(C=L * np.sqrt(D), L=L, D=D)


def least_squares(A, b, method="householder"):
    """x* = R⁻¹c with c the leading part of Qᵗb.  Returns (x*, y, z),
    the fitted vector y = Ax* and residual z = b − y."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    F = qr(A, method)
    if F.rank_deficient:
        raise RankDeficient("column rank deficient")
    c = F.apply_qt(b)[:n]
    x = solve_upper(F.R, c)
    y = A @ x
    return x, y, b - y


def project(A, b):
    """Orthogonal projection of b on the column space of A."""
    return least_squares(A, b)[1]


def projector(A):
    A = np.asarray(A, dtype=float)
    return np.column_stack([project(A, e) for e in np.eye(A.shape[0])])


def solve_qp(W, c, N, d):
    """Minimize ½yᵗWy + cᵗy subject to Nᵗy = d through the normal system
    [[W, −N], [Nᵗ, 0]] [y; l] = [−c; d].  Returns (y, l)."""
    W = np.asarray(W, dtype=float)
    c = np.asarray(c, dtype=float)
    n = W.shape[0]
    N = np.zeros((n, 0)) if N is None else np.asarray(N, dtype=float).reshape(n, -1)
    d = np.zeros(0) if d is None else np.atleast_1d(np.asarray(d, dtype=float))
    k = N.shape[1]
    K = np.block([[W, -N], [N.T, np.zeros((k, k))]])
    rhs = np.concatenate([-c, d])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as e:
        raise ArithmeticError("singular normal system") from e
    if not np.all(np.isfinite(sol)):
        raise ArithmeticError("singular normal system")
    return sol[:n], sol[n:]


def apply_inverse_via_r(A, R, x):
    """y = A⁻¹x computed as R⁻¹R⁻ᵗAᵗx (AᵗA = RᵗR), without Q."""
    A = np.asarray(A, dtype=float)
    R = np.asarray(R, dtype=float)
    if (np.abs(np.diag(R)) == 0).any():
        raise RankDeficient("singular R")
    z = solve_lower(R.T, A.T @ np.asarray(x, dtype=float))
    return solve_upper(R, z)
