import numpy as np
import pytest

from sparsela.matcore import binomial
from sparsela.lufact import solve
from sparsela.orthosym import (
    NotPositiveDefinite, RankDeficient, apply_inverse_via_r, apply_reflect, cholesky, givens,
    householder_vector, ldl, least_squares, project, projector, qr, solve_qp,
)


def rotate(a, b):
    c, s = givens(a, b)
    return c * a + s * b, c * b - s * a


def test_givens_cases():
    assert rotate(1.0, 0.0) == (1.0, 0.0)
    r, z = rotate(0.0, 1.0)
    assert abs(r) == 1.0 and z == 0.0
    r, z = rotate(3.0, 4.0)
    assert r == pytest.approx(5.0) and abs(z) < 1e-15


def test_householder_axis_and_norm(rng):
    e1 = np.array([1.0, 0.0, 0.0])
    y = apply_reflect(e1.copy(), householder_vector(e1))
    assert abs(abs(y[0]) - 1.0) < 1e-14 and np.abs(y[1:]).max() <= 1e-14
    x = np.array([3.0, 4.0])
    y = apply_reflect(x.copy(), householder_vector(x))
    assert np.linalg.norm(y) == pytest.approx(5.0) and abs(y[1]) < 1e-14
    u = householder_vector(rng.standard_normal(5))
    H = np.eye(5) - 2 * np.outer(u, u)
    assert np.abs(H @ H - np.eye(5)).max() <= 1e-13


def test_qr_of_orthogonal_is_signed_identity(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    for method in ("givens", "householder"):
        R = qr(Q, method).R
        assert np.allclose(np.abs(R), np.eye(4), atol=1e-12)


def test_qr_gram(B3):
    for method in ("givens", "householder"):
        R = qr(B3, method).R
        assert np.abs(R.T @ R - B3.T @ B3).max() <= 1e-12


def test_qr_methods_agree(rng):
    A = rng.standard_normal((5, 3))
    G, H = qr(A, "givens", want_q=True), qr(A, "householder", want_q=True)
    assert np.abs(np.abs(G.R) - np.abs(H.R)).max() <= 1e-12
    for F in (G, H):
        assert np.abs(F.Q.T @ F.Q - np.eye(5)).max() <= 1e-12


def test_cholesky(B3):
    assert np.allclose(cholesky(np.eye(3)).C, np.eye(3))
    S = B3 @ B3.T
    C = cholesky(S).C
    assert np.abs(C @ C.T - S).max() <= 1e-12
    assert np.abs(ldl(S).C - C).max() <= 1e-10


def test_indefinite_reports_index():
    with pytest.raises(NotPositiveDefinite) as err:
        cholesky([[1, 2], [2, 1]])
    assert err.value.index == 2


def test_least_squares_cases(rng):
    A = rng.standard_normal((6, 3))
    b = A @ np.array([1.0, -2.0, 0.5])
    x, y, z = least_squares(A, b)
    assert np.allclose(y, b) and np.abs(z).max() < 1e-12
    Q, _ = np.linalg.qr(A, mode="complete")
    bperp = Q[:, 3:] @ rng.standard_normal(3)
    x, _, _ = least_squares(A, bperp)
    assert np.abs(x).max() < 1e-12


def test_least_squares_normal_equations(rng):
    A, b = rng.standard_normal((6, 3)), rng.standard_normal(6)
    for method in ("givens", "householder"):
        x, _, z = least_squares(A, b, method)
        assert np.abs(x - np.linalg.solve(A.T @ A, A.T @ b)).max() <= 1e-10
        assert np.abs(A.T @ z).max() <= 1e-10


def test_rank_deficient():
    with pytest.raises(RankDeficient):
        least_squares(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]), np.ones(3))


def test_projection(rng):
    e1 = np.zeros((4, 1))
    e1[0] = 1
    b = rng.standard_normal(4)
    assert np.allclose(project(e1, b), [b[0], 0, 0, 0])
    A = rng.standard_normal((5, 2))
    y = project(A, b := rng.standard_normal(5))
    assert abs(b @ b - y @ y - (b - y) @ (b - y)) <= 1e-10
    P = projector(A)
    assert np.allclose(P @ P, P) and np.trace(P) == pytest.approx(2)


def test_qp():
    W, c = np.diag([2.0, 4.0]), np.array([-2.0, 4.0])
    y, _ = solve_qp(W, c, None, None)
    assert np.allclose(y, -np.linalg.solve(W, c))
    N = np.ones((3, 1))
    y, _ = solve_qp(np.eye(3), np.zeros(3), N, [3.0])
    assert np.allclose(y, 1.0)


def test_qp_kkt(rng):
    M = rng.standard_normal((4, 4))
    W = M @ M.T + 4 * np.eye(4)
    c, N, d = rng.standard_normal(4), rng.standard_normal((4, 1)), np.array([0.7])
    y, lam = solve_qp(W, c, N, d)
    assert np.abs(W @ y + c - N @ lam).max() <= 1e-10
    assert abs((N.T @ y - d)[0]) <= 1e-10


def test_inverse_via_r(B3, rng):
    R = qr(B3).R
    assert np.allclose(apply_inverse_via_r(np.eye(3), np.eye(3), [1.0, 2, 3]), [1, 2, 3])
    assert np.abs(apply_inverse_via_r(B3, R, B3 @ np.ones(3)) - 1).max() <= 1e-10
    A, x = rng.standard_normal((6, 6)), rng.standard_normal(6)
    assert np.abs(apply_inverse_via_r(A, qr(A).R, x) - solve(A, x)).max() <= 1e-9
