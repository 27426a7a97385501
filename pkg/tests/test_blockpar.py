import numpy as np
import pytest

from blocked_cases import run_update, update_instance
from sparsela.blockpar import (
    CASES, BlockAngular, bch, bch_bound, bup, bup_bound, classify, column_triangle_reduce,
    comm_factor, gram_residual, hessenberg_to_triangular, is_upper_blocked, partial_cholesky,
    partial_inverse_transform, random_block_angular,
)


def spd(rng, n):
    M = rng.standard_normal((n, n))
    return M @ M.T + n * np.eye(n)


def test_partial_cholesky_without_coupling(rng):
    F = spd(rng, 4)
    V, W, Z, _ = partial_cholesky(F)
    assert np.allclose(V, np.linalg.cholesky(F).T)
    assert W.shape == (4, 0) and Z.shape == (0, 0)


def test_partial_cholesky_unit_pivots(rng):
    G = rng.standard_normal((3, 2))
    V, W, Z, _ = partial_cholesky(np.eye(3), G)
    assert np.allclose(V, np.eye(3)) and np.allclose(W, G) and np.allclose(Z, -G.T @ G)


def test_partial_cholesky_reassembly(rng):
    F, G = spd(rng, 5), rng.standard_normal((5, 3))
    V, W, Z, _ = partial_cholesky(F, G)
    assert np.abs(V.T @ V - F).max() <= 1e-10
    assert np.abs(V.T @ W - G).max() <= 1e-10
    assert np.abs(Z + W.T @ W).max() <= 1e-10


def test_partial_inverse_transform(rng):
    y1, y2 = rng.standard_normal(3), rng.standard_normal(2)
    V = np.triu(rng.standard_normal((3, 3))) + 3 * np.eye(3)
    u1, u2, _ = partial_inverse_transform(V, np.zeros((3, 2)), y1, y2)
    assert np.allclose(V.T @ u1, y1) and np.allclose(u2, y2)
    W = rng.standard_normal((3, 2))
    u1, u2, _ = partial_inverse_transform(np.eye(3), W, y1, y2)
    assert np.allclose(u1, y1) and np.allclose(u2, y2 - W.T @ y1)
    u1, u2, _ = partial_inverse_transform(V, W, y1, y2)
    M = np.block([[V, W], [np.zeros((2, 3)), np.eye(2)]])
    assert np.abs(M.T @ np.concatenate([u1, u2]) - np.concatenate([y1, y2])).max() <= 1e-11


def test_hessenberg_reduction():
    V = np.triu(np.ones((3, 3))) * 2.0
    before = V.copy()
    hessenberg_to_triangular(V)
    assert np.allclose(np.abs(V), np.abs(before))
    H = np.ones((2, 2))
    norms = np.linalg.norm(H, axis=0)
    hessenberg_to_triangular(H)
    assert H[1, 0] == 0 and np.allclose(np.linalg.norm(H, axis=0), norms)


def test_column_triangle_reduce(rng):
    u = rng.standard_normal(5)
    nrm = np.linalg.norm(u)
    V = np.triu(rng.standard_normal((5, 5)))
    column_triangle_reduce(u, V)
    assert abs(abs(u[0]) - nrm) <= 1e-12 and np.abs(u[1:]).max() <= 1e-12
    assert not np.tril(V, -2).any()


def test_comm_factor():
    assert comm_factor(4) == 4
    assert comm_factor(4, "parallel") == 2 and comm_factor(1, "parallel") == 1


def test_bch_single_block(rng):
    A = random_block_angular(rng, 1, 6)
    U, _ = bch(A)
    M = A.assemble()
    assert np.abs(U.assemble() - np.linalg.cholesky(M.T @ M).T).max() <= 1e-9


def test_bch_three_blocks(rng):
    A = random_block_angular(rng, 3, 8)
    U, _ = bch(A)
    assert gram_residual(A, U) <= 1e-9
    assert is_upper_blocked(U)


def test_bch_ledger_within_bounds(rng):
    for _ in range(20):
        h, d = int(rng.integers(1, 5)), int(rng.integers(2, 17))
        A = random_block_angular(rng, h, d)
        for regime in ("serial", "parallel"):
            _, led = bch(A, regime)
            ptime, inc = bch_bound(A.dbmax, h, regime)
            assert led.ptime <= ptime and led.inc <= inc


def test_bch_unfused_sends_more(rng):
    A = random_block_angular(rng, 3, 6)
    assert bch(A, fused=False)[1].inc > bch(A)[1].inc
    assert gram_residual(A, bch(A, fused=False)[0]) <= 1e-9


def test_ledger_csv(rng):
    _, led = bch(random_block_angular(rng, 2, 4))
    lines = led.to_csv().strip().splitlines()
    assert lines[0] == "step,ptime,inc"
    assert len(lines) == len(led.steps) + 2
    assert lines[-1] == f"total,{led.ptime},{led.inc}"


def test_classify():
    assert [classify(1, 2, 3), classify(2, 2, 3), classify(1, 4, 3), classify(4, 1, 3), classify(4, 4, 3)] == list(CASES)


def test_case_v_same_column_is_a_no_op(rng):
    A = random_block_angular(rng, 2, 6)
    U, _ = bch(A)
    b = rng.standard_normal(int(A.row_offsets()[-1]))
    before = np.linalg.lstsq(A.assemble(), b, rcond=None)[0]
    col = A.assemble()[:, -1].copy()
    bup(A, U, col, 3, 3, A.n0)
    Ud = U.assemble()
    M = A.assemble()
    assert gram_residual(A, U) <= 1e-10
    x = np.linalg.solve(Ud, np.linalg.solve(Ud.T, M.T @ b))
    assert np.abs(x - before).max() <= 1e-10


@pytest.mark.parametrize("case", CASES)
def test_update_cases(case, rng):
    for _ in range(10):
        A, U, got, led = run_update(rng, case)
        assert got == case
        assert gram_residual(A, U) <= 1e-8
        assert is_upper_blocked(U, 1e-12)
        ptime, _ = bup_bound(case, A.dbmax, A.h)
        assert led.ptime <= ptime


def test_wrong_column_length(rng):
    A, U, a, ink, outk, outj = update_instance(rng, "II")
    with pytest.raises(ValueError):
        bup(A, U, a[:-1], ink, outk, outj)
