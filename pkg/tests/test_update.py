from fractions import Fraction as Fr

import numpy as np
import pytest

from sparsela.update import (
    BartelsGolubBasis, DivergentSeries, SaundersBasis, SingularUpdate, modification_series,
    replace_column_inverse, sherman_morrison,
)

A2 = np.array([[Fr(1), Fr(0)], [Fr(2), Fr(1)]], dtype=object)
V2 = np.array([[Fr(1), Fr(0)], [Fr(-2), Fr(1)]], dtype=object)


def frs(*v):
    return np.array([Fr(x) for x in v], dtype=object)


def random_basis(rng, n, density=0.15):
    M = (rng.random((n, n)) < density) * rng.uniform(-1, 1, (n, n))
    return M + np.diag(rng.uniform(1, 2, n))


def random_column(rng, n, s, density=0.15):
    a = (rng.random(n) < density) * rng.uniform(-1, 1, n)
    a[s - 1] += rng.uniform(1, 2)
    return a


def test_sherman_morrison_example():
    out = sherman_morrison(V2, frs(1, 2), frs(3, 4), 1)
    assert out.tolist() == [[Fr(9, 4), -1], [-2, 1]]


def test_sherman_morrison_zero_u():
    assert (sherman_morrison(V2, frs(0, 0), frs(3, 4)) == V2).all()


def test_sherman_morrison_random(rng):
    A = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    u, w = rng.standard_normal(6), rng.standard_normal(6)
    out = sherman_morrison(np.linalg.inv(A), u, w, 0.3)
    assert np.abs(out - np.linalg.inv(A + 0.3 * np.outer(u, w))).max() <= 1e-10


def test_sherman_morrison_singular():
    with pytest.raises(SingularUpdate):
        sherman_morrison(np.eye(2), [1.0, 0.0], [-1.0, 0.0])


def test_replace_column_example():
    assert replace_column_inverse(V2, frs(1, 3), 2).tolist() == [[3, -1], [-2, 1]]


def test_replace_column_with_itself():
    assert (replace_column_inverse(V2, A2[:, 1], 2) == V2).all()


def test_replace_column_random(rng):
    A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    a = rng.standard_normal(5)
    a[2] += 5
    Ah = A.copy()
    Ah[:, 2] = a
    assert np.abs(Ah @ replace_column_inverse(np.linalg.inv(A), a, 3) - np.eye(5)).max() <= 1e-11


def test_series_cases(rng):
    A = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    V = np.linalg.inv(A)
    assert np.allclose(modification_series(V, np.zeros((6, 6)), 0.5), V)
    u, w = rng.standard_normal(6), rng.standard_normal(6)
    s = modification_series(V, np.outer(u, w), 0.01)
    assert np.abs(s - sherman_morrison(V, u, w, 0.01)).max() <= 1e-8
    with pytest.raises(DivergentSeries):
        modification_series(np.eye(2), np.eye(2), 2.0)


@pytest.mark.parametrize("cls", [BartelsGolubBasis, SaundersBasis])
def test_replace_with_itself(cls, rng):
    B = random_basis(rng, 8)
    bas = cls(B)
    b = rng.standard_normal(8)
    x0 = bas.solve(b)
    bas.replace(3, B[:, 2].copy())
    assert np.abs(bas.solve(b) - x0).max() <= 1e-12


@pytest.mark.parametrize("cls", [BartelsGolubBasis, SaundersBasis])
def test_one_update_matches_refactorization(cls, rng):
    B = random_basis(rng, 5, 0.5)
    bas = cls(B)
    a = random_column(rng, 5, 2, 0.5)
    bas.replace(2, a)
    B2 = B.copy()
    B2[:, 1] = a
    b = rng.standard_normal(5)
    assert np.abs(bas.solve(b) - np.linalg.solve(B2, b)).max() <= 1e-10


@pytest.mark.parametrize("cls", [BartelsGolubBasis, SaundersBasis])
def test_twenty_updates(cls, rng):
    n = 30
    bas = cls(random_basis(rng, n))
    for _ in range(20):
        s = int(rng.integers(1, n + 1))
        bas.replace(s, random_column(rng, n, s))
        b = rng.standard_normal(n)
        x = bas._solve(b)
        assert np.abs(bas.B @ x - b).max() <= 1e-8


def test_bartels_golub_multipliers_bounded(rng):
    bas = BartelsGolubBasis(random_basis(rng, 20, 0.3))
    for _ in range(15):
        s = int(rng.integers(1, 21))
        bas.replace(s, random_column(rng, 20, s, 0.3))
    assert bas.multipliers and max(abs(m) for m in bas.multipliers) <= 1


def test_saunders_kernel_rule(rng):
    bas = SaundersBasis(random_basis(rng, 30))
    for _ in range(20):
        s = int(rng.integers(1, 31))
        bas.replace(s, random_column(rng, 30, s))
    assert len(bas.kernel_history) == 20
    for before, after, was_spike in bas.kernel_history:
        assert after - before == (0 if was_spike else 1)


def test_saunders_kernel_pattern_example():
    D = {c: (c, 2.0) for c in (1, 2, 3, 5, 6, 7, 9)}
    E = {2: {4: 0.5}, 3: {4: 0.5}, 7: {10: 0.5}, 9: {4: 0.5, 8: 0.5}}
    K = [[2, 0, 0], [0, 2, 0.5], [0, 0, 2]]
    bas = SaundersBasis.from_parts(10, D, E, K, [4, 8, 10], [4, 8, 10])
    a = np.zeros(10)
    a[[0, 6, 3, 9]] = 1
    bas.replace(3, a)
    snap = bas.last_kernel
    assert snap.rows == [4, 8, 10, 3] and snap.cols == [4, 8, 10, 3]
    assert snap.pattern.astype(int).tolist() == [[1, 0, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 0]]
    assert bas.kernel_history == [(3, 4, False)]
    assert np.abs(bas.B @ bas.solve(np.ones(10)) - 1).max() <= 1e-12


@pytest.mark.parametrize("cls", [BartelsGolubBasis, SaundersBasis])
def test_reinversion(cls, rng):
    bas = cls(random_basis(rng, 12))
    b = rng.standard_normal(12)
    assert np.allclose(bas.solve(b), np.linalg.solve(bas.B, b))
    for _ in range(10):
        s = int(rng.integers(1, 13))
        bas.replace(s, random_column(rng, 12, s))
    before = bas.solve(b)
    bas.reinvert()
    assert bas.updates == 0
    assert np.abs(bas.solve(b) - before).max() <= 1e-9


def test_periodic_reinversion(rng):
    bas = BartelsGolubBasis(random_basis(rng, 6), reinvert_every=3)
    for k in range(7):
        s = k % 6 + 1
        bas.replace(s, random_column(rng, 6, s))
    assert bas.reinversions == 2 and bas.updates == 1
