import numpy as np
import pytest

from sparsela.fpscale import FPSystem
from sparsela.lufact import factor_gauss
from sparsela.matcore import binomial, hilbert
from sparsela.stability import (
    PerturbationTooLarge, backward_error, cond, inverse, norm, norm2, norm_report, observed_ratio,
    perturbation_bound, spf_doolittle_solve, wilkinson_bound,
)

DA = np.array([[0, 0.01, -0.01], [0, 0.01, 0], [0, 0.01, -0.01]])
DB = np.array([0, -0.01, 0])


def test_binomial_norms(B3):
    assert norm(B3, 1)[0] == 6
    assert norm(B3, "inf")[0] == 7
    assert norm(np.eye(4), 1)[0] == norm(np.eye(4), "inf")[0] == 1


def test_witnesses_attain_norm(rng):
    for _ in range(20):
        A = rng.standard_normal((5, 4))
        for p, vp in ((1, 1), ("inf", np.inf)):
            val, w = norm(A, p)
            assert np.linalg.norm(A @ w, vp) == pytest.approx(val * np.linalg.norm(w, vp))


def test_two_norm_between(rng):
    A = rng.standard_normal((6, 6))
    assert norm2(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
    assert norm2(A) ** 2 <= norm(A, 1)[0] * norm(A, "inf")[0] + 1e-9


def test_binomial_condition(B3):
    assert cond(B3, 1) == pytest.approx(48, abs=1e-12)
    assert cond(B3, "inf") == pytest.approx(49, abs=1e-12)
    assert cond(np.eye(3)) == 1


def test_hilbert_condition_closed_form():
    H = hilbert(2)
    Hinv = np.array([[4.0, -6.0], [-6.0, 12.0]])
    assert np.allclose(inverse(H), Hinv)
    assert cond(H, 1) == pytest.approx(1.5 * 18)


def test_report_rows(B3):
    rep = norm_report(B3)
    names = [k for k, _ in rep.rows()]
    assert names[:3] == ["norm1", "norminf", "norm2"]
    assert rep.cond1 == pytest.approx(48)


def test_perturbation_example(B3):
    b = B3 @ np.ones(3)
    bound = perturbation_bound(B3, 0.03, 0.01, 7.0, p="inf")
    assert bound == pytest.approx(0.35, abs=0.005)
    ratio, xp = observed_ratio(B3, DA, b, DB, "inf")
    assert ratio <= bound
    assert np.allclose(xp, [1.0622, 0.9388, 1.0408], atol=5e-5)


def test_zero_perturbation_bound(B3):
    assert perturbation_bound(B3, 0.0, 0.0, 7.0) == 0


def test_perturbation_too_large(B3):
    with pytest.raises(PerturbationTooLarge):
        perturbation_bound(B3, 1.0, 0.0, 7.0)


def test_random_perturbations_within_bound(rng):
    for _ in range(50):
        A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
        b = rng.standard_normal(5)
        dA = 1e-3 * rng.standard_normal((5, 5))
        db = 1e-3 * rng.standard_normal(5)
        ratio, _ = observed_ratio(A, dA, b, db, 1)
        bound = perturbation_bound(A, norm(dA, 1)[0], np.abs(db).sum(), np.abs(b).sum(), p=1)
        assert ratio <= bound


def test_wilkinson_bound_form():
    assert wilkinson_bound(1, 2.0, 0.5) == 3 * 2.0 * 0.5
    lead = lambda n: wilkinson_bound(n, 1.0, 1.0) - 1.0
    assert lead(20) == 2 * lead(10)


def test_simulated_factorization_backward_error():
    A = binomial(8)
    b = A @ np.ones(8)
    sys = FPSystem(10, 6)
    x, g = spf_doolittle_solve(A, b, sys)
    err = backward_error(A, x, b)
    assert err <= wilkinson_bound(8, g, float(sys.u))
    # forward error is governed by the conditioning
    # x̃ − x = −A⁻¹ δA x̃ with the minimal δA
    assert np.abs(x - 1).max() <= norm(inverse(A), "inf")[0] * err * np.abs(x).max() * (1 + 1e-9)


def test_backward_error_is_attained(rng):
    A, x = rng.standard_normal((5, 5)), rng.standard_normal(5)
    b = rng.standard_normal(5)
    k = int(np.argmax(np.abs(x)))
    dA = np.outer(b - A @ x, np.eye(5)[k]) / x[k]
    assert np.allclose((A + dA) @ x, b)
    assert norm(dA, "inf")[0] == pytest.approx(backward_error(A, x, b))


def test_growth_recorded(rng):
    A = rng.standard_normal((6, 6))
    F = factor_gauss(A)
    assert F.growth == pytest.approx(np.abs(F.U).max())
