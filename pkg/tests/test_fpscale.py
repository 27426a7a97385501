import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from sparsela.fpscale import (
    METHODS, FPOverflow, FPSystem, dot_error_bound, dot_fl, dot_fld, example_matrix, expo_stats,
    exponent, exponent_grid, fl, fl_of_fld, random_representable, round_half_away, scale,
    scaled_stats, stats_from_grid,
)

PI = Fr(math.pi)
X = [7.5, 6.9, 1.3]
Y = [0.38, -0.41, 0.011]
SYS = FPSystem(10, 2)

SCALED = {
    "var_reduce": [[3, 1, 3, 2, 0], [None, None, 1, None, 0], [1, 0, None, None, 2], [None, 1, 1, 2, 4]],
    "geo_mean": [[1, 0, 1, -1, -2], [None, None, 1, None, 0], [0, 0, None, None, 1], [None, 0, -1, -1, 2]],
    "maxmin": [[2, 1, 2, 0, -2], [None, None, 1, None, -1], [0, 0, None, None, 0], [None, 0, -1, -1, 1]],
    "infnorm": [[0, -3, -1, -3, -7], [None, None, 0, None, -4], [0, -2, None, None, -3], [None, 0, 0, 0, 0]],
}


def test_rounding_and_truncation_of_pi():
    assert fl(PI, FPSystem(10, 5)) == Fr(31416, 10000)
    assert fl(PI, FPSystem(10, 5, "truncation")) == Fr(31415, 10000)


def test_representable_unchanged():
    assert fl(Fr(37, 100), SYS) == Fr(37, 100)
    assert fl(-120, SYS) == -120


def test_unit_roundoff():
    assert SYS.u == Fr(1, 20)
    assert FPSystem(2, 24, "truncation").u == Fr(1, 2 ** 23)


def test_carry_into_exponent():
    assert fl(Fr(996, 100), SYS) == 10


def test_overflow():
    with pytest.raises(FPOverflow):
        fl(10 ** 5, FPSystem(10, 2, emax=3))


def test_dot_example():
    assert dot_fl(X, Y, SYS) == Fr(11, 100)
    assert dot_fld(X, Y, SYS) == Fr(353, 10000)
    assert fl_of_fld(X, Y, SYS) == Fr(35, 1000)


def test_dot_with_zero_vector():
    for f in (dot_fl, dot_fld, fl_of_fld):
        assert f(X, [0, 0, 0], SYS) == 0


def test_dot_error_bound_random(rng):
    for _ in range(500):
        sys = FPSystem(10, int(rng.integers(2, 5)))
        n = int(rng.integers(1, 8))
        x, y = random_representable(rng, sys, n), random_representable(rng, sys, n)
        exact = sum(a * b for a, b in zip(x, y))
        assert abs(dot_fl(x, y, sys) - exact) <= dot_error_bound(x, y, sys)


def test_exponent_normalization():
    assert exponent(1) == 1 and exponent(Fr(1, 10)) == 0 and exponent(999) == 3
    assert round_half_away(Fr(-5, 2)) == -3 and round_half_away(Fr(5, 2)) == 3


def test_constant_matrix_stats():
    st = expo_stats(np.full((3, 3), 7.0))
    assert st.vex == 0 and st.diam == 0


def test_example_stats():
    st = expo_stats(example_matrix())
    assert st.mex == 1 and st.diam == 13 and st.vex_sum == 160


def test_stats_recomputed(rng):
    A = rng.choice([0.0, 1.5e-3, 2.0, 7e4, -3e-2], size=(5, 6))
    A[0, 0] = 1.0
    st = expo_stats(A)
    ex = [math.floor(math.log10(abs(v))) + 1 for v in A.ravel() if v]
    assert st.mex == Fr(sum(ex), len(ex))
    assert st.diam == max(ex) - min(ex)


@pytest.mark.parametrize("method", METHODS)
def test_example_scaled_grids(method):
    s, st = scaled_stats(example_matrix(), method)
    assert s.apply_grid(exponent_grid(example_matrix())) == SCALED[method]
    assert st == stats_from_grid(SCALED[method])


def test_example_scaled_values():
    got = {m: scaled_stats(example_matrix(), m)[1] for m in METHODS}
    assert (got["var_reduce"].mex, got["var_reduce"].diam) == (Fr(3, 2), 4)
    assert (got["maxmin"].mex, got["maxmin"].diam) == (Fr(1, 7), 4)
    assert (got["geo_mean"].mex, got["geo_mean"].diam) == (Fr(1, 14), 4)
    assert got["infnorm"].diam == 7


def test_scaling_applies_exact_powers():
    A = example_matrix()
    s = scale(A, "maxmin")
    S = s.apply(A)
    assert exponent_grid(S) == s.apply_grid(exponent_grid(A))


@pytest.mark.parametrize("method", METHODS)
def test_balanced_matrix_needs_no_scaling(method):
    A = np.array([[0.5, 0.3], [0.2, 0.9]])
    s = scale(A, method)
    assert s.e == [0, 0] and s.d == [0, 0]


def test_empty_row_rejected():
    with pytest.raises(ValueError):
        scale(np.array([[1.0, 2.0], [0.0, 0.0]]))
