"""Simulated normalized floating point (exact rational arithmetic), rounded
dot products, exponent statistics and matrix equilibration by powers of
the base."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class FPOverflow(OverflowError):
    pass


def exact(v) -> Fraction:
    """Exact rational value.  Floats are read through their shortest
    decimal repr, so ``exact(0.38) == Fraction(38, 100)``."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(repr(float(v)))


def round_half_away(x) -> int:
    x = exact(x)
    r = math.floor(abs(x) + Fraction(1, 2))
    return r if x >= 0 else -r


@dataclass(frozen=True)
class FPSystem:
    base: int = 10
    digits: int = 2
    mode: str = "rounding"
    emax: int | None = None

    def __post_init__(self):
        if self.base < 2 or self.digits < 1:
            raise ValueError("base >= 2 and digits >= 1 required")
        if self.mode not in ("rounding", "truncation"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def u(self) -> Fraction:
        unit = Fraction(self.base) ** (1 - self.digits)
        return unit / 2 if self.mode == "rounding" else unit

    def double(self) -> "FPSystem":
        return FPSystem(self.base, 2 * self.digits, self.mode, self.emax)

    def exponent(self, x) -> int:
        return exponent(x, self.base)

    def fl(self, x) -> Fraction:
        return fl(x, self)


def exponent(x, base=10) -> int:
    """Unique e with base^(e-1) <= |x| < base^e."""
    x = abs(exact(x))
    if x == 0:
        raise ValueError("zero has no normalized exponent")
    b = Fraction(base)
    e = math.floor(math.log(float(x), base)) + 1 if float(x) > 0 else 0
    # correct any floating-point slip in the logarithm
    while b ** (e - 1) > x:
        e -= 1
    while x >= b ** e:
        e += 1
    return e


def mantissa(x, base=10) -> Fraction:
    x = exact(x)
    return x / Fraction(base) ** exponent(x, base)


def fl(x, sys: FPSystem) -> Fraction:
    x = exact(x)
    if x == 0:
        return Fraction(0)
    b = Fraction(sys.base)
    e = exponent(x, sys.base)
    scale = b ** (e - sys.digits)
    m = abs(x) / scale  # in [b^(t-1), b^t)
    k = math.floor(m + Fraction(1, 2)) if sys.mode == "rounding" else math.floor(m)
    if k == sys.base ** sys.digits:
        e += 1
    if sys.emax is not None and abs(e) > sys.emax:
        raise FPOverflow(f"exponent {e} outside [-{sys.emax}, {sys.emax}]")
    v = k * scale
    return v if x > 0 else -v


def fld(x, sys: FPSystem) -> Fraction:
    return fl(x, sys.double())


def dot_fl(x, y, sys: FPSystem) -> Fraction:
    """fl(fl(x_n y_n) + fl(... + fl(fl(x_2 y_2) + fl(x_1 y_1)))), every
    product and partial sum rounded to t digits, i = 1 upward."""
    s = None
    for a, b in zip(x, y):
        p = fl(exact(a) * exact(b), sys)
        s = p if s is None else fl(p + s, sys)
    return s if s is not None else Fraction(0)


def dot_fld(x, y, sys: FPSystem) -> Fraction:
    """Same nesting in 2t digits; products of t-digit numbers are exact."""
    d = sys.double()
    s = None
    for a, b in zip(x, y):
        p = exact(a) * exact(b)
        s = fl(p, d) if s is None else fl(p + s, d)
    return s if s is not None else Fraction(0)


def fl_of_fld(x, y, sys: FPSystem) -> Fraction:
    return fl(dot_fld(x, y, sys), sys)


def dot_error_bound(x, y, sys: FPSystem) -> Fraction:
    """Σ |x_i y_i| (1 + α)(n − i + 2) u with α = (n + 1) u."""
    n = len(x)
    u = sys.u
    alpha = (n + 1) * u
    return sum((abs(exact(a) * exact(b)) * (1 + alpha) * (n - i + 2) * u
                for i, (a, b) in enumerate(zip(x, y), start=1)), Fraction(0))


def random_representable(rng, sys: FPSystem, size, emin=-3, emax=3):
    """Random exactly representable numbers of the system."""
    out = []
    for _ in range(size):
        k = int(rng.integers(sys.base ** (sys.digits - 1), sys.base ** sys.digits))
        e = int(rng.integers(emin, emax + 1))
        sign = -1 if rng.random() < 0.5 else 1
        out.append(sign * Fraction(k) * Fraction(sys.base) ** (e - sys.digits))
    return out


@dataclass
class ExpoStats:
    mex: Fraction
    vex: Fraction  # mean of squared deviations
    vex_sum: Fraction  # sum of squared deviations
    diam: int
    enn: int

    def row(self):
        return [float(self.mex), float(self.vex), float(self.vex_sum), self.diam]


def exponent_grid(A, base=10):
    """Exponents of the nonzeros; zeros map to None."""
    A = np.asarray(A, dtype=object)
    return [[None if exact(v) == 0 else exponent(v, base) for v in row] for row in A]


def stats_from_grid(grid) -> ExpoStats:
    vals = [e for row in grid for e in row if e is not None]
    if not vals:
        raise ValueError("matrix has no nonzero entries")
    n = len(vals)
    mex = Fraction(sum(vals), n)
    ss = sum((Fraction(e) - mex) ** 2 for e in vals)
    return ExpoStats(mex, ss / n, ss, max(vals) - min(vals), n)


def expo_stats(A, sys: FPSystem | None = None) -> ExpoStats:
    base = sys.base if sys else 10
    return stats_from_grid(exponent_grid(A, base))


@dataclass
class Scaling:
    e: list  # row exponents
    d: list  # column exponents
    method: str
    base: int = 10

    def apply_grid(self, grid):
        return [[None if g is None else g + self.e[i] + self.d[j] for j, g in enumerate(row)]
                for i, row in enumerate(grid)]

    def apply(self, A):
        """E A D with exact powers of the base."""
        A = np.asarray(A, dtype=object)
        b = Fraction(self.base)
        out = np.empty(A.shape, dtype=object)
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                out[i, j] = exact(A[i, j]) * b ** (self.e[i] + self.d[j])
        return out


METHODS = ("var_reduce", "geo_mean", "maxmin", "infnorm")


def scale(A, method="maxmin", sys: FPSystem | None = None) -> Scaling:
    base = sys.base if sys else 10
    G = exponent_grid(A, base)
    m, n = len(G), len(G[0])
    for i in range(m):
        if all(g is None for g in G[i]):
            raise ValueError(f"row {i + 1} is empty")
    for j in range(n):
        if all(G[i][j] is None for i in range(m)):
            raise ValueError(f"column {j + 1} is empty")

    def col(j, shift=None):
        return [G[i][j] + (shift[i] if shift else 0) for i in range(m) if G[i][j] is not None]

    def row(i, shift=None):
        return [G[i][j] + (shift[j] if shift else 0) for j in range(n) if G[i][j] is not None]

    if method == "var_reduce":
        # dense approximation: the missing exponents enter as 0
        mex = stats_from_grid(G).mex
        e = [round_half_away(sum(mex - (g or 0) for g in G[i]) / n) for i in range(m)]
        d = [round_half_away(sum(mex - (G[i][j] or 0) for i in range(m)) / m) for j in range(n)]
    elif method == "geo_mean":
        d = [-round_half_away(Fraction(sum(c), len(c))) for c in (col(j) for j in range(n))]
        e = [-round_half_away(Fraction(sum(r), len(r))) for r in (row(i, d) for i in range(m))]
    elif method == "maxmin":
        d = [-round_half_away(Fraction(max(c) + min(c), 2)) for c in (col(j) for j in range(n))]
        e = [-round_half_away(Fraction(max(r) + min(r), 2)) for r in (row(i, d) for i in range(m))]
    elif method == "infnorm":
        d = [-max(col(j)) for j in range(n)]
        e = [-max(row(i, d)) for i in range(m)]
    else:
        raise ValueError(f"unknown scaling method {method!r}")
    return Scaling(e, d, method, base)


def scaled_stats(A, method, sys: FPSystem | None = None):
    base = sys.base if sys else 10
    s = scale(A, method, sys)
    return s, stats_from_grid(s.apply_grid(exponent_grid(A, base)))


EXAMPLE_MATRIX = [
    ["0.1", "0.7E-4", "0.5E-1", "0.9", "-0.2E2"],
    ["0", "0", "0.3E-1", "0", "0.3E4"],
    ["0.1", "-0.8E-3", "0", "0", "0.3E6"],
    ["0", "0.3E-1", "-0.8", "0.1E3", "0.7E9"],
]


def example_matrix():
    """The 4×5 equilibration test matrix (entries printed as 1 carry
    exponent 0 in the worked grid, i.e. they are 0.1 here)."""
    return np.array([[exact(v) for v in r] for r in EXAMPLE_MATRIX], dtype=object)
