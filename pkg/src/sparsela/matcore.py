"""Matrix data model.

Dense matrices are plain numpy arrays. Sparse matrices come in four
representations that all expose the same triplet view:

* ``StaticRows``   packed values, column indices and row end pointers
* ``StaticCols``   the transposed layout (values, row indices, column ends)
* ``LinkedRows``   one singly linked chain of cells per row
* ``Network``      cells linked both along rows and along columns

All indices at the API boundary are 1-based.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

REPRESENTATIONS = ("rows", "cols", "linked", "network")


class FormatError(ValueError):
    """Raised for malformed sparse input (bad header, bounds, duplicates)."""


def _check_triplets(m, n, triplets):
    seen = set()
    for i, j, _ in triplets:
        if not (1 <= i <= m and 1 <= j <= n):
            raise FormatError(f"index ({i},{j}) outside {m}x{n}")
        if (i, j) in seen:
            raise FormatError(f"duplicate entry ({i},{j})")
        seen.add((i, j))


class SparseMat:
    """Common interface of the four representations."""

    kind = "abstract"

    def __init__(self, m: int, n: int):
        if m < 1 or n < 1:
            raise ValueError("matrix dimensions must be positive")
        self.m = m
        self.n = n

    @property
    def shape(self):
        return (self.m, self.n)

    def triplets(self) -> list:
        """Sorted list of (i, j, value), row-major, 1-based."""
        raise NotImplementedError

    def enn(self) -> int:
        return len(self.triplets())

    def to_dense(self, dtype=float) -> np.ndarray:
        A = np.zeros((self.m, self.n), dtype=dtype)
        for i, j, v in self.triplets():
            A[i - 1, j - 1] = v
        return A

    def pattern(self) -> np.ndarray:
        B = np.zeros((self.m, self.n), dtype=bool)
        for i, j, v in self.triplets():
            if v != 0:
                B[i - 1, j - 1] = True
        return B

    def __repr__(self):
        return f"{type(self).__name__}({self.m}x{self.n}, enn={self.enn()})"


class StaticRows(SparseMat):
    """Static row storage: ``aias`` values, ``aijs`` column indices and
    ``aif`` where ``aif[i-1]`` is the (1-based) position of the last entry
    of row i.  Row i occupies positions ``aif[i-2]+1 .. aif[i-1]``."""

    kind = "rows"

    def __init__(self, m, n, values, minor, ends):
        super().__init__(m, n)
        self.values = list(values)
        self.minor = [int(k) for k in minor]
        self.ends = [int(k) for k in ends]
        if len(self.ends) != self._major_count():
            raise FormatError("one end pointer per major index is required")
        prev = 0
        for e in self.ends:
            if e < prev:
                raise FormatError("end pointers must be nondecreasing")
            seg = self.minor[prev:e]
            if any(a >= b for a, b in zip(seg, seg[1:])):
                raise FormatError("minor indices must increase inside a segment")
            prev = e
        if prev != len(self.values):
            raise FormatError("last end pointer must equal the stored count")

    def _major_count(self):
        return self.m

    # textbook-style names
    @property
    def aias(self):
        return self.values

    @property
    def aijs(self):
        return self.minor

    @property
    def aif(self):
        return self.ends

    def segment(self, k):
        start = self.ends[k - 2] if k > 1 else 0
        return range(start, self.ends[k - 1])

    def triplets(self):
        out = []
        for i in range(1, self.m + 1):
            for pos in self.segment(i):
                out.append((i, self.minor[pos], self.values[pos]))
        return out

    def compact(self):
        """Drop explicitly stored zeros (those produced by cancellation)."""
        return type(self).from_triplets(
            self.m, self.n, [t for t in self.triplets() if t[2] != 0]
        )

    @classmethod
    def from_triplets(cls, m, n, triplets):
        triplets = list(triplets)
        _check_triplets(m, n, triplets)
        ordered = sorted(triplets, key=lambda t: (t[0], t[1]))
        ends, values, minor = [], [], []
        k = 0
        for i in range(1, m + 1):
            while k < len(ordered) and ordered[k][0] == i:
                values.append(ordered[k][2])
                minor.append(ordered[k][1])
                k += 1
            ends.append(len(values))
        return cls(m, n, values, minor, ends)


class StaticCols(StaticRows):
    """Static column storage (``ajas``, ``ajis``, ``ajf``)."""

    kind = "cols"

    def _major_count(self):
        return self.n

    @property
    def ajas(self):
        return self.values

    @property
    def ajis(self):
        return self.minor

    @property
    def ajf(self):
        return self.ends

    def triplets(self):
        out = []
        for j in range(1, self.n + 1):
            for pos in self.segment(j):
                out.append((self.minor[pos], j, self.values[pos]))
        return sorted(out, key=lambda t: (t[0], t[1]))

    @classmethod
    def from_triplets(cls, m, n, triplets):
        triplets = list(triplets)
        _check_triplets(m, n, triplets)
        ordered = sorted(triplets, key=lambda t: (t[1], t[0]))
        ends, values, minor = [], [], []
        k = 0
        for j in range(1, n + 1):
            while k < len(ordered) and ordered[k][1] == j:
                values.append(ordered[k][2])
                minor.append(ordered[k][0])
                k += 1
            ends.append(len(values))
        return cls(m, n, values, minor, ends)


NIL = -1


class LinkedRows(SparseMat):
    """Row-linked list: each cell holds (col, value, next cell in the row)."""

    kind = "linked"

    def __init__(self, m, n):
        super().__init__(m, n)
        self.col: list[int] = []
        self.val: list = []
        self.nxt: list[int] = []
        self.head = [NIL] * (m + 1)  # slot 0 unused

    def _new_cell(self, j, v):
        self.col.append(j)
        self.val.append(v)
        self.nxt.append(NIL)
        return len(self.col) - 1

    def row(self, i):
        c = self.head[i]
        while c != NIL:
            yield self.col[c], self.val[c]
            c = self.nxt[c]

    def triplets(self):
        return [(i, j, v) for i in range(1, self.m + 1) for j, v in self.row(i)]

    @classmethod
    def from_triplets(cls, m, n, triplets):
        triplets = list(triplets)
        _check_triplets(m, n, triplets)
        A = cls(m, n)
        # insert in reverse so that each chain ends up sorted by column
        for i, j, v in sorted(triplets, key=lambda t: (t[0], t[1]), reverse=True):
            c = A._new_cell(j, v)
            A.nxt[c] = A.head[i]
            A.head[i] = c
        return A


class Network(SparseMat):
    """Network (orthogonal list) storage.

    Every cell carries its row, column, value and two links: the next cell
    in the same row and the next cell in the same column.  ``row_head`` and
    ``col_head`` anchor the chains; chains are sorted by the minor index.
    Cells removed by cancellation go to a free list.
    """

    kind = "network"

    def __init__(self, m, n):
        super().__init__(m, n)
        self.r: list[int] = []
        self.c: list[int] = []
        self.v: list = []
        self.next_in_row: list[int] = []
        self.next_in_col: list[int] = []
        self.row_head = [NIL] * (m + 1)
        self.col_head = [NIL] * (n + 1)
        self._free: list[int] = []

    def _alloc(self, i, j, v):
        if self._free:
            k = self._free.pop()
            self.r[k], self.c[k], self.v[k] = i, j, v
            self.next_in_row[k] = self.next_in_col[k] = NIL
            return k
        self.r.append(i)
        self.c.append(j)
        self.v.append(v)
        self.next_in_row.append(NIL)
        self.next_in_col.append(NIL)
        return len(self.r) - 1

    def row_cells(self, i):
        k = self.row_head[i]
        while k != NIL:
            yield k
            k = self.next_in_row[k]

    def col_cells(self, j):
        k = self.col_head[j]
        while k != NIL:
            yield k
            k = self.next_in_col[k]

    def row(self, i):
        return [(self.c[k], self.v[k]) for k in self.row_cells(i)]

    def col(self, j):
        return [(self.r[k], self.v[k]) for k in self.col_cells(j)]

    def triplets(self):
        return [(i, self.c[k], self.v[k]) for i in range(1, self.m + 1) for k in self.row_cells(i)]

    def _link_col(self, k):
        j, i = self.c[k], self.r[k]
        prev, cur = NIL, self.col_head[j]
        while cur != NIL and self.r[cur] < i:
            prev, cur = cur, self.next_in_col[cur]
        self.next_in_col[k] = cur
        if prev == NIL:
            self.col_head[j] = k
        else:
            self.next_in_col[prev] = k

    def _unlink_col(self, k):
        j = self.c[k]
        prev, cur = NIL, self.col_head[j]
        while cur != k:
            prev, cur = cur, self.next_in_col[cur]
        if prev == NIL:
            self.col_head[j] = self.next_in_col[k]
        else:
            self.next_in_col[prev] = self.next_in_col[k]

    def set_row(self, i, entries: dict):
        """Replace row i by ``entries`` (col -> value); zeros are not stored."""
        for k in list(self.row_cells(i)):
            self._unlink_col(k)
            self._free.append(k)
        self.row_head[i] = NIL
        last = NIL
        for j in sorted(entries):
            if entries[j] == 0:
                continue
            k = self._alloc(i, j, entries[j])
            if last == NIL:
                self.row_head[i] = k
            else:
                self.next_in_row[last] = k
            last = k
            self._link_col(k)

    @classmethod
    def from_triplets(cls, m, n, triplets):
        triplets = list(triplets)
        _check_triplets(m, n, triplets)
        A = cls(m, n)
        rows: dict[int, dict] = {}
        for i, j, v in triplets:
            rows.setdefault(i, {})[j] = v
        for i in sorted(rows):
            # keep explicit zeros given by the caller, but never create new ones
            last = NIL
            for j in sorted(rows[i]):
                k = A._alloc(i, j, rows[i][j])
                if last == NIL:
                    A.row_head[i] = k
                else:
                    A.next_in_row[last] = k
                last = k
                A._link_col(k)
        return A


_CLASSES = {"rows": StaticRows, "cols": StaticCols, "linked": LinkedRows, "network": Network}


def from_triplets(m, n, triplets, kind="rows") -> SparseMat:
    return _CLASSES[kind].from_triplets(m, n, triplets)


def from_dense(A, kind="rows") -> SparseMat:
    A = np.asarray(A)
    m, n = A.shape
    trip = [(i + 1, j + 1, A[i, j]) for i in range(m) for j in range(n) if A[i, j] != 0]
    return from_triplets(m, n, trip, kind)


def convert(A: SparseMat, target: str) -> SparseMat:
    """Lossless conversion between the four representations."""
    if target not in _CLASSES:
        raise ValueError(f"unknown representation {target!r}")
    return _CLASSES[target].from_triplets(A.m, A.n, A.triplets())


def as_dense(A, dtype=None) -> np.ndarray:
    if isinstance(A, SparseMat):
        return A.to_dense(dtype or float)
    return np.asarray(A) if dtype is None else np.asarray(A, dtype=dtype)


def pattern(A) -> np.ndarray:
    """Boolean matrix B(A) with B[i, j] true exactly where A is nonzero."""
    if isinstance(A, SparseMat):
        return A.pattern()
    return np.asarray(A) != 0


def enn(A) -> int:
    return int(pattern(A).sum())


# ---------------------------------------------------------------------------
# permutations


class Permutation:
    """Permutation of {1..n} stored as the permuted index vector p.

    ``p[k]`` is the original index placed at position k (1-based values).
    """

    def __init__(self, p: Sequence[int]):
        p = [int(x) for x in p]
        if sorted(p) != list(range(1, len(p) + 1)):
            raise ValueError(f"{p} is not a permutation of 1..{len(p)}")
        self.p = p

    @property
    def n(self):
        return len(self.p)

    @classmethod
    def identity(cls, n):
        return cls(range(1, n + 1))

    @classmethod
    def from_pivots(cls, t: Sequence[int]):
        """Build p from a pivot vector: at step j the row labelled t[j] is
        swapped into position j."""
        order = list(range(1, len(t) + 1))
        for j, label in enumerate(t):
            k = order.index(int(label))
            order[j], order[k] = order[k], order[j]
        return cls(order)

    def pivots(self) -> list[int]:
        # with swap semantics position j is final after step j, so t == p
        order = list(range(1, self.n + 1))
        t = []
        for j in range(self.n):
            t.append(self.p[j])
            k = order.index(self.p[j])
            order[j], order[k] = order[k], order[j]
        return t

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for k, v in enumerate(self.p, start=1):
            inv[v - 1] = k
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """Permutation obtained by applying ``self`` and then ``other``
        (both as left row permutations)."""
        return Permutation([self.p[k - 1] for k in other.p])

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        for k, v in enumerate(self.p):
            P[k, v - 1] = 1.0
        return P

    def index(self) -> np.ndarray:
        return np.array(self.p) - 1

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.p == other.p

    def __repr__(self):
        return f"Permutation({self.p})"


def permute(A, P: Permutation, side="left"):
    """Left: result row i is row p(i) of A.  Right: result column j is
    column q(j) of A.  Works for dense arrays and every sparse kind."""
    m, n = A.shape
    size = m if side == "left" else n
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if P.n != size:
        raise ValueError(f"permutation of size {P.n} does not match dimension {size}")
    if not isinstance(A, SparseMat):
        A = np.asarray(A)
        return A[P.index(), :] if side == "left" else A[:, P.index()]
    inv = P.inverse().p
    if side == "left":
        trip = [(inv[i - 1], j, v) for i, j, v in A.triplets()]
    else:
        trip = [(i, inv[j - 1], v) for i, j, v in A.triplets()]
    return type(A).from_triplets(m, n, trip)


def combine_rows(A: Network, i: int, c, s) -> None:
    """Replace rows i and i+1 in place by ``c*A_i + s*A_{i+1}`` and
    ``c*A_{i+1} - s*A_i``.  Exact zeros from cancellation are dropped."""
    if not isinstance(A, Network):
        raise TypeError("combine_rows needs the network representation")
    if not 1 <= i < A.m:
        raise IndexError(f"row pair ({i},{i + 1}) outside 1..{A.m}")
    top = dict(A.row(i))
    bot = dict(A.row(i + 1))
    new_top, new_bot = {}, {}
    for j in set(top) | set(bot):
        a, b = top.get(j, 0), bot.get(j, 0)
        new_top[j] = c * a + s * b
        new_bot[j] = c * b - s * a
    A.set_row(i, new_top)
    A.set_row(i + 1, new_bot)


# ---------------------------------------------------------------------------
# test matrices


def binomial(n, exact=False):
    from math import comb

    one = Fraction(1) if exact else 1.0
    A = np.zeros((n, n), dtype=object if exact else float)
    for i in range(1, n + 1):
        for j in range(1, i + 2):
            if j <= n:
                A[i - 1, j - 1] = comb(i, j - 1) * one
    if exact:
        A[A == 0] = Fraction(0)
    return A


def hilbert(n, exact=False):
    if exact:
        return np.array([[Fraction(1, i + j - 1) for j in range(1, n + 1)] for i in range(1, n + 1)], dtype=object)
    i = np.arange(1, n + 1)
    return 1.0 / (i[:, None] + i[None, :] - 1)


def tridiagonal(n, exact=False):
    one = Fraction(1) if exact else 1.0
    A = np.full((n, n), 0 * one, dtype=object if exact else float)
    for i in range(n):
        A[i, i] = -2 * one
        if i + 1 < n:
            A[i, i + 1] = A[i + 1, i] = -1 * one
    return A


GENERATORS = {"binomial": binomial, "hilbert": hilbert, "tridiagonal": tridiagonal}


def gen_test(kind: str, n: int, exact=False, sparse_kind="rows"):
    """Test system (A, rhs) with rhs = A·1, so that x = 1 solves it exactly.

    With ``exact=True`` the dense matrix and rhs hold Fractions and the
    matrix is returned dense; otherwise A is sparse of ``sparse_kind``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    try:
        dense = GENERATORS[kind](n, exact=exact)
    except KeyError:
        raise ValueError(f"unknown test matrix kind {kind!r}") from None
    rhs = dense.sum(axis=1)
    if exact:
        return dense, rhs
    return from_dense(dense, sparse_kind), rhs


# ---------------------------------------------------------------------------
# Matrix Market


def write_mm(path, A) -> None:
    if not isinstance(A, SparseMat):
        A = from_dense(A)
    trip = A.triplets()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.m} {A.n} {len(trip)}\n")
        for i, j, v in trip:
            fh.write(f"{i} {j} {float(v)!r}\n")


def read_mm(path, kind="rows") -> SparseMat:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise FormatError("missing %%MatrixMarket header")
    head = lines[0].split()
    if len(head) < 5 or head[1].lower() != "matrix" or head[2].lower() != "coordinate":
        raise FormatError("only 'matrix coordinate' files are supported")
    if head[3].lower() not in ("real", "integer") or head[4].lower() != "general":
        raise FormatError("only real/integer general matrices are supported")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise FormatError("missing size line")
    try:
        m, n, nnz = (int(x) for x in body[0].split())
    except ValueError:
        raise FormatError(f"bad size line {body[0]!r}") from None
    entries = []
    for ln in body[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise FormatError(f"bad entry line {ln!r}")
        entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if len(entries) != nnz:
        raise FormatError(f"header declares {nnz} entries, found {len(entries)}")
    return from_triplets(m, n, entries, kind)


def triplet_set(A: SparseMat) -> set:
    return {(i, j, v) for i, j, v in A.triplets()}


def ones(n) -> np.ndarray:
    return np.ones(n)


def random_sparse(m, n, density, rng, kind="rows", low=-1.0, high=1.0) -> SparseMat:
    mask = rng.random((m, n)) < density
    vals = rng.uniform(low, high, size=(m, n))
    trip = [(i + 1, j + 1, float(vals[i, j])) for i, j in zip(*np.nonzero(mask))]
    return from_triplets(m, n, trip, kind)


def iter_entries(A) -> Iterable:
    if isinstance(A, SparseMat):
        yield from A.triplets()
    else:
        A = np.asarray(A)
        for i, j in zip(*np.nonzero(A)):
            yield int(i) + 1, int(j) + 1, A[i, j]
