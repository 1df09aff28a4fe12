"""Exact dense linear algebra over the rationals and prime fields.

Matrices are thin immutable wrappers around numpy arrays.  Over a prime
field the array holds ``int64`` residues in ``[0, p)``; over the rationals
it is an ``object`` array of :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

_INT64_MAX = 2**63 - 1


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Field:
    """The rationals (``p is None``) or the prime field with ``p`` elements."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if not _is_prime(self.p) or self.p >= 2**31:
                raise ValueError(f"characteristic must be a prime below 2**31, got {self.p}")

    @property
    def is_rational(self) -> bool:
        return self.p is None

    @property
    def dtype(self):
        return object if self.p is None else np.int64

    def __repr__(self) -> str:
        return "QQ" if self.p is None else f"GF({self.p})"

    # scalars

    def coerce(self, x):
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in GF({self.p})")
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def inv(self, x):
        if self.p is None:
            return 1 / Fraction(x)
        return pow(int(x), -1, self.p)

    def parse(self, s):
        """Parse a scalar given as ``"a/b"``, ``"a"`` or an int."""
        if isinstance(s, str):
            s = Fraction(s.strip())
        return self.coerce(s)

    def format(self, x) -> str:
        if self.p is None:
            return str(Fraction(x))
        return str(int(x))

    # arrays

    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.p is None:
            return a
        return a % self.p

    def array(self, rows, shape: tuple[int, int] | None = None) -> np.ndarray:
        if shape is not None and shape[0] * shape[1] == 0:
            return np.zeros(shape, dtype=self.dtype) if self.p else self.zeros(*shape)
        data = [[self.coerce(x) for x in row] for row in rows]
        if not data:
            return self.zeros(0, shape[1] if shape else 0)
        a = np.empty((len(data), len(data[0])), dtype=self.dtype)
        for i, row in enumerate(data):
            for j, x in enumerate(row):
                a[i, j] = x
        return a

    def zeros(self, m: int, n: int) -> np.ndarray:
        if self.p is None:
            a = np.empty((m, n), dtype=object)
            a.fill(Fraction(0))
            return a
        return np.zeros((m, n), dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        a = self.zeros(n, n)
        for i in range(n):
            a[i, i] = self.coerce(1)
        return a

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        if self.p is None:
            return _rational_matmul(a, b)
        bound = (self.p - 1) ** 2
        step = max(1, _INT64_MAX // max(bound, 1))
        k = a.shape[1]
        if k <= step:
            return (a @ b) % self.p
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        for s in range(0, k, step):
            out = (out + (a[:, s:s + step] @ b[s:s + step]) % self.p) % self.p
        return out

    def random_array(self, rng: np.random.Generator, m: int, n: int, density: float = 1.0,
                     bound: int = 3) -> np.ndarray:
        """Random entries; small integers over QQ, uniform residues over GF(p)."""
        if self.p is None:
            vals = rng.integers(-bound, bound + 1, size=(m, n))
        else:
            vals = rng.integers(0, self.p, size=(m, n))
        if density < 1.0:
            vals = vals * (rng.random((m, n)) < density)
        if self.p is None:
            a = self.zeros(m, n)
            for i in range(m):
                for j in range(n):
                    if vals[i, j]:
                        a[i, j] = Fraction(int(vals[i, j]))
            return a
        return vals.astype(np.int64)


QQ = Field()


def GF(p: int) -> Field:
    return Field(p)


class Matrix:
    """An immutable matrix over a :class:`Field`."""

    __slots__ = ("field", "a")

    def __init__(self, field: Field, a: np.ndarray):
        if a.ndim != 2:
            raise ValueError("matrix data must be two-dimensional")
        if a.dtype != np.dtype(field.dtype):
            a = a.astype(field.dtype)
        a.flags.writeable = False
        self.field = field
        self.a = a

    # construction

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = list(rows)
        if not rows:
            return cls.zero(field, 0, cols or 0)
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("ragged rows")
        return cls(field, field.array(rows))

    @classmethod
    def zero(cls, field: Field, m: int, n: int) -> "Matrix":
        return cls(field, field.zeros(m, n))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        return cls(field, field.eye(n))

    @classmethod
    def random(cls, field: Field, rng: np.random.Generator, m: int, n: int, **kw) -> "Matrix":
        return cls(field, field.random_array(rng, m, n, **kw))

    # shape & access

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    def entries(self) -> list:
        """Row-major scalars."""
        return [self.a[i, j] for i in range(self.rows) for j in range(self.cols)]

    def tolist(self) -> list[list]:
        return [[self.a[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def is_zero(self) -> bool:
        return self.a.size == 0 or not np.any(self.a != 0)

    def __getitem__(self, key):
        out = self.a[key]
        if isinstance(out, np.ndarray):
            if out.ndim == 1:
                out = out.reshape(1, -1) if isinstance(key, tuple) and isinstance(key[0], int) else out.reshape(-1, 1)
            return Matrix(self.field, out.copy())
        return out

    def __repr__(self) -> str:
        body = "; ".join(" ".join(self.field.format(x) for x in row) for row in self.tolist())
        return f"Matrix<{self.field!r}>({self.rows}x{self.cols})[{body}]"

    # arithmetic

    def _check(self, other: "Matrix"):
        if self.field != other.field:
            raise ValueError(f"field mismatch: {self.field!r} vs {other.field!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(np.all(self.a == other.a))

    def __hash__(self):
        return hash((self.field, self.shape, tuple(self.a.ravel().tolist())))

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return Matrix(self.field, self.field.reduce(self.a + other.a))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return Matrix(self.field, self.field.reduce(self.a - other.a))

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, self.field.reduce(-self.a))

    def scale(self, c) -> "Matrix":
        c = self.field.coerce(c)
        return Matrix(self.field, self.field.reduce(self.a * c))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        return Matrix(self.field, self.field.matmul(self.a, other.a))

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.a.T.copy())

    def kron(self, other: "Matrix") -> "Matrix":
        self._check(other)
        m, n = self.shape
        r, s = other.shape
        if m * n * r * s == 0:
            return Matrix.zero(self.field, m * r, n * s)
        out = np.kron(self.a, other.a)
        return Matrix(self.field, self.field.reduce(out))

    def select_rows(self, idx: Sequence[int]) -> "Matrix":
        return Matrix(self.field, self.a[list(idx), :].reshape(len(idx), self.cols))

    def select_cols(self, idx: Sequence[int]) -> "Matrix":
        return Matrix(self.field, self.a[:, list(idx)].reshape(self.rows, len(idx)))


def hstack(field: Field, mats: Iterable[Matrix], rows: int | None = None) -> Matrix:
    mats = list(mats)
    if not mats:
        return Matrix.zero(field, rows or 0, 0)
    return Matrix(field, np.hstack([m.a for m in mats]))


def vstack(field: Field, mats: Iterable[Matrix], cols: int | None = None) -> Matrix:
    mats = list(mats)
    if not mats:
        return Matrix.zero(field, 0, cols or 0)
    return Matrix(field, np.vstack([m.a for m in mats]))


def block(field: Field, row_sizes: Sequence[int], col_sizes: Sequence[int], blocks: dict) -> Matrix:
    """Assemble a block matrix; ``blocks[(i, j)]`` fills block row i, block column j."""
    out = field.zeros(sum(row_sizes), sum(col_sizes))
    roff = np.concatenate([[0], np.cumsum(row_sizes)]).astype(int)
    coff = np.concatenate([[0], np.cumsum(col_sizes)]).astype(int)
    for (i, j), m in blocks.items():
        if m.shape != (row_sizes[i], col_sizes[j]):
            raise ValueError(f"block {(i, j)} has shape {m.shape}, expected {(row_sizes[i], col_sizes[j])}")
        if m.rows and m.cols:
            out[roff[i]:roff[i + 1], coff[j]:coff[j + 1]] = m.a
    return Matrix(field, out)


def direct_sum(field: Field, mats: Sequence[Matrix]) -> Matrix:
    return block(field, [m.rows for m in mats], [m.cols for m in mats],
                 {(i, i): m for i, m in enumerate(mats)})


# integer fast paths over the rationals

_denominator = np.frompyfunc(lambda x: x.denominator, 1, 1)
_numerator = np.frompyfunc(lambda x: x.numerator, 1, 1)


def _integral(a: np.ndarray) -> tuple[np.ndarray, int]:
    """``(A, D)`` with ``a == A / D`` and ``A`` an object array of Python ints."""
    if a.size == 0:
        return a.astype(object), 1
    dens = _denominator(a)
    D = math.lcm(*set(dens.ravel().tolist()))
    if D == 1:
        return _numerator(a), 1
    return _numerator(a * D), D


def _rational_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    A, da = _integral(a)
    B, db = _integral(b)
    amax = max((abs(x) for x in A.ravel()), default=0)
    bmax = max((abs(x) for x in B.ravel()), default=0)
    if amax * bmax * a.shape[1] < _INT64_MAX:
        C = (A.astype(np.int64) @ B.astype(np.int64)).astype(object)
    else:
        C = A.dot(B)
    D = da * db
    out = np.empty(C.shape, dtype=object)
    flat = out.ravel()
    for i, x in enumerate(C.ravel().tolist()):
        flat[i] = Fraction(x, D) if D != 1 else Fraction(x)
    return out


def _integer_rank(a: np.ndarray) -> int:
    """Rank over QQ by fraction-free (Bareiss) elimination on an integral copy."""
    rows = []
    for row in a:
        A, _ = _integral(row.reshape(1, -1))
        rows.append(A[0])
    A = np.array(rows, dtype=object).reshape(a.shape)
    m, n = A.shape
    r = 0
    prev = 1
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        piv = A[r, c]
        below = A[r + 1:]
        if below.shape[0]:
            col = below[:, c].copy()
            A[r + 1:] = (below * piv - np.outer(col, A[r])) // prev
        prev = piv
        r += 1
    return r


# elimination


def _rref_array(field: Field, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    A = a.copy()
    A.flags.writeable = True
    m, n = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        piv = A[r, c]
        if piv != 1:
            A[r] = field.reduce(A[r] * field.inv(piv))
        col = A[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            A[hit] = field.reduce(A[hit] - np.outer(col[hit], A[r]))
        pivots.append(c)
        r += 1
    return A, pivots


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns.

    Pivots are taken leftmost-first, choosing the topmost available row.
    """
    A, piv = _rref_array(m.field, m.a)
    return Matrix(m.field, A), tuple(piv)


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field.p is None:
        return _integer_rank(m.a)
    return len(_rref_array(m.field, m.a)[1])


def kernel_basis(m: Matrix) -> Matrix:
    """Columns spanning the null space, one per free column of ``rref(m)``.

    The column for free variable ``f`` has a 1 in row ``f``, zeros in the
    other free rows and ``-rref[i, f]`` in pivot row ``pivots[i]``.
    """
    field = m.field
    n = m.cols
    if m.rows == 0:
        return Matrix.identity(field, n)
    R, piv = _rref_array(field, m.a)
    ps = set(piv)
    free = [c for c in range(n) if c not in ps]
    K = field.zeros(n, len(free))
    if free:
        K[free, list(range(len(free)))] = field.coerce(1)
        if piv:
            K[list(piv), :] = field.reduce(-R[:len(piv)][:, free])
    return Matrix(field, K)


def solve(m: Matrix, b: Matrix) -> Matrix | None:
    """A solution ``x`` of ``m @ x == b`` with free variables set to zero, or None."""
    if m.field != b.field:
        raise ValueError("field mismatch")
    if b.rows != m.rows:
        raise ValueError(f"dimension mismatch: {m.shape} vs rhs {b.shape}")
    field = m.field
    n = m.cols
    if m.rows == 0:
        return Matrix.zero(field, n, b.cols)
    aug = np.hstack([m.a, b.a])
    R, piv = _rref_array(field, aug)
    if piv and piv[-1] >= n:
        return None
    x = field.zeros(n, b.cols)
    for i, pc in enumerate(piv):
        x[pc, :] = R[i, n:]
    return Matrix(field, x)


def image_basis(m: Matrix) -> Matrix:
    """A basis of the column space: the pivot columns of ``m``."""
    if m.rows == 0 or m.cols == 0:
        return Matrix.zero(m.field, m.rows, 0)
    _, piv = _rref_array(m.field, m.a)
    return m.select_cols(piv)


def row_space_basis(m: Matrix) -> Matrix:
    """Nonzero rows of the rref, as a matrix with one basis vector per row."""
    if m.rows == 0 or m.cols == 0:
        return Matrix.zero(m.field, 0, m.cols)
    R, piv = _rref_array(m.field, m.a)
    return Matrix(m.field, R[:len(piv)].copy())
