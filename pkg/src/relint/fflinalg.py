"""Exact dense linear algebra over a prime field F_p."""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class LinAlgError(ValueError):
    pass


class NotPrime(LinAlgError):
    pass


class ShapeMismatch(LinAlgError):
    pass


class ModulusMismatch(LinAlgError):
    pass


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@lru_cache(maxsize=None)
def _inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv[x] = pow(x, p - 2, p)
    return inv


def rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` mod ``p`` and its pivot columns."""
    a = np.array(a, dtype=np.int64) % p
    rows, cols = a.shape
    inv = _inverse_table(p)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        if a[r, c] != 1:
            a[r] = (a[r] * inv[a[r, c]]) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


class FFMatrix:
    """Immutable ``rows x cols`` matrix over F_p."""

    __slots__ = ("p", "a")

    def __init__(self, entries, p: int = 2, *, shape: tuple[int, int] | None = None):
        if not is_prime(p):
            raise NotPrime(p)
        self.p = p
        if isinstance(entries, FFMatrix):
            entries = entries.a
        arr = np.array(entries, dtype=np.int64)
        if shape is not None:
            if arr.size != shape[0] * shape[1]:
                raise ShapeMismatch(f"{arr.size} entries cannot fill a {shape[0]}x{shape[1]} matrix")
            arr = arr.reshape(shape)
        elif arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ShapeMismatch("matrix entries must be two-dimensional")
        self.a = arr % p
        self.a.flags.writeable = False

    @classmethod
    def _wrap(cls, arr: np.ndarray, p: int) -> "FFMatrix":
        m = object.__new__(cls)
        m.p = p
        m.a = arr % p
        m.a.flags.writeable = False
        return m

    # constructors ----------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int, p: int = 2) -> "FFMatrix":
        return cls._wrap(np.zeros((rows, cols), dtype=np.int64), p)

    @classmethod
    def identity(cls, n: int, p: int = 2) -> "FFMatrix":
        return cls._wrap(np.eye(n, dtype=np.int64), p)

    @classmethod
    def random(cls, rows: int, cols: int, p: int, rng) -> "FFMatrix":
        return cls._wrap(rng.integers(0, p, size=(rows, cols), dtype=np.int64), p)

    # shape -----------------------------------------------------------------
    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.a]

    @property
    def entries(self) -> list[int]:
        return [int(x) for x in self.a.ravel()]

    # arithmetic ------------------------------------------------------------
    def _same_field(self, other: "FFMatrix") -> None:
        if other.p != self.p:
            raise ModulusMismatch(f"{self.p} vs {other.p}")

    def __matmul__(self, other: "FFMatrix") -> "FFMatrix":
        return matmul(self, other)

    def __add__(self, other: "FFMatrix") -> "FFMatrix":
        self._same_field(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return FFMatrix._wrap(self.a + other.a, self.p)

    def __sub__(self, other: "FFMatrix") -> "FFMatrix":
        self._same_field(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return FFMatrix._wrap(self.a - other.a, self.p)

    def __neg__(self) -> "FFMatrix":
        return FFMatrix._wrap(-self.a, self.p)

    def scale(self, c: int) -> "FFMatrix":
        return FFMatrix._wrap(self.a * (c % self.p), self.p)

    @property
    def T(self) -> "FFMatrix":
        return FFMatrix._wrap(self.a.T.copy(), self.p)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FFMatrix) and self.p == other.p
                and self.shape == other.shape and bool(np.array_equal(self.a, other.a)))

    __hash__ = None  # type: ignore[assignment]

    def is_zero(self) -> bool:
        return not self.a.any()

    def __repr__(self) -> str:
        return f"FFMatrix(p={self.p}, {self.tolist()})"

    # linear algebra --------------------------------------------------------
    def rank(self) -> int:
        return rank(self)

    def kernel_basis(self) -> "FFMatrix":
        return kernel_basis(self)

    def is_invertible(self) -> bool:
        return self.rows == self.cols and rank(self) == self.rows

    def inverse(self) -> "FFMatrix":
        if self.rows != self.cols:
            raise ShapeMismatch("inverse of a non-square matrix")
        n = self.rows
        aug = np.hstack([self.a, np.eye(n, dtype=np.int64)])
        r, piv = rref(aug, self.p)
        if piv[:n] != list(range(n)) or len(piv) < n:
            raise LinAlgError("matrix is singular")
        return FFMatrix._wrap(r[:, n:], self.p)


def matmul(A: FFMatrix, B: FFMatrix) -> FFMatrix:
    A._same_field(B)
    if A.cols != B.rows:
        raise ShapeMismatch(f"{A.shape} @ {B.shape}")
    return FFMatrix._wrap(A.a @ B.a, A.p)


def rank(A: FFMatrix) -> int:
    if A.rows == 0 or A.cols == 0:
        return 0
    return len(rref(A.a, A.p)[1])


def kernel_basis(A: FFMatrix) -> FFMatrix:
    """Columns form a basis of ``{x : A x = 0}``."""
    p, n = A.p, A.cols
    if A.rows == 0:
        return FFMatrix.identity(n, p)
    r, piv = rref(A.a, p)
    free = [c for c in range(n) if c not in set(piv)]
    K = np.zeros((n, len(free)), dtype=np.int64)
    for j, c in enumerate(free):
        K[c, j] = 1
        for i, pc in enumerate(piv):
            K[pc, j] = -r[i, c]
    return FFMatrix._wrap(K, p)


def cokernel(A: FFMatrix) -> tuple[int, FFMatrix]:
    """``(dim, Q)`` with ``Q @ A == 0`` and ``Q`` of full row rank ``dim``."""
    Q = kernel_basis(A.T).T
    return Q.rows, Q


def solve(A: FFMatrix, b: FFMatrix) -> FFMatrix | None:
    """Some ``x`` with ``A x = b`` or ``None``; ``b`` may have several columns."""
    A._same_field(b)
    if b.rows != A.rows:
        raise ShapeMismatch(f"{A.shape} x = {b.shape}")
    p, n = A.p, A.cols
    if A.rows == 0:
        return FFMatrix.zeros(n, b.cols, p)
    r, piv = rref(np.hstack([A.a, b.a]), p)
    if any(c >= n for c in piv):
        return None
    x = np.zeros((n, b.cols), dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, n:]
    return FFMatrix._wrap(x, p)


def right_inverse(Q: FFMatrix) -> FFMatrix:
    """``S`` with ``Q @ S == I`` for ``Q`` of full row rank."""
    p, d = Q.p, Q.rows
    if d == 0:
        return FFMatrix.zeros(Q.cols, 0, p)
    _, piv = rref(Q.a, p)
    if len(piv) != d:
        raise LinAlgError("not of full row rank")
    sub = FFMatrix._wrap(Q.a[:, piv], p).inverse()
    S = np.zeros((Q.cols, d), dtype=np.int64)
    S[piv] = sub.a
    return FFMatrix._wrap(S, p)


def left_inverse(K: FFMatrix) -> FFMatrix:
    """``S`` with ``S @ K == I`` for ``K`` of full column rank."""
    return right_inverse(K.T).T


def hstack(blocks: Sequence[FFMatrix], rows: int, p: int) -> FFMatrix:
    if not blocks:
        return FFMatrix.zeros(rows, 0, p)
    return FFMatrix._wrap(np.hstack([b.a for b in blocks]), p)


def vstack(blocks: Sequence[FFMatrix], cols: int, p: int) -> FFMatrix:
    if not blocks:
        return FFMatrix.zeros(0, cols, p)
    return FFMatrix._wrap(np.vstack([b.a for b in blocks]), p)


def block_diag(blocks: Sequence[FFMatrix], p: int) -> FFMatrix:
    r = sum(b.rows for b in blocks)
    c = sum(b.cols for b in blocks)
    out = np.zeros((r, c), dtype=np.int64)
    i = j = 0
    for b in blocks:
        out[i:i + b.rows, j:j + b.cols] = b.a
        i += b.rows
        j += b.cols
    return FFMatrix._wrap(out, p)


def random_invertible(n: int, p: int, rng) -> FFMatrix:
    while True:
        m = FFMatrix.random(n, n, p, rng)
        if m.is_invertible():
            return m


def vectors(dim: int, p: int) -> Iterable[tuple[int, ...]]:
    """All vectors of ``F_p^dim`` in lexicographic order."""
    from itertools import product
    return product(range(p), repeat=dim)
