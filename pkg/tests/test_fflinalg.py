from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relint.fflinalg import (FFMatrix, LinAlgError, ModulusMismatch, NotPrime, ShapeMismatch,
                             cokernel, is_prime, kernel_basis, left_inverse, right_inverse, solve)

PRIMES = st.sampled_from([2, 3, 5])


@st.composite
def matrices(draw, max_rows=4, max_cols=4):
    p = draw(PRIMES)
    r, c = draw(st.integers(0, max_rows)), draw(st.integers(0, max_cols))
    entries = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), min_size=r, max_size=r))
    return FFMatrix(entries, p, shape=(r, c))


def image_size(A: FFMatrix) -> int:
    """Number of distinct vectors ``A x``, by enumerating every ``x``."""
    seen = set()
    for x in itertools.product(range(A.p), repeat=A.cols):
        seen.add(tuple((A.a @ np.array(x, dtype=np.int64)) % A.p) if A.cols else ())
    return len(seen)


@given(matrices())
@settings(max_examples=120, deadline=None)
def test_rank_counts_the_image(A):
    assert A.p ** A.rank() == image_size(A)


@given(matrices())
@settings(max_examples=120, deadline=None)
def test_rank_nullity_and_kernel(A):
    K = kernel_basis(A)
    assert K.cols == A.cols - A.rank()
    assert K.rank() == K.cols
    if A.rows and K.cols:
        assert (A @ K).is_zero()


@given(matrices())
@settings(max_examples=80, deadline=None)
def test_cokernel_kills_image(A):
    d, Q = cokernel(A)
    assert d == A.rows - A.rank()
    if d and A.cols:
        assert (Q @ A).is_zero()


@given(matrices(), st.data())
@settings(max_examples=80, deadline=None)
def test_solve_finds_preimages(A, data):
    x = FFMatrix([[data.draw(st.integers(0, A.p - 1))] for _ in range(A.cols)], A.p, shape=(A.cols, 1))
    b = A @ x
    y = solve(A, b)
    assert y is not None and A @ y == b


def test_solve_reports_inconsistency():
    A = FFMatrix([[1, 1], [1, 1]], 2)
    assert solve(A, FFMatrix([[0], [1]], 2)) is None


@given(st.integers(1, 4), PRIMES, st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_inverse_round_trip(n, p, seed):
    rng = np.random.default_rng(seed)
    A = FFMatrix.random(n, n, p, rng)
    if A.is_invertible():
        assert A @ A.inverse() == FFMatrix.identity(n, p)
    else:
        with pytest.raises(LinAlgError):
            A.inverse()


def test_one_sided_inverses():
    Q = FFMatrix([[1, 0, 2], [0, 1, 1]], 3)
    assert Q @ right_inverse(Q) == FFMatrix.identity(2, 3)
    assert left_inverse(Q.T) @ Q.T == FFMatrix.identity(2, 3)


def test_errors():
    assert is_prime(7) and not is_prime(9)
    with pytest.raises(NotPrime):
        FFMatrix([[1]], 4)
    with pytest.raises(ModulusMismatch):
        FFMatrix([[1]], 2) @ FFMatrix([[1]], 3)
    with pytest.raises(ShapeMismatch):
        FFMatrix([[1, 0]], 2) @ FFMatrix([[1, 0]], 2)


def test_entries_are_reduced():
    assert FFMatrix([[5, -1]], 3).tolist() == [[2, 2]]
    assert FFMatrix.zeros(0, 3, 2).shape == (0, 3)
