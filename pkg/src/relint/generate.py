"""Random posets, modules and translation families for property testing."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .diagrams import ModuleMap, VectModule, hom_basis_matrix, map_from_flat
from .fflinalg import FFMatrix, kernel_basis, random_invertible
from .poset import FinitePoset, MonotoneMap, bits, build_poset, chain, product
from .translate import TranslationFamily, WeightedPoset, path_weighting, thickening_from_weighting


def random_poset(n: int, rng: np.random.Generator, density: float = 0.4, prefix: str = "p") -> FinitePoset:
    labels = [f"{prefix}{i}" for i in range(n)]
    perm = rng.permutation(n)
    rel = [(labels[perm[i]], labels[perm[j]]) for i in range(n) for j in range(i + 1, n)
           if rng.random() < density]
    return build_poset(labels, rel)


def random_module(P: FinitePoset, rng: np.random.Generator, p: int = 2, max_dim: int = 2,
                  dims=None) -> VectModule:
    """A uniformly random module with the given (or random) dimensions.

    Cover maps into each element are drawn from the solution space of the
    commutativity constraints, processed along a linear extension.
    """
    if dims is None:
        dims = [int(rng.integers(0, max_dim + 1)) for _ in range(len(P))]
    maps: dict = {}
    full: dict = {}

    def composite(r, u):
        if r == u:
            return FFMatrix.identity(dims[r], p)
        return full[(r, u)]

    for q in P.order:
        covers = P.lower_covers[q]
        sizes = [dims[q] * dims[u] for u in covers]
        offs = np.cumsum([0, *sizes])
        rows = []
        for r in bits(P.down[q] & ~(1 << q)):
            via = [k for k, u in enumerate(covers) if P.leq(r, u)]
            for k0, k1 in zip(via, via[1:]):
                u0, u1 = covers[k0], covers[k1]
                block = np.zeros((dims[q] * dims[r], int(offs[-1])), dtype=np.int64)
                eye = np.eye(dims[q], dtype=np.int64)
                block[:, offs[k0]:offs[k0 + 1]] = np.kron(eye, composite(r, u0).a.T)
                block[:, offs[k1]:offs[k1 + 1]] -= np.kron(eye, composite(r, u1).a.T)
                rows.append(block)
        total = int(offs[-1])
        A = FFMatrix(np.vstack(rows) if rows else np.zeros((0, total), dtype=np.int64), p)
        K = kernel_basis(A)
        vec = (K.a @ rng.integers(0, p, size=K.cols)) % p if K.cols else np.zeros(total, dtype=np.int64)
        for k, u in enumerate(covers):
            maps[(u, q)] = FFMatrix(vec[offs[k]:offs[k + 1]].reshape(dims[q], dims[u]), p)
        for r in bits(P.down[q] & ~(1 << q)):
            u = next(u for u in covers if P.leq(r, u))
            full[(r, q)] = maps[(u, q)] @ composite(r, u)
    return VectModule(P, dims, maps, p)


def conjugate(M: VectModule, rng: np.random.Generator) -> tuple[VectModule, ModuleMap]:
    """Base-change ``M`` by random invertible matrices; returns the new module and the iso."""
    p = M.category.p
    g = [random_invertible(d, p, rng) for d in M.dims]
    maps = {(a, b): g[b] @ M.edge[(a, b)] @ g[a].inverse() for a, b in M.poset.hasse}
    N = VectModule(M.poset, M.dims, maps, p)
    return N, ModuleMap(M, N, g)


def random_map(M, N, rng) -> ModuleMap:
    B = hom_basis_matrix(M, N)
    p = M.category.p
    c = rng.integers(0, p, size=B.cols)
    return map_from_flat(M, N, (B.a @ c) % p if B.cols else np.zeros(B.rows, dtype=np.int64))


def random_monotone(P: FinitePoset, Q: FinitePoset, rng: np.random.Generator, tries: int = 100) -> MonotoneMap | None:
    for _ in range(tries):
        img = [0] * len(P)
        ok = True
        for p in P.order:
            ub = Q.upper_bounds(img[u] for u in P.lower_covers[p])
            opts = list(bits(ub))
            if not opts:
                ok = False
                break
            img[p] = int(rng.choice(opts))
        if ok:
            return MonotoneMap(P, Q, img)
    return None


def random_full_embedding(Q: FinitePoset, k: int, rng: np.random.Generator) -> MonotoneMap:
    """Inclusion of a random induced subposet of size ``k``."""
    keep = sorted(int(x) for x in rng.choice(len(Q), size=k, replace=False))
    mask = 0
    for x in keep:
        mask |= 1 << x
    P, idx = Q.subposet(mask)
    return MonotoneMap(P, Q, idx)


def random_translation(Q: FinitePoset, rng: np.random.Generator, step: Fraction = Fraction(1)) -> TranslationFamily | None:
    """Iterates of a random monotone translation, stopped once they stabilise."""
    t = [0] * len(Q)
    for q in Q.order:
        ub = Q.upper_bounds([q, *(t[u] for u in Q.lower_covers[q])])
        opts = list(bits(ub))
        if not opts:
            return None
        # bias towards small moves
        opts.sort(key=lambda x: (Q.down[x].bit_count(), x))
        t[q] = opts[min(int(rng.geometric(0.5)) - 1, len(opts) - 1)]
    maps = {Fraction(0): tuple(range(len(Q)))}
    cur = tuple(range(len(Q)))
    k = 0
    while True:
        nxt = tuple(t[x] for x in cur)
        if nxt == cur:
            break
        k += 1
        maps[k * step] = nxt
        cur = nxt
    return TranslationFamily(Q, list(maps), maps)


def chain_shift(n: int, step: Fraction = Fraction(1)) -> TranslationFamily:
    """Clipped shifts ``i -> min(i + k, n - 1)`` on a chain."""
    Q = chain(n, "q")
    maps = {k * step: tuple(min(i + k, n - 1) for i in range(n)) for k in range(n)}
    return TranslationFamily(Q, list(maps), maps)


def grid_shift(a: int, b: int, step: Fraction = Fraction(1)) -> TranslationFamily:
    """Diagonal clipped shifts on a product of chains."""
    Q = product(chain(a, "i"), chain(b, "j"))
    maps = {}
    for k in range(max(a, b)):
        maps[k * step] = tuple(min(i // b + k, a - 1) * b + min(i % b + k, b - 1) for i in range(a * b))
    return TranslationFamily(Q, list(maps), maps)


def random_weighting(P: FinitePoset, rng: np.random.Generator, extra: float = 0.3,
                     values=(Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))) -> WeightedPoset:
    up = {(a, b): values[int(rng.integers(len(values)))] for a, b in P.hasse}
    more = {}
    n = len(P)
    for a in range(n):
        for b in range(n):
            if a != b and not P.comparable(a, b) and rng.random() < extra:
                more[(a, b)] = values[int(rng.integers(len(values)))]
    return path_weighting(P, up, more)


def random_thickening(rng: np.random.Generator, max_size: int = 7):
    """A down-set lattice with a weight-induced thickening of at most ``max_size`` elements."""
    while True:
        n = int(rng.integers(1, 4))
        X = random_poset(n, rng, prefix="x")
        wX = random_weighting(X, rng)
        try:
            T = thickening_from_weighting(wX, cap=max_size)
        except Exception:
            continue
        return T


def random_family(rng: np.random.Generator, max_size: int = 7) -> TranslationFamily:
    """A superlinear translation family on a poset with at most ``max_size`` elements."""
    while True:
        kind = int(rng.integers(4))
        if kind == 0:
            return chain_shift(int(rng.integers(2, max_size + 1)), Fraction(int(rng.integers(1, 3)), 2))
        if kind == 1:
            return grid_shift(2, int(rng.integers(2, max_size // 2 + 1)))
        if kind == 2:
            return random_thickening(rng, max_size)
        Q = random_poset(int(rng.integers(2, max_size + 1)), rng, prefix="q")
        T = random_translation(Q, rng)
        if T is not None and len(T.ladder) > 1:
            return T
