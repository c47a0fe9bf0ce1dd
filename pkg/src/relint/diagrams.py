"""Poset modules valued in F_p-vector spaces or finite sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .fflinalg import (FFMatrix, ModulusMismatch, ShapeMismatch, cokernel, hstack,
                       kernel_basis, left_inverse, right_inverse, vstack)
from .poset import FinitePoset, bits

ISO_CAP = 2 ** 20


class SearchCapExceeded(RuntimeError):
    """An exhaustive search would exceed its configured cap."""


# ---------------------------------------------------------------------------
# value categories

@dataclass
class Colimit:
    obj: int
    legs: list
    factor: Callable[[Sequence], object]


@dataclass
class Limit:
    obj: int
    legs: list
    factor: Callable[[Sequence], object]


class VectCategory:
    """Finite-dimensional F_p vector spaces; morphisms are FFMatrix."""

    kind = "vect"

    def __init__(self, p: int = 2):
        self.p = p

    def __eq__(self, other):
        return isinstance(other, VectCategory) and other.p == self.p

    def __hash__(self):
        return hash(("vect", self.p))

    def identity(self, d: int) -> FFMatrix:
        return FFMatrix.identity(d, self.p)

    def zero(self, target: int, source: int) -> FFMatrix:
        return FFMatrix.zeros(target, source, self.p)

    def compose(self, g: FFMatrix, f: FFMatrix) -> FFMatrix:
        return g @ f

    def equal(self, a: FFMatrix, b: FFMatrix) -> bool:
        return a == b

    def is_iso(self, m: FFMatrix) -> bool:
        return m.is_invertible()

    def check_morphism(self, m, source: int, target: int) -> None:
        if not isinstance(m, FFMatrix):
            raise TypeError("expected FFMatrix")
        if m.p != self.p:
            raise ModulusMismatch(f"{m.p} vs {self.p}")
        if m.shape != (target, source):
            raise ShapeMismatch(f"expected {(target, source)}, got {m.shape}")

    def colimit(self, objs: Sequence[int], arrows: Sequence[tuple[int, int, FFMatrix]]) -> Colimit:
        p = self.p
        offs = np.cumsum([0, *objs])
        D = int(offs[-1])
        cols = []
        for i, j, m in arrows:
            block = np.zeros((D, objs[i]), dtype=np.int64)
            block[offs[j]:offs[j + 1]] = m.a
            block[offs[i]:offs[i + 1]] -= np.eye(objs[i], dtype=np.int64)
            cols.append(block)
        R = FFMatrix(np.hstack(cols) if cols else np.zeros((D, 0), dtype=np.int64), p)
        d, Q = cokernel(R)
        S = right_inverse(Q)
        legs = [FFMatrix(Q.a[:, offs[i]:offs[i + 1]], p) for i in range(len(objs))]

        def factor(cocone):
            C = hstack(list(cocone), cocone[0].rows if cocone else 0, p) if cocone else None
            if C is None:
                raise ValueError("empty cocone needs an explicit target")
            return C @ S

        return Colimit(d, legs, factor)

    def limit(self, objs: Sequence[int], arrows: Sequence[tuple[int, int, FFMatrix]]) -> Limit:
        p = self.p
        offs = np.cumsum([0, *objs])
        D = int(offs[-1])
        rows = []
        for i, j, m in arrows:
            block = np.zeros((objs[j], D), dtype=np.int64)
            block[:, offs[i]:offs[i + 1]] = m.a
            block[:, offs[j]:offs[j + 1]] -= np.eye(objs[j], dtype=np.int64)
            rows.append(block)
        Phi = FFMatrix(np.vstack(rows) if rows else np.zeros((0, D), dtype=np.int64), p)
        K = kernel_basis(Phi)
        Kinv = left_inverse(K)
        legs = [FFMatrix(K.a[offs[i]:offs[i + 1]], p) for i in range(len(objs))]

        def factor(cone):
            if not cone:
                raise ValueError("empty cone needs an explicit source")
            return Kinv @ vstack(list(cone), cone[0].cols, p)

        return Limit(K.cols, legs, factor)


class SetCategory:
    """Finite sets ``{0..n-1}``; morphisms are tuples of images."""

    kind = "set"

    def __eq__(self, other):
        return isinstance(other, SetCategory)

    def __hash__(self):
        return hash("set")

    def identity(self, n: int) -> tuple[int, ...]:
        return tuple(range(n))

    def compose(self, g, f):
        return tuple(g[x] for x in f)

    def equal(self, a, b) -> bool:
        return tuple(a) == tuple(b)

    def is_iso(self, m) -> bool:
        return sorted(m) == list(range(len(m)))

    def check_morphism(self, m, source: int, target: int) -> None:
        if len(m) != source or any(not 0 <= int(x) < target for x in m):
            raise ShapeMismatch(f"function table does not map {source} into {target}")

    def colimit(self, objs: Sequence[int], arrows) -> Colimit:
        offs = list(itertools.accumulate(objs, initial=0))
        parent = list(range(offs[-1]))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j, m in arrows:
            for x, y in enumerate(m):
                a, b = find(offs[i] + x), find(offs[j] + y)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        label: dict[int, int] = {}
        for g in range(offs[-1]):
            label.setdefault(find(g), len(label))
        legs = [tuple(label[find(offs[i] + x)] for x in range(objs[i])) for i in range(len(objs))]
        reps = [None] * len(label)
        for i in range(len(objs)):
            for x in range(objs[i]):
                c = legs[i][x]
                if reps[c] is None:
                    reps[c] = (i, x)

        def factor(cocone):
            return tuple(cocone[i][x] for i, x in reps)

        return Colimit(len(label), legs, factor)

    def limit(self, objs: Sequence[int], arrows) -> Limit:
        n = len(objs)
        outgoing: list[list] = [[] for _ in range(n)]
        for i, j, m in arrows:
            outgoing[i].append((j, m))
            outgoing[j].append((i, None))
        tuples: list[tuple[int, ...]] = []
        choice = [None] * n

        def consistent(k):
            for i, j, m in arrows:
                if max(i, j) == k and m[choice[i]] != choice[j]:
                    return False
            return True

        def rec(k):
            if k == n:
                tuples.append(tuple(choice))
                return
            for x in range(objs[k]):
                choice[k] = x
                if consistent(k):
                    rec(k + 1)
            choice[k] = None

        rec(0)
        index = {t: a for a, t in enumerate(tuples)}
        legs = [tuple(t[i] for t in tuples) for i in range(n)]

        def factor(cone):
            size = len(cone[0])
            return tuple(index[tuple(cone[i][y] for i in range(n))] for y in range(size))

        return Limit(len(tuples), legs, factor)


# ---------------------------------------------------------------------------
# modules

class Module:
    """A functor from a finite poset into a value category, stored on covers."""

    def __init__(self, poset: FinitePoset, category, objs: Sequence[int], edge_maps: dict,
                 *, check: bool = True):
        self.poset = poset
        self.category = category
        self.objs = tuple(int(d) for d in objs)
        if len(self.objs) != len(poset):
            raise ShapeMismatch("one object per poset element is required")
        self.edge = {}
        cat = category
        for p, q in poset.hasse:
            if (p, q) in edge_maps:
                m = edge_maps[(p, q)]
            elif hasattr(cat, "zero"):
                m = cat.zero(self.objs[q], self.objs[p])
            elif self.objs[p] == 0:
                m = ()
            else:
                raise ShapeMismatch(f"missing map for cover {poset.labels[p]} < {poset.labels[q]}")
            if check:
                cat.check_morphism(m, self.objs[p], self.objs[q])
            self.edge[(p, q)] = m
        if check:
            for key in edge_maps:
                if key not in self.edge:
                    raise ShapeMismatch(f"{key} is not a covering pair")
        self._maps: dict[tuple[int, int], object] = {}

    @property
    def p(self) -> int:
        return self.category.p

    def obj(self, p: int) -> int:
        return self.objs[p]

    def map(self, p: int, q: int):
        """The structure map ``M(p <= q)``, composed along covers."""
        if p == q:
            return self.category.identity(self.objs[p])
        m = self.edge.get((p, q))
        if m is not None:
            return m
        m = self._maps.get((p, q))
        if m is not None:
            return m
        P = self.poset
        if not P.leq(p, q):
            raise ValueError(f"{P.labels[p]} is not below {P.labels[q]}")
        for u in P.upper_covers[p]:
            if P.leq(u, q):
                m = self.category.compose(self.map(u, q), self.edge[(p, u)])
                break
        self._maps[(p, q)] = m
        return m

    def is_zero(self) -> bool:
        return not any(self.objs)

    def total(self) -> int:
        return sum(self.objs)

    def restrict_values(self):
        return self.objs

    def __repr__(self):
        return f"{type(self).__name__}({dict(zip(self.poset.labels, self.objs))})"


class VectModule(Module):
    def __init__(self, poset: FinitePoset, dims: Sequence[int], maps: dict | None = None,
                 p: int = 2, *, check: bool = True):
        maps = {k: (v if isinstance(v, FFMatrix) else FFMatrix(v, p, shape=(dims[k[1]], dims[k[0]])))
                for k, v in (maps or {}).items()}
        super().__init__(poset, VectCategory(p), dims, maps, check=check)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.objs


class SetModule(Module):
    def __init__(self, poset: FinitePoset, sizes: Sequence[int], fns: dict | None = None,
                 *, check: bool = True):
        fns = {k: tuple(int(x) for x in v) for k, v in (fns or {}).items()}
        super().__init__(poset, SetCategory(), sizes, fns, check=check)

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.objs


def make_module(poset: FinitePoset, category, objs, edge_maps, *, check: bool = False) -> Module:
    if isinstance(category, VectCategory):
        m = VectModule.__new__(VectModule)
    else:
        m = SetModule.__new__(SetModule)
    Module.__init__(m, poset, category, objs, edge_maps, check=check)
    return m


def zero_module(poset: FinitePoset, p: int = 2) -> VectModule:
    return VectModule(poset, [0] * len(poset), {}, p)


def constant_module(poset: FinitePoset, d: int, p: int = 2) -> VectModule:
    I = FFMatrix.identity(d, p)
    return VectModule(poset, [d] * len(poset), {e: I for e in poset.hasse}, p)


@dataclass
class ValidationReport:
    ok: bool
    diamond: tuple[str, str, str, str] | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


def validate(M: Module) -> ValidationReport:
    """Check that composites along any two cover paths agree."""
    P, cat = M.poset, M.category
    for p in reversed(P.order):
        ups = P.upper_covers[p]
        if len(ups) < 2:
            continue
        for r in bits(P.up[p]):
            via = [u for u in ups if P.leq(u, r)]
            if len(via) < 2:
                continue
            first = cat.compose(M.map(via[0], r), M.edge[(p, via[0])])
            for u in via[1:]:
                other = cat.compose(M.map(u, r), M.edge[(p, u)])
                if not cat.equal(first, other):
                    lab = P.labels
                    return ValidationReport(False, (lab[p], lab[via[0]], lab[u], lab[r]),
                                            f"paths {lab[p]}<{lab[via[0]]}<={lab[r]} and "
                                            f"{lab[p]}<{lab[u]}<={lab[r]} disagree")
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# maps

class ModuleMap:
    """A natural transformation between modules over the same poset."""

    def __init__(self, source: Module, target: Module, components: Sequence, *, check: bool = False):
        if source.poset is not target.poset:
            raise ValueError("modules live on different posets")
        if source.category != target.category:
            raise ValueError("modules have different value categories")
        self.source = source
        self.target = target
        self.components = tuple(components)
        if check:
            cat = source.category
            for p in range(len(source.poset)):
                cat.check_morphism(self.components[p], source.objs[p], target.objs[p])
            if not self.is_natural():
                raise ValueError("components are not natural")

    @property
    def category(self):
        return self.source.category

    def __getitem__(self, p: int):
        return self.components[p]

    def is_natural(self) -> bool:
        cat = self.category
        M, N = self.source, self.target
        return all(cat.equal(cat.compose(self.components[q], M.edge[(p, q)]),
                             cat.compose(N.edge[(p, q)], self.components[p]))
                   for p, q in M.poset.hasse)

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """``self ∘ other``."""
        cat = self.category
        return ModuleMap(other.source, self.target,
                         [cat.compose(a, b) for a, b in zip(self.components, other.components)])

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        return self.compose(other)

    def equals(self, other: "ModuleMap") -> bool:
        cat = self.category
        return all(cat.equal(a, b) for a, b in zip(self.components, other.components))

    def is_iso(self) -> bool:
        return all(self.category.is_iso(c) for c in self.components)

    def is_identity(self) -> bool:
        cat = self.category
        return all(cat.equal(c, cat.identity(d)) for c, d in zip(self.components, self.source.objs))

    def flat(self) -> np.ndarray:
        return np.concatenate([c.a.ravel() for c in self.components]) if self.components else np.zeros(0, np.int64)

    @classmethod
    def identity(cls, M: Module) -> "ModuleMap":
        return cls(M, M, [M.category.identity(d) for d in M.objs])


def map_from_flat(M: Module, N: Module, vec: np.ndarray) -> ModuleMap:
    p = M.category.p
    comps = []
    off = 0
    for q in range(len(M.poset)):
        r, c = N.objs[q], M.objs[q]
        comps.append(FFMatrix._wrap(np.asarray(vec[off:off + r * c], dtype=np.int64).reshape(r, c), p))
        off += r * c
    return ModuleMap(M, N, comps)


# ---------------------------------------------------------------------------
# colimits and limits over subsets

@dataclass
class SubColimit:
    """Colimit of ``M`` restricted to the elements of ``mask``."""

    members: list[int]
    obj: int
    legs: dict
    _factor: Callable = field(repr=False)
    category: object = field(repr=False, default=None)

    def factor(self, cocone: dict, target: int):
        """The unique map out of the colimit through which ``cocone`` factors."""
        if not self.members or self.obj == 0:
            return _empty_morphism(self.category, target, self.obj)
        return self._factor([cocone[p] for p in self.members])


@dataclass
class SubLimit:
    members: list[int]
    obj: int
    legs: dict
    _factor: Callable = field(repr=False)
    category: object = field(repr=False, default=None)

    def factor(self, cone: dict, source: int):
        if not self.members:
            return _terminal_morphism(self.category, source)
        if self.obj == 0 and isinstance(self.category, VectCategory):
            return self.category.zero(0, source)
        return self._factor([cone[p] for p in self.members])


def _empty_morphism(cat, target: int, source: int):
    if isinstance(cat, VectCategory):
        return cat.zero(target, source)
    return ()


def _terminal_morphism(cat, source: int):
    if isinstance(cat, VectCategory):
        return cat.zero(0, source)
    return (0,) * source


def _arrows(M: Module, mask: int, relations: str):
    P = M.poset
    if relations == "hasse":
        pairs = P.induced_covers(mask)
    elif relations == "all":
        pairs = [(a, b) for b in bits(mask) for a in bits(P.down[b] & mask) if a != b]
    else:
        raise ValueError(relations)
    return pairs


def colimit(M: Module, mask: int | None = None, relations: str = "hasse") -> SubColimit:
    """Colimit of ``M`` over the subposet ``mask`` (default: everything)."""
    P = M.poset
    if mask is None:
        mask = P.full_mask
    members = list(bits(mask))
    pos = {p: i for i, p in enumerate(members)}
    arrows = [(pos[a], pos[b], M.map(a, b)) for a, b in _arrows(M, mask, relations)]
    cat = M.category
    if not members:
        empty = 0
        return SubColimit([], empty, {}, lambda c: None, cat)
    c = cat.colimit([M.objs[p] for p in members], arrows)
    return SubColimit(members, c.obj, {p: c.legs[i] for i, p in enumerate(members)}, c.factor, cat)


def limit(M: Module, mask: int | None = None, relations: str = "hasse") -> SubLimit:
    P = M.poset
    if mask is None:
        mask = P.full_mask
    members = list(bits(mask))
    pos = {p: i for i, p in enumerate(members)}
    arrows = [(pos[a], pos[b], M.map(a, b)) for a, b in _arrows(M, mask, relations)]
    cat = M.category
    if not members:
        terminal = 0 if isinstance(cat, VectCategory) else 1
        return SubLimit([], terminal, {}, lambda c: None, cat)
    c = cat.limit([M.objs[p] for p in members], arrows)
    return SubLimit(members, c.obj, {p: c.legs[i] for i, p in enumerate(members)}, c.factor, cat)


# ---------------------------------------------------------------------------
# natural transformations

def _naturality_system(M: VectModule, N: VectModule) -> FFMatrix:
    p = M.category.p
    P = M.poset
    sizes = [N.objs[q] * M.objs[q] for q in range(len(P))]
    offs = np.cumsum([0, *sizes])
    total = int(offs[-1])
    rows = []
    for a, b in P.hasse:
        m, n = M.edge[(a, b)].a, N.edge[(a, b)].a
        block = np.zeros((N.objs[b] * M.objs[a], total), dtype=np.int64)
        # X_b @ M(a<b) - N(a<b) @ X_a, vectorised row-major
        if sizes[b]:
            block[:, offs[b]:offs[b + 1]] += np.kron(np.eye(N.objs[b], dtype=np.int64), m.T)
        if sizes[a]:
            block[:, offs[a]:offs[a + 1]] -= np.kron(n, np.eye(M.objs[a], dtype=np.int64))
        rows.append(block)
    A = np.vstack(rows) if rows else np.zeros((0, total), dtype=np.int64)
    return FFMatrix(A, p)


def hom_basis_matrix(M: VectModule, N: VectModule) -> FFMatrix:
    """Columns are flattened natural transformations ``M -> N`` forming a basis."""
    _check_pair(M, N)
    return kernel_basis(_naturality_system(M, N))


def nat_trans_space(M: Module, N: Module) -> list[ModuleMap]:
    """A basis (Vect) or the full list (Set) of natural transformations ``M -> N``."""
    _check_pair(M, N)
    if isinstance(M.category, SetCategory):
        return list(set_nat_trans(M, N))
    B = hom_basis_matrix(M, N)
    return [map_from_flat(M, N, B.a[:, j]) for j in range(B.cols)]


def _check_pair(M: Module, N: Module) -> None:
    if M.poset is not N.poset:
        raise ValueError("modules live on different posets")
    if M.category != N.category:
        raise ModulusMismatch("modules have different value categories")


def set_nat_trans(M: Module, N: Module, *, bijective: bool = False,
                  cap: int | None = None) -> Iterator[ModuleMap]:
    """Enumerate natural transformations of set-valued modules by backtracking."""
    P = M.poset
    order = list(P.order)
    comps: list = [None] * len(P)
    count = 0

    def options(q):
        forced: dict[int, int] = {}
        for a in P.lower_covers[q]:
            fm, fn = M.edge[(a, q)], N.edge[(a, q)]
            for x in range(M.objs[a]):
                y = fm[x]
                v = fn[comps[a][x]]
                if forced.setdefault(y, v) != v:
                    return
        free = [x for x in range(M.objs[q]) if x not in forced]
        if bijective:
            if M.objs[q] != N.objs[q]:
                return
            used = set(forced.values())
            if len(used) != len(forced):
                return
            rest = [y for y in range(N.objs[q]) if y not in used]
            for perm in itertools.permutations(rest, len(free)):
                table = dict(forced)
                table.update(zip(free, perm))
                yield tuple(table[x] for x in range(M.objs[q]))
        else:
            for vals in itertools.product(range(N.objs[q]), repeat=len(free)):
                table = dict(forced)
                table.update(zip(free, vals))
                yield tuple(table[x] for x in range(M.objs[q]))

    def rec(k):
        nonlocal count
        if k == len(order):
            count += 1
            if cap is not None and count > cap:
                raise SearchCapExceeded(f"more than {cap} natural transformations")
            yield ModuleMap(M, N, list(comps))
            return
        q = order[k]
        for table in options(q):
            comps[q] = table
            yield from rec(k + 1)
        comps[q] = None

    yield from rec(0)


def rank_profile(M: VectModule) -> dict:
    P = M.poset
    return {(a, b): M.map(a, b).rank() for b in range(len(P)) for a in bits(P.down[b])}


def are_isomorphic(M: Module, N: Module, *, cap: int = ISO_CAP, samples: int = 256,
                   rng: np.random.Generator | None = None) -> bool:
    """Decide whether ``M`` and ``N`` are isomorphic.

    Vect: a random search for an invertible element of Hom(M, N) runs first; a
    negative answer is only returned when it is certified (dimension or rank
    invariants differ, or the whole Hom space was enumerated).
    """
    _check_pair(M, N)
    if M.objs != N.objs:
        return False
    if isinstance(M.category, SetCategory):
        for _ in set_nat_trans(M, N, bijective=True, cap=cap):
            return True
        return False
    if rank_profile(M) != rank_profile(N):
        return False
    B = hom_basis_matrix(M, N)
    k, p = B.cols, M.category.p
    if k == 0:
        return M.total() == 0
    rng = rng or np.random.default_rng(0)
    for _ in range(samples):
        c = rng.integers(0, p, size=k)
        if map_from_flat(M, N, (B.a @ c) % p).is_iso():
            return True
    if p ** k > cap:
        raise SearchCapExceeded(f"Hom space has {p}^{k} elements")
    for c in itertools.product(range(p), repeat=k):
        if map_from_flat(M, N, (B.a @ np.array(c)) % p).is_iso():
            return True
    return False


def find_isomorphism(M: VectModule, N: VectModule, *, samples: int = 512,
                     rng: np.random.Generator | None = None) -> ModuleMap | None:
    """Best-effort random search for an explicit isomorphism."""
    if M.objs != N.objs:
        return None
    B = hom_basis_matrix(M, N)
    p = M.category.p
    rng = rng or np.random.default_rng(0)
    if B.cols == 0:
        return ModuleMap.identity(M) if M.total() == 0 else None
    for _ in range(samples):
        c = rng.integers(0, p, size=B.cols)
        f = map_from_flat(M, N, (B.a @ c) % p)
        if f.is_iso():
            return f
    return None
