"""Finite posets stored as bitsets over dense integer indices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

DOWN_SET_CAP = 4096


class PosetError(ValueError):
    pass


class CycleError(PosetError):
    pass


class UnknownLabel(PosetError, KeyError):
    pass


class NotMonotone(PosetError):
    pass


class ExplosionError(PosetError):
    pass


class NotALattice(PosetError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


class FinitePoset:
    """A finite partial order.

    ``down[p]`` is the bitset of elements ``<= p`` and ``up[p]`` of elements ``>= p``.
    """

    __slots__ = ("labels", "down", "up", "hasse", "lower_covers", "upper_covers",
                 "order", "_index", "__weakref__")

    def __init__(self, labels: Sequence[str], down: Sequence[int]):
        n = len(labels)
        if len(set(labels)) != n:
            raise PosetError("duplicate labels")
        self.labels = tuple(str(x) for x in labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self.down = tuple(down)
        up = [0] * n
        for q in range(n):
            for p in bits(self.down[q]):
                up[p] |= 1 << q
        self.up = tuple(up)
        lower = []
        for q in range(n):
            strict = self.down[q] & ~(1 << q)
            covers = [p for p in bits(strict) if not (self.up[p] & strict & ~(1 << p))]
            lower.append(tuple(covers))
        self.lower_covers = tuple(lower)
        upper: list[list[int]] = [[] for _ in range(n)]
        for q in range(n):
            for p in lower[q]:
                upper[p].append(q)
        self.upper_covers = tuple(tuple(u) for u in upper)
        self.hasse = tuple((p, q) for q in range(n) for p in lower[q])
        # a linear extension: sort by number of elements below
        self.order = tuple(sorted(range(n), key=lambda i: (self.down[i].bit_count(), i)))

    # construction ---------------------------------------------------------
    @classmethod
    def from_leq(cls, labels: Sequence[str], leq) -> "FinitePoset":
        """Build from a predicate or a boolean matrix that is already a partial order."""
        n = len(labels)
        fn = leq if callable(leq) else (lambda i, j: bool(leq[i][j]))
        down = [mask_of(p for p in range(n) if fn(p, q)) for q in range(n)]
        P = cls(labels, down)
        P.check_axioms()
        return P

    def check_axioms(self) -> None:
        for p in range(len(self)):
            if not self.down[p] >> p & 1:
                raise PosetError(f"not reflexive at {self.labels[p]}")
            for q in bits(self.down[p]):
                if q != p and self.down[q] >> p & 1:
                    raise CycleError(f"{self.labels[p]} and {self.labels[q]} are mutually below")
                if self.down[q] & ~self.down[p]:
                    raise PosetError("not transitive")

    # basic queries --------------------------------------------------------
    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise UnknownLabel(label) from None

    def leq(self, p: int, q: int) -> bool:
        return bool(self.down[q] >> p & 1)

    def lt(self, p: int, q: int) -> bool:
        return p != q and self.leq(p, q)

    def comparable(self, p: int, q: int) -> bool:
        return self.leq(p, q) or self.leq(q, p)

    def leq_matrix(self) -> list[list[bool]]:
        return [[self.leq(p, q) for q in range(self.n)] for p in range(self.n)]

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def is_down_set(self, mask: int) -> bool:
        return all(self.down[q] & ~mask == 0 for q in bits(mask))

    def is_up_set(self, mask: int) -> bool:
        return all(self.up[q] & ~mask == 0 for q in bits(mask))

    def down_of(self, mask: int) -> int:
        out = 0
        for q in bits(mask):
            out |= self.down[q]
        return out

    def up_of(self, mask: int) -> int:
        out = 0
        for q in bits(mask):
            out |= self.up[q]
        return out

    def minimal(self, mask: int) -> list[int]:
        return [p for p in bits(mask) if not (self.down[p] & mask & ~(1 << p))]

    def maximal(self, mask: int) -> list[int]:
        return [p for p in bits(mask) if not (self.up[p] & mask & ~(1 << p))]

    def induced_covers(self, mask: int) -> list[tuple[int, int]]:
        """Covering pairs of the subposet on ``mask``."""
        out = []
        for q in bits(mask):
            strict = self.down[q] & mask & ~(1 << q)
            for p in bits(strict):
                if not (self.up[p] & strict & ~(1 << p)):
                    out.append((p, q))
        return out

    def relations(self) -> list[tuple[int, int]]:
        return [(p, q) for q in range(self.n) for p in bits(self.down[q]) if p != q]

    def subposet(self, mask: int) -> tuple["FinitePoset", list[int]]:
        keep = list(bits(mask))
        pos = {old: new for new, old in enumerate(keep)}
        down = [mask_of(pos[p] for p in bits(self.down[q] & mask)) for q in keep]
        return FinitePoset([self.labels[i] for i in keep], down), keep

    def format_mask(self, mask: int) -> str:
        return "{" + ",".join(self.labels[i] for i in bits(mask)) + "}"

    # lattice operations ---------------------------------------------------
    def least(self, mask: int) -> int | None:
        for p in bits(mask):
            if self.up[p] & mask == mask:
                return p
        return None

    def greatest(self, mask: int) -> int | None:
        for p in bits(mask):
            if self.down[p] & mask == mask:
                return p
        return None

    def upper_bounds(self, elems: Iterable[int]) -> int:
        ub = self.full_mask
        for x in elems:
            ub &= self.up[x]
        return ub

    def lower_bounds(self, elems: Iterable[int]) -> int:
        lb = self.full_mask
        for x in elems:
            lb &= self.down[x]
        return lb

    def join(self, elems: Iterable[int]) -> int:
        j = self.least(self.upper_bounds(elems))
        if j is None:
            raise NotALattice("join does not exist")
        return j

    def meet(self, elems: Iterable[int]) -> int:
        m = self.greatest(self.lower_bounds(elems))
        if m is None:
            raise NotALattice("meet does not exist")
        return m

    def is_lattice(self) -> bool:
        if self.n == 0:
            return False
        try:
            self.join([])
            self.meet([])
            for a in range(self.n):
                for b in range(a + 1, self.n):
                    self.join([a, b])
                    self.meet([a, b])
        except NotALattice:
            return False
        return True

    def __repr__(self) -> str:
        return f"FinitePoset({len(self)} elements, {len(self.hasse)} covers)"


def build_poset(labels: Sequence[str], strict_relations: Iterable[tuple[str, str]]) -> FinitePoset:
    """Poset generated by ``lo <= hi`` pairs, closed reflexively and transitively."""
    labels = [str(x) for x in labels]
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise PosetError("duplicate labels")
    n = len(labels)
    down = [1 << i for i in range(n)]
    for lo, hi in strict_relations:
        if lo not in index:
            raise UnknownLabel(lo)
        if hi not in index:
            raise UnknownLabel(hi)
        down[index[hi]] |= 1 << index[lo]
    # Warshall on bitsets
    for k in range(n):
        bit = 1 << k
        dk = down[k]
        for q in range(n):
            if down[q] & bit:
                down[q] |= dk
    for q in range(n):
        for p in bits(down[q]):
            if p != q and down[p] >> q & 1:
                raise CycleError(f"{labels[p]} and {labels[q]} lie on a cycle")
    return FinitePoset(labels, down)


def chain(n: int, prefix: str = "") -> FinitePoset:
    labels = [f"{prefix}{i}" for i in range(n)]
    return FinitePoset(labels, [(1 << (i + 1)) - 1 for i in range(n)])


def antichain(n: int, prefix: str = "x") -> FinitePoset:
    return FinitePoset([f"{prefix}{i}" for i in range(n)], [1 << i for i in range(n)])


def product(P: FinitePoset, Q: FinitePoset) -> FinitePoset:
    labels = [f"({a},{b})" for a in P.labels for b in Q.labels]
    m = len(Q)

    def leq(i, j):
        return P.leq(i // m, j // m) and Q.leq(i % m, j % m)

    return FinitePoset.from_leq(labels, leq)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DownSet:
    poset: FinitePoset
    members: int

    def __post_init__(self):
        if not self.poset.is_down_set(self.members):
            raise PosetError("not down-closed")

    def __contains__(self, p: int) -> bool:
        return bool(self.members >> p & 1)

    def __iter__(self):
        return bits(self.members)

    def __len__(self) -> int:
        return self.members.bit_count()

    def labels(self) -> list[str]:
        return [self.poset.labels[i] for i in self]


def principal_down(P: FinitePoset, p: int) -> DownSet:
    if not 0 <= p < len(P):
        raise IndexError(p)
    return DownSet(P, P.down[p])


def principal_up(P: FinitePoset, p: int) -> int:
    if not 0 <= p < len(P):
        raise IndexError(p)
    return P.up[p]


def _check_indices(P: FinitePoset, S: Iterable[int]) -> list[int]:
    S = list(S)
    for p in S:
        if not 0 <= p < len(P):
            raise IndexError(p)
    return S


def down_closure(P: FinitePoset, S: Iterable[int]) -> DownSet:
    return DownSet(P, P.down_of(mask_of(_check_indices(P, S))))


def up_closure(P: FinitePoset, S: Iterable[int]) -> int:
    return P.up_of(mask_of(_check_indices(P, S)))


# ---------------------------------------------------------------------------
class MonotoneMap:
    """Order-preserving map given by an image table."""

    __slots__ = ("source", "target", "image", "__weakref__")

    def __init__(self, source: FinitePoset, target: FinitePoset, image: Sequence[int], *, check: bool = True):
        self.source = source
        self.target = target
        self.image = tuple(int(x) for x in image)
        if len(self.image) != len(source):
            raise PosetError("image table has the wrong length")
        if any(not 0 <= x < len(target) for x in self.image):
            raise PosetError("image out of range")
        if check and not is_monotone_valid(self):
            raise NotMonotone("map does not preserve order")

    def __call__(self, p: int) -> int:
        return self.image[p]

    def image_mask(self, mask: int) -> int:
        return mask_of(self.image[p] for p in bits(mask))

    def compose(self, other: "MonotoneMap") -> "MonotoneMap":
        """``self ∘ other``."""
        if other.target is not self.source:
            raise PosetError("maps are not composable")
        return MonotoneMap(other.source, self.target, [self.image[x] for x in other.image], check=False)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MonotoneMap) and self.source is other.source
                and self.target is other.target and self.image == other.image)

    def __hash__(self):
        return hash(self.image)

    def __repr__(self) -> str:
        return f"MonotoneMap({len(self.source)} -> {len(self.target)})"

    @classmethod
    def identity(cls, P: FinitePoset) -> "MonotoneMap":
        return cls(P, P, range(len(P)), check=False)

    @classmethod
    def constant(cls, P: FinitePoset, Q: FinitePoset, q: int) -> "MonotoneMap":
        return cls(P, Q, [q] * len(P), check=False)


def is_monotone_valid(f: MonotoneMap) -> bool:
    P, Q = f.source, f.target
    return all(Q.leq(f.image[p], f.image[q]) for p, q in P.hasse)


def is_full(f: MonotoneMap) -> bool:
    P, Q = f.source, f.target
    n = len(P)
    return all(P.leq(p, q) or not Q.leq(f.image[p], f.image[q])
               for p in range(n) for q in range(n))


def is_injective(f: MonotoneMap) -> bool:
    return len(set(f.image)) == len(f.image)


def sublevel(f: MonotoneMap, q: int) -> int:
    """``{p : f(p) <= q}`` as a bitset on the source."""
    dq = f.target.down[q]
    return mask_of(p for p, x in enumerate(f.image) if dq >> x & 1)


def superlevel(f: MonotoneMap, q: int) -> int:
    uq = f.target.up[q]
    return mask_of(p for p, x in enumerate(f.image) if uq >> x & 1)


# ---------------------------------------------------------------------------
def enumerate_down_sets(P: FinitePoset, cap: int = DOWN_SET_CAP) -> list[int]:
    """All down sets of ``P`` as bitsets, sorted by size then value."""
    found = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for S in frontier:
            for p in range(len(P)):
                if not S >> p & 1 and P.down[p] & ~S == 1 << p:
                    T = S | 1 << p
                    if T not in found:
                        found.add(T)
                        if len(found) > cap:
                            raise ExplosionError(f"more than {cap} down sets")
                        nxt.append(T)
        frontier = nxt
    return sorted(found, key=lambda m: (m.bit_count(), m))


class DownLattice:
    """The lattice of down sets of ``base`` with the embedding ``p -> D_p``."""

    def __init__(self, base: FinitePoset, cap: int = DOWN_SET_CAP):
        self.base = base
        self.masks = enumerate_down_sets(base, cap)
        self.position = {m: i for i, m in enumerate(self.masks)}
        N = len(self.masks)
        down = []
        for j, T in enumerate(self.masks):
            down.append(mask_of(i for i, S in enumerate(self.masks[: j + 1]) if S & ~T == 0))
        labels = [base.format_mask(m) for m in self.masks]
        self.poset = FinitePoset(labels, down)
        self.iota = MonotoneMap(base, self.poset, [self.position[base.down[p]] for p in range(len(base))])
        assert len(down) == N

    def element(self, mask: int) -> int:
        return self.position[mask]

    def mask(self, i: int) -> int:
        return self.masks[i]


def down_lattice(P: FinitePoset, cap: int = DOWN_SET_CAP) -> tuple[FinitePoset, MonotoneMap]:
    L = DownLattice(P, cap)
    if not (is_full(L.iota) and is_injective(L.iota)):
        raise PosetError("embedding into down sets is not full")  # pragma: no cover
    return L.poset, L.iota
