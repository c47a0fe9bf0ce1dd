"""Pullbacks, left and right Kan extensions along poset maps, and their adjunction data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagrams import (Module, ModuleMap, SubColimit, SubLimit, colimit, limit, make_module)
from .poset import DownLattice, MonotoneMap, bits, mask_of, sublevel, superlevel


def _cache(M: Module) -> dict:
    return M.__dict__.setdefault("_kan_cache", {})


# ---------------------------------------------------------------------------
def pullback(f: MonotoneMap, M: Module) -> Module:
    """``p -> M(f(p))`` with borrowed structure maps."""
    if M.poset is not f.target:
        raise ValueError("module does not live on the target of f")
    key = ("pull", id(f))
    hit = _cache(M).get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    P = f.source
    objs = [M.objs[f.image[p]] for p in range(len(P))]
    edges = {(a, b): M.map(f.image[a], f.image[b]) for a, b in P.hasse}
    out = make_module(P, M.category, objs, edges)
    _cache(M)[key] = (f, out)
    return out


def pullback_map(f: MonotoneMap, alpha: ModuleMap) -> ModuleMap:
    return ModuleMap(pullback(f, alpha.source), pullback(f, alpha.target),
                     [alpha.components[f.image[p]] for p in range(len(f.source))])


# ---------------------------------------------------------------------------
class LeftKan:
    """``f_*M`` with the colimit presentation used at every target element."""

    def __init__(self, f: MonotoneMap, M: Module, relations: str = "hasse"):
        if M.poset is not f.source:
            raise ValueError("module does not live on the source of f")
        self.f, self.source = f, M
        Q = f.target
        self.colims: list[SubColimit] = [colimit(M, sublevel(f, q), relations) for q in range(len(Q))]
        edges = {(q, r): self.induced(q, r) for q, r in Q.hasse}
        self.module = make_module(Q, M.category, [c.obj for c in self.colims], edges)

    def leg(self, q: int, p: int):
        return self.colims[q].legs[p]

    def induced(self, q: int, r: int):
        src = self.colims[q]
        return src.factor({p: self.leg(r, p) for p in src.members}, self.colims[r].obj)

    def factor(self, q: int, cocone: dict, target: int):
        return self.colims[q].factor(cocone, target)


class RightKan:
    """``f†M`` with the limit presentation used at every target element."""

    def __init__(self, f: MonotoneMap, M: Module, relations: str = "hasse"):
        if M.poset is not f.source:
            raise ValueError("module does not live on the source of f")
        self.f, self.source = f, M
        Q = f.target
        self.lims: list[SubLimit] = [limit(M, superlevel(f, q), relations) for q in range(len(Q))]
        edges = {(q, r): self.induced(q, r) for q, r in Q.hasse}
        self.module = make_module(Q, M.category, [c.obj for c in self.lims], edges)

    def leg(self, q: int, p: int):
        return self.lims[q].legs[p]

    def induced(self, q: int, r: int):
        tgt = self.lims[r]
        return tgt.factor({p: self.leg(q, p) for p in tgt.members}, self.lims[q].obj)

    def factor(self, q: int, cone: dict, source: int):
        return self.lims[q].factor(cone, source)


def left_kan(f: MonotoneMap, M: Module) -> LeftKan:
    key = ("push", id(f))
    hit = _cache(M).get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    data = LeftKan(f, M)
    _cache(M)[key] = (f, data)
    return data


def right_kan(f: MonotoneMap, M: Module) -> RightKan:
    key = ("pushopen", id(f))
    hit = _cache(M).get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    data = RightKan(f, M)
    _cache(M)[key] = (f, data)
    return data


def pushforward(f: MonotoneMap, M: Module) -> Module:
    """Left Kan extension: colimit over each sublevel set."""
    return left_kan(f, M).module


def pushforward_open(f: MonotoneMap, M: Module) -> Module:
    """Right Kan extension: limit over each superlevel set."""
    return right_kan(f, M).module


def pushforward_map(f: MonotoneMap, alpha: ModuleMap) -> ModuleMap:
    src, tgt = left_kan(f, alpha.source), left_kan(f, alpha.target)
    cat = alpha.category
    comps = []
    for q in range(len(f.target)):
        members = src.colims[q].members
        cocone = {p: cat.compose(tgt.leg(q, p), alpha.components[p]) for p in members}
        comps.append(src.factor(q, cocone, tgt.module.objs[q]))
    return ModuleMap(src.module, tgt.module, comps)


def pushforward_open_map(f: MonotoneMap, alpha: ModuleMap) -> ModuleMap:
    src, tgt = right_kan(f, alpha.source), right_kan(f, alpha.target)
    cat = alpha.category
    comps = []
    for q in range(len(f.target)):
        cone = {p: cat.compose(alpha.components[p], src.leg(q, p)) for p in tgt.lims[q].members}
        comps.append(tgt.factor(q, cone, src.module.objs[q]))
    return ModuleMap(src.module, tgt.module, comps)


# ---------------------------------------------------------------------------
def unit(f: MonotoneMap, M: Module) -> ModuleMap:
    """``M -> f*f_*M``: the cocone leg into the colimit at ``f(p)``."""
    K = left_kan(f, M)
    target = pullback(f, K.module)
    return ModuleMap(M, target, [K.leg(f.image[p], p) for p in range(len(f.source))])


def counit(f: MonotoneMap, N: Module) -> ModuleMap:
    """``f_*f*N -> N`` induced by the maps ``N(f(p) <= q)``."""
    pulled = pullback(f, N)
    K = left_kan(f, pulled)
    comps = []
    for q in range(len(f.target)):
        cocone = {p: N.map(f.image[p], q) for p in K.colims[q].members}
        comps.append(K.factor(q, cocone, N.objs[q]))
    return ModuleMap(K.module, N, comps)


def unit_dagger(f: MonotoneMap, N: Module) -> ModuleMap:
    """``N -> f†f*N`` induced by the maps ``N(q <= f(p))``."""
    pulled = pullback(f, N)
    K = right_kan(f, pulled)
    comps = []
    for q in range(len(f.target)):
        cone = {p: N.map(q, f.image[p]) for p in K.lims[q].members}
        comps.append(K.factor(q, cone, N.objs[q]))
    return ModuleMap(N, K.module, comps)


def counit_dagger(f: MonotoneMap, M: Module) -> ModuleMap:
    """``f*f†M -> M``: the cone leg out of the limit at ``f(p)``."""
    K = right_kan(f, M)
    source = pullback(f, K.module)
    return ModuleMap(source, M, [K.leg(f.image[p], p) for p in range(len(f.source))])


@dataclass
class AdjunctionWitness:
    unit: ModuleMap
    counit: ModuleMap
    unit_dagger: ModuleMap
    counit_dagger: ModuleMap


def adjunction_witness(f: MonotoneMap, M: Module, N: Module) -> AdjunctionWitness:
    """Units and counits for a source module ``M`` and a target module ``N``."""
    return AdjunctionWitness(unit(f, M), counit(f, N), unit_dagger(f, N), counit_dagger(f, M))


def triangle_identities(f: MonotoneMap, M: Module, N: Module) -> tuple[bool, bool]:
    """Check ``χ_{f_*M} ∘ f_*υ_M = 1`` and ``f*χ_N ∘ υ_{f*N} = 1``."""
    first = counit(f, pushforward(f, M)).compose(pushforward_map(f, unit(f, M)))
    second = pullback_map(f, counit(f, N)).compose(unit(f, pullback(f, N)))
    return first.is_identity(), second.is_identity()


def pixelize_lower(f: MonotoneMap, M: Module) -> tuple[Module, ModuleMap]:
    """``f_*f*M`` and its counit to ``M``."""
    eps = counit(f, M)
    return eps.source, eps


def pixelize_upper(f: MonotoneMap, M: Module) -> tuple[Module, ModuleMap]:
    """``f†f*M`` and the unit from ``M``."""
    eta = unit_dagger(f, M)
    return eta.target, eta


# ---------------------------------------------------------------------------
def is_basic_cover(members: list[int]) -> bool:
    """Pairwise intersections must be unions of members."""
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            inter = a & b
            covered = 0
            for c in members:
                if c & ~inter == 0:
                    covered |= c
            if covered != inter:
                return False
    return True


def sample_basic_cover(L: DownLattice, S: int, rng: np.random.Generator, tries: int = 50) -> list[int]:
    """A random basic cover of the down set ``S`` by down sets inside it."""
    P = L.base
    inside = [m for m in L.masks if m and m & ~S == 0]
    for _ in range(tries):
        strategy = rng.integers(3)
        if strategy == 0:
            fam = {P.down[p] for p in bits(S)}
        else:
            k = int(rng.integers(1, max(2, min(len(inside), 5)) + 1))
            fam = {inside[i] for i in rng.choice(len(inside), size=min(k, len(inside)), replace=False)}
            for p in P.maximal(S):
                if not any(m >> p & 1 for m in fam):
                    fam.add(P.down[p])
        if strategy == 1:
            changed = True
            while changed:
                changed = False
                for a in list(fam):
                    for b in list(fam):
                        c = a & b
                        if c and c not in fam:
                            fam.add(c)
                            changed = True
        members = sorted(fam, key=lambda m: (m.bit_count(), m))
        union = 0
        for m in members:
            union |= m
        if union == S and is_basic_cover(members):
            return members
    return [S]


@dataclass
class CosheafReport:
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def cover_comparison(L: DownLattice, hatM: Module, S: int, members: list[int]):
    """Canonical map from the colimit over a cover into ``hatM(S)``."""
    idx = [L.element(m) for m in members]
    sub = colimit(hatM, mask_of(idx))
    s = L.element(S)
    cocone = {i: hatM.map(i, s) for i in idx}
    return sub, sub.factor(cocone, hatM.objs[s])


def check_basic_cosheaf(P, M: Module, sample_count: int = 30, *, rng=None, cap: int = 4096) -> CosheafReport:
    """Sample basic covers of down sets and test the cosheaf condition for ``ι_*M``."""
    rng = rng or np.random.default_rng(0)
    L = DownLattice(P, cap)
    hatM = pushforward(L.iota, M)
    cat = M.category
    report = CosheafReport()
    nonempty = [m for m in L.masks if m]
    for _ in range(sample_count):
        if not nonempty:
            break
        S = nonempty[int(rng.integers(len(nonempty)))]
        members = sample_basic_cover(L, S, rng)
        sub, comparison = cover_comparison(L, hatM, S, members)
        report.checked += 1
        if sub.obj != hatM.objs[L.element(S)] or not cat.is_iso(comparison):
            report.violations.append((P.format_mask(S), [P.format_mask(m) for m in members]))
    return report
