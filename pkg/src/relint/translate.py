"""Weighted posets, translation families, Galois approximations and shift functors."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .diagrams import Module, ModuleMap, colimit, make_module
from .kan import left_kan, pullback, pullback_map, pushforward_map
from .poset import (DOWN_SET_CAP, DownLattice, DownSet, FinitePoset, MonotoneMap, NotALattice,
                    bits, is_full, mask_of, sublevel, superlevel)

INF = math.inf


class TranslationError(ValueError):
    pass


class ThickeningAxiomError(TranslationError):
    pass


class PreconditionError(ValueError):
    pass


def as_weight(x) -> Fraction | float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    if isinstance(x, float) and math.isinf(x):
        return INF
    return Fraction(x)


def fmt_rational(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
@dataclass
class WeightReport:
    ok: bool
    axiom: int | None = None
    witness: tuple = ()
    message: str = ""

    def __bool__(self):
        return self.ok


class WeightedPoset:
    """A poset with a Lawvere-style weight ``w(p, q)``."""

    def __init__(self, poset: FinitePoset, w: Sequence[Sequence]):
        n = len(poset)
        if len(w) != n or any(len(row) != n for row in w):
            raise ValueError("weight matrix shape does not match the poset")
        self.poset = poset
        self.w = tuple(tuple(as_weight(x) for x in row) for row in w)

    def __call__(self, p: int, q: int):
        return self.w[p][q]

    def finite_values(self) -> list[Fraction]:
        return sorted({x for row in self.w for x in row if not (isinstance(x, float) and math.isinf(x))})


def validate_weighted(wP: WeightedPoset) -> WeightReport:
    P, w = wP.poset, wP.w
    n = len(P)
    for p in range(n):
        for q in range(n):
            x = w[p][q]
            if x < 0:
                return WeightReport(False, 0, (p, q), "negative weight")
            if P.leq(q, p) and x != 0:
                return WeightReport(False, 1, (p, q), "w(p,q) must vanish when p >= q")
            if P.lt(p, q) and not x > 0:
                return WeightReport(False, 2, (p, q), "w(p,q) must be positive when p < q")
    for p in range(n):
        for r in range(n):
            for q in range(n):
                if w[p][q] > w[p][r] + w[r][q]:
                    return WeightReport(False, 3, (p, r, q), "triangle inequality fails")
    return WeightReport(True)


def path_weighting(P: FinitePoset, up_cost: dict[tuple[int, int], Fraction],
                   extra: dict[tuple[int, int], Fraction] | None = None) -> WeightedPoset:
    """Shortest zig-zag weights: moving down is free, moving up a cover costs ``up_cost``.

    ``extra`` adds further directed arcs (for instance between incomparable elements).
    """
    n = len(P)
    d = [[INF] * n for _ in range(n)]
    for p in range(n):
        for q in bits(P.down[p]):
            d[p][q] = Fraction(0)
    for (p, q), c in up_cost.items():
        d[p][q] = min(d[p][q], Fraction(c))
    for (p, q), c in (extra or {}).items():
        d[p][q] = min(d[p][q], Fraction(c))
    for k in range(n):
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            for j in range(n):
                v = dik + d[k][j]
                if v < d[i][j]:
                    d[i][j] = v
    return WeightedPoset(P, d)


def time_ball(wP: WeightedPoset, p: int, eps) -> DownSet:
    eps = as_weight(eps)
    if eps < 0:
        raise ValueError("negative radius")
    row = wP.w[p]
    return DownSet(wP.poset, mask_of(r for r in range(len(wP.poset)) if row[r] <= eps))


def colimit_extension(M: Module, masks: Sequence[int]) -> Module:
    """The module ``p -> colim M|masks[p]`` for an increasing family of subsets."""
    P = M.poset
    colims = [colimit(M, m) for m in masks]
    edges = {}
    for a, b in P.hasse:
        if masks[a] & ~masks[b]:
            raise ValueError("subset family is not increasing")
        src = colims[a]
        edges[(a, b)] = src.factor({x: colims[b].legs[x] for x in src.members}, colims[b].obj)
    return make_module(P, M.category, [c.obj for c in colims], edges)


def shift_weighted(wP: WeightedPoset, M: Module, eps) -> Module:
    """Colimit of ``M`` over each ``eps``-time ball."""
    return colimit_extension(M, [time_ball(wP, p, eps).members for p in range(len(wP.poset))])


# ---------------------------------------------------------------------------
class TranslationFamily:
    """Monotone endomaps ``T_eps`` of a poset indexed by a finite ladder of rationals.

    Evaluation at an arbitrary ``eps`` snaps down to the largest ladder value.
    """

    def __init__(self, poset: FinitePoset, ladder: Sequence, maps: dict, *,
                 weak: bool = False, validate: bool = True):
        lad = sorted({Fraction(x) for x in ladder})
        if not lad or lad[0] != 0:
            raise TranslationError("ladder must start at 0")
        self.poset = poset
        self.ladder = tuple(lad)
        self.maps = {}
        for e in lad:
            img = maps.get(e, maps.get(str(e)))
            if img is None:
                raise TranslationError(f"no map for ladder value {e}")
            self.maps[e] = tuple(int(x) for x in img)
        self.weak = weak
        self._mono: dict[Fraction, MonotoneMap] = {}
        if validate:
            report = self.validate()
            if not report.ok:
                raise TranslationError(report.message)

    def snap(self, eps) -> Fraction:
        eps = as_weight(eps)
        if eps < 0:
            raise ValueError("negative eps")
        best = self.ladder[0]
        for e in self.ladder:
            if e <= eps:
                best = e
            else:
                break
        return best

    def at(self, eps) -> tuple[int, ...]:
        return self.maps[self.snap(eps)]

    def __call__(self, eps, p: int) -> int:
        return self.at(eps)[p]

    def map(self, eps) -> MonotoneMap:
        e = self.snap(eps)
        m = self._mono.get(e)
        if m is None:
            m = MonotoneMap(self.poset, self.poset, self.maps[e], check=False)
            self._mono[e] = m
        return m

    @property
    def top(self) -> Fraction:
        return self.ladder[-1]

    def candidates(self, halves: bool = True) -> list[Fraction]:
        """Values of eps at which (T_eps, T_2eps) can change, capped at the top."""
        vals = set(self.ladder)
        if halves:
            vals |= {e / 2 for e in self.ladder}
        return sorted(vals)

    def validate(self) -> "TranslationReport":
        return validate_translation(self)

    def is_superlinear(self) -> bool:
        return _superlinear_witness(self) is None

    def __repr__(self):
        return f"TranslationFamily({len(self.poset)} elements, ladder {[str(e) for e in self.ladder]})"


@dataclass
class TranslationReport:
    ok: bool
    message: str = ""
    witness: tuple = ()


def _superlinear_witness(T: TranslationFamily):
    P = T.poset
    for e1 in T.ladder:
        t1 = T.maps[e1]
        for e2 in T.ladder:
            t2, t12 = T.maps[e2], T.at(e1 + e2)
            for p in range(len(P)):
                if not P.leq(t2[t1[p]], t12[p]):
                    return (e1, e2, p)
    return None


def validate_translation(T: TranslationFamily) -> TranslationReport:
    P = T.poset
    n = len(P)
    for e in T.ladder:
        t = T.maps[e]
        if len(t) != n or any(not 0 <= x < n for x in t):
            return TranslationReport(False, f"T_{e} is not an endomap")
        for a, b in P.hasse:
            if not P.leq(t[a], t[b]):
                return TranslationReport(False, f"T_{e} is not monotone", (e, a, b))
        for p in range(n):
            if not P.leq(p, t[p]):
                return TranslationReport(False, f"T_{e} is not a translation at {P.labels[p]}", (e, p))
    if not T.weak and T.maps[T.ladder[0]] != tuple(range(n)):
        return TranslationReport(False, "T_0 is not the identity")
    for e, e2 in zip(T.ladder, T.ladder[1:]):
        for p in range(n):
            if not P.leq(T.maps[e][p], T.maps[e2][p]):
                return TranslationReport(False, f"not monotone in eps between {e} and {e2}", (e, e2, p))
    w = _superlinear_witness(T)
    if w is not None:
        return TranslationReport(False, "not superlinear", w)
    return TranslationReport(True)


def identity_family(P: FinitePoset) -> TranslationFamily:
    return TranslationFamily(P, [0], {Fraction(0): tuple(range(len(P)))})


def thickening_from_weighting(wP: WeightedPoset, cap: int = DOWN_SET_CAP) -> TranslationFamily:
    """``T_eps(S) = union of eps-balls`` on the lattice of down sets of ``wP``."""
    P = wP.poset
    L = DownLattice(P, cap)
    ladder = sorted({Fraction(0), *wP.finite_values()})
    maps = {}
    for e in ladder:
        balls = [time_ball(wP, p, e).members for p in range(len(P))]
        img = []
        for S in L.masks:
            U = 0
            for p in bits(S):
                U |= balls[p]
            img.append(L.element(U))
        maps[e] = tuple(img)
    T = TranslationFamily(L.poset, ladder, maps, validate=False)
    T.lattice = L
    report = validate_translation(T)
    if not report.ok:
        raise ThickeningAxiomError(report.message)
    for e in ladder:
        t = maps[e]
        for i, S in enumerate(L.masks):
            for j, S2 in enumerate(L.masks):
                if L.masks[t[L.element(S | S2)]] != L.masks[t[i]] | L.masks[t[j]]:
                    raise ThickeningAxiomError(f"locality fails at eps={e}")
    return T


# ---------------------------------------------------------------------------
def _subset_scan(f: MonotoneMap, dual: bool, cap: int = 16, samples: int = 2000, rng=None) -> bool:
    L, Q = f.source, f.target
    n = len(L)
    Lbound = L.meet if dual else L.join
    Qcone = Q.down if dual else Q.up
    img = f.image

    def ok(subset_join: int, cone: int) -> bool:
        # every common bound of f(S) must bound f(join S)
        return cone & ~Qcone[img[subset_join]] == 0

    if n <= cap:
        start = Lbound([])
        stack = [(0, start, Q.full_mask)]
        while stack:
            k, j, cone = stack.pop()
            if not ok(j, cone):
                return False
            for x in range(k, n):
                stack.append((x + 1, Lbound([j, x]), cone & Qcone[img[x]]))
        return True
    rng = rng or np.random.default_rng(0)
    if not ok(Lbound([]), Q.full_mask):
        return False
    for a in range(n):
        for b in range(a, n):
            if not ok(Lbound([a, b]), Qcone[img[a]] & Qcone[img[b]]):
                return False
    for _ in range(samples):
        S = [int(x) for x in np.flatnonzero(rng.integers(0, 2, size=n))]
        cone = Q.full_mask
        for x in S:
            cone &= Qcone[img[x]]
        if not ok(Lbound(S), cone):
            return False
    return True


def respects_joins(f: MonotoneMap, cap: int = 16) -> bool:
    """If every ``f(x), x in S`` lies below ``q`` then so does ``f(join S)``."""
    return _subset_scan(f, dual=False, cap=cap)


def respects_meets(f: MonotoneMap, cap: int = 16) -> bool:
    return _subset_scan(f, dual=True, cap=cap)


@dataclass
class GaloisPair:
    f: MonotoneMap
    flat: tuple[int, ...]
    sharp: tuple[int, ...]


def galois(f: MonotoneMap) -> GaloisPair:
    L = f.source
    if not L.is_lattice():
        raise NotALattice("source of f is not a lattice")
    Q = f.target
    flat = tuple(L.join(bits(sublevel(f, q))) for q in range(len(Q)))
    sharp = tuple(L.meet(bits(superlevel(f, q))) for q in range(len(Q)))
    return GaloisPair(f, flat, sharp)


def lower_approx_translation(f: MonotoneMap, T: TranslationFamily, *, check: bool = True) -> TranslationFamily:
    """``flat ∘ T_eps ∘ f`` on the source lattice."""
    if check and not respects_joins(f):
        raise PreconditionError("f does not respect joins")
    g = galois(f)
    maps = {e: tuple(g.flat[T.maps[e][f.image[x]]] for x in range(len(f.source))) for e in T.ladder}
    return TranslationFamily(f.source, T.ladder, maps, weak=T.weak)


def upper_approx_translation(f: MonotoneMap, T: TranslationFamily) -> tuple[TranslationFamily, bool]:
    """``sharp ∘ T_eps ∘ f`` together with whether it happened to be superlinear."""
    if not is_full(f):
        raise PreconditionError("f is not full")
    g = galois(f)
    maps = {e: tuple(g.sharp[T.maps[e][f.image[x]]] for x in range(len(f.source))) for e in T.ladder}
    fam = TranslationFamily(f.source, T.ladder, maps, weak=T.weak, validate=False)
    base = validate_translation(fam)
    superlinear = _superlinear_witness(fam) is None
    if not base.ok and base.message != "not superlinear":
        raise TranslationError(base.message)
    return fam, superlinear


# ---------------------------------------------------------------------------
# shift functors

class IntrinsicShift:
    """Shifts over the poset carrying the translation family: ``M^eps = T_eps* M``."""

    kind = "intrinsic"

    def __init__(self, T: TranslationFamily):
        self.T = T
        self.poset = T.poset

    @property
    def ladder(self):
        return self.T.ladder

    def candidates(self, halves: bool = True):
        return self.T.candidates(halves)

    def module(self, M: Module, eps) -> Module:
        return pullback(self.T.map(eps), M)

    def map(self, alpha: ModuleMap, eps) -> ModuleMap:
        return pullback_map(self.T.map(eps), alpha)

    def eta(self, M: Module, eps) -> ModuleMap:
        t = self.T.at(eps)
        return ModuleMap(M, self.module(M, eps), [M.map(q, t[q]) for q in range(len(self.poset))])

    def eta_between(self, M: Module, e1, e2) -> ModuleMap:
        t1, t2 = self.T.at(e1), self.T.at(e2)
        return ModuleMap(self.module(M, e1), self.module(M, e2),
                         [M.map(t1[q], t2[q]) for q in range(len(self.poset))])

    def sigma(self, M: Module, e1, e2) -> ModuleMap:
        """``(M^e1)^e2 -> M^(e1+e2)``."""
        t1, t2, t12 = self.T.at(e1), self.T.at(e2), self.T.at(Fraction(e1) + Fraction(e2))
        src = self.module(self.module(M, e1), e2)
        return ModuleMap(src, self.module(M, Fraction(e1) + Fraction(e2)),
                         [M.map(t1[t2[q]], t12[q]) for q in range(len(self.poset))])


class RelativeShift:
    """Shifts of modules over ``P`` through ``f: P -> Q``: ``f* T_eps* f_* M``."""

    kind = "relative"

    def __init__(self, f: MonotoneMap, T: TranslationFamily):
        if T.poset is not f.target:
            raise ValueError("translation family must live on the target of f")
        self.f, self.T = f, T
        self.poset = f.source
        self._g: dict[Fraction, MonotoneMap] = {}

    @property
    def ladder(self):
        return self.T.ladder

    def candidates(self, halves: bool = True):
        return self.T.candidates(halves)

    def _shifted(self, eps) -> MonotoneMap:
        e = self.T.snap(eps)
        g = self._g.get(e)
        if g is None:
            t = self.T.maps[e]
            g = MonotoneMap(self.f.source, self.f.target, [t[x] for x in self.f.image], check=False)
            self._g[e] = g
        return g

    def module(self, M: Module, eps) -> Module:
        return pullback(self._shifted(eps), left_kan(self.f, M).module)

    def map(self, alpha: ModuleMap, eps) -> ModuleMap:
        return pullback_map(self._shifted(eps), pushforward_map(self.f, alpha))

    def eta(self, M: Module, eps) -> ModuleMap:
        K = left_kan(self.f, M)
        fi, t = self.f.image, self.T.at(eps)
        comps = [self._compose(M, K.module.map(fi[p], t[fi[p]]), K.leg(fi[p], p)) for p in range(len(self.poset))]
        return ModuleMap(M, self.module(M, eps), comps)

    @staticmethod
    def _compose(M, g, f):
        return M.category.compose(g, f)

    def eta_between(self, M: Module, e1, e2) -> ModuleMap:
        K = left_kan(self.f, M)
        fi, t1, t2 = self.f.image, self.T.at(e1), self.T.at(e2)
        return ModuleMap(self.module(M, e1), self.module(M, e2),
                         [K.module.map(t1[fi[p]], t2[fi[p]]) for p in range(len(self.poset))])

    def sigma(self, M: Module, e1, e2) -> ModuleMap:
        """Counit at ``T_e1* f_* M`` pulled back, followed by the shift structure map over Q."""
        e12 = Fraction(e1) + Fraction(e2)
        K = left_kan(self.f, M)
        FM = K.module
        X = self.module(M, e1)
        KX = left_kan(self.f, X)
        fi = self.f.image
        t1, t2, t12 = self.T.at(e1), self.T.at(e2), self.T.at(e12)
        comps = []
        for p in range(len(self.poset)):
            r = t2[fi[p]]
            cocone = {x: FM.map(t1[fi[x]], t1[r]) for x in KX.colims[r].members}
            chi = KX.factor(r, cocone, FM.objs[t1[r]])
            comps.append(M.category.compose(FM.map(t1[r], t12[fi[p]]), chi))
        return ModuleMap(self.module(X, e2), self.module(M, e12), comps)


@dataclass
class ShiftResult:
    module: Module
    eta: ModuleMap
    shift: RelativeShift


def relative_shift(f: MonotoneMap, T: TranslationFamily, M: Module, eps) -> ShiftResult:
    S = RelativeShift(f, T)
    return ShiftResult(S.module(M, eps), S.eta(M, eps), S)


def shift_three_step(wP: WeightedPoset, M: Module, eps, cap: int = DOWN_SET_CAP) -> Module:
    """Push into down sets, pull back along the thickening, restrict to principal down sets."""
    T = thickening_from_weighting(wP, cap)
    return RelativeShift(T.lattice.iota, T).module(M, eps)
