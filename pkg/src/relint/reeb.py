"""Reeb cosheaves of graphs with a height function, their pixelization and slicing."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .diagrams import ModuleMap, SetModule
from .kan import counit, pullback
from .poset import FinitePoset, MonotoneMap


class ReebError(ValueError):
    pass


@dataclass
class ReebSpace:
    """A finite graph whose height is given at vertices and linear along edges."""
    values: dict[str, Fraction]
    edges: list[tuple[str, str]]

    def __post_init__(self):
        self.values = {str(k): Fraction(str(v)) if not isinstance(v, Fraction) else v
                       for k, v in self.values.items()}
        self.edges = [(str(a), str(b)) for a, b in self.edges]
        for a, b in self.edges:
            if a not in self.values or b not in self.values:
                raise ReebError(f"edge {a}-{b} has an unknown endpoint")
        self.ids = sorted(self.values)

    @classmethod
    def from_json(cls, doc: dict) -> "ReebSpace":
        return cls({v["id"]: Fraction(str(v["value"])) for v in doc["vertices"]},
                   [tuple(e) for e in doc["edges"]])

    def to_json(self) -> dict:
        return {"vertices": [{"id": v, "value": _fmt(self.values[v])} for v in self.ids],
                "edges": [list(e) for e in self.edges]}

    def shifted(self, amount) -> "ReebSpace":
        amount = Fraction(amount)
        return ReebSpace({k: v + amount for k, v in self.values.items()}, list(self.edges))

    def value_range(self) -> tuple[Fraction, Fraction]:
        vals = list(self.values.values())
        return min(vals), max(vals)

    def components(self, lo, hi) -> "Components":
        """Connected components of the preimage of the open interval ``(lo, hi)``."""
        lo, hi = Fraction(lo), Fraction(hi)
        parent: dict = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for v in self.ids:
            if lo < self.values[v] < hi:
                parent[("v", v)] = ("v", v)
        for k, (a, b) in enumerate(self.edges):
            fa, fb = sorted((self.values[a], self.values[b]))
            present = (lo < fa < hi) if fa == fb else (fa < hi and fb > lo)
            if not present:
                continue
            node = ("e", k)
            parent[node] = node
            for end in (a, b):
                if ("v", end) in parent:
                    union(node, ("v", end))
        roots = sorted({find(x) for x in parent}, key=_node_key)
        index = {r: i for i, r in enumerate(roots)}
        return Components({x: index[find(x)] for x in parent}, len(roots))


def _node_key(x):
    return (x[0], str(x[1]))


@dataclass
class Components:
    label: dict
    count: int


def _fmt(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
@dataclass
class IntervalPoset:
    """Open intervals ordered by inclusion."""
    intervals: tuple[tuple[Fraction, Fraction], ...]
    poset: FinitePoset

    @classmethod
    def of(cls, intervals: Iterable[tuple]) -> "IntervalPoset":
        ivs = sorted({(Fraction(a), Fraction(b)) for a, b in intervals}, key=lambda iv: (iv[1] - iv[0], iv))
        if any(a >= b for a, b in ivs):
            raise ReebError("intervals must be nonempty")
        down = []
        for a, b in ivs:
            mask = 0
            for j, (c, d) in enumerate(ivs):
                if a <= c and d <= b:
                    mask |= 1 << j
            down.append(mask)
        labels = [f"({_fmt(a)},{_fmt(b)})" for a, b in ivs]
        return cls(tuple(ivs), FinitePoset(labels, down))

    @classmethod
    def grid(cls, delta, lo: int, hi: int, step: int = 1) -> "IntervalPoset":
        """Intervals ``(k1 * delta / step, k2 * delta / step)`` with ``lo*step <= k1 < k2 <= hi*step``."""
        d = Fraction(delta) / step
        ks = range(lo * step, hi * step + 1)
        return cls.of((k1 * d, k2 * d) for k1, k2 in itertools.combinations(ks, 2))

    def index(self, a, b) -> int:
        return self.intervals.index((Fraction(a), Fraction(b)))

    def __len__(self) -> int:
        return len(self.intervals)


def interval_inclusion(P: IntervalPoset, Q: IntervalPoset) -> MonotoneMap:
    lookup = {iv: i for i, iv in enumerate(Q.intervals)}
    try:
        image = [lookup[iv] for iv in P.intervals]
    except KeyError as exc:
        raise ReebError(f"interval {exc} is missing from the larger family") from None
    return MonotoneMap(P.poset, Q.poset, image)


def reeb_cosheaf(R: ReebSpace, family: IntervalPoset) -> SetModule:
    """``I -> pi_0(preimage of I)`` with the induced maps on inclusions."""
    comps = [R.components(a, b) for a, b in family.intervals]
    fns = {}
    for s, t in family.poset.hasse:
        src, dst = comps[s], comps[t]
        table = [None] * src.count
        for node, c in src.label.items():
            image = dst.label[node]
            if table[c] is None:
                table[c] = image
            elif table[c] != image:
                raise ReebError("component map is not well defined")
        fns[(s, t)] = tuple(table)
    return SetModule(family.poset, [c.count for c in comps], fns)


# ---------------------------------------------------------------------------
@dataclass
class Pixelization:
    delta: Fraction
    grid: IntervalPoset
    refined: IntervalPoset
    inclusion: MonotoneMap
    module: SetModule
    sampled: SetModule
    pixelized: SetModule
    comparison: ModuleMap

    def agrees_on_grid(self) -> bool:
        """The pixelization and the original coincide on grid intervals."""
        comp = self.comparison
        cat = self.module.category
        return all(cat.is_iso(comp.components[q]) for q in self.inclusion.image)


def pixelize_reeb(R: ReebSpace, delta, m: int = 2, window: tuple[int, int] | None = None) -> Pixelization:
    """Sample the Reeb cosheaf on grid intervals and push back to the refined family."""
    if m < 1:
        raise ReebError("refinement factor must be positive")
    delta = Fraction(delta)
    lo, hi = window if window is not None else default_window(R, delta)
    grid = IntervalPoset.grid(delta, lo, hi)
    refined = IntervalPoset.grid(delta, lo, hi, m)
    f = interval_inclusion(grid, refined)
    M = reeb_cosheaf(R, refined)
    sampled = pullback(f, M)
    chi = counit(f, M)
    return Pixelization(delta, grid, refined, f, M, sampled, chi.source, chi)


def default_window(R: ReebSpace, delta) -> tuple[int, int]:
    a, b = R.value_range()
    return (int((a / delta).__floor__()) - 1, int((b / delta).__ceil__()) + 1)


# ---------------------------------------------------------------------------
@dataclass
class ReebGraph:
    vertices: list[tuple[str, Fraction]]
    edges: list[tuple[str, str]] = field(default_factory=list)

    def cycle_rank(self) -> int:
        return cycle_rank([v for v, _ in self.vertices], self.edges)

    def to_json(self) -> dict:
        return {"vertices": [{"id": v, "value": _fmt(x)} for v, x in self.vertices],
                "edges": [list(e) for e in self.edges]}

    def to_dot(self) -> str:
        lines = ["graph reeb {"]
        for v, x in self.vertices:
            lines.append(f'  "{v}" [label="{v}\\n{_fmt(x)}"];')
        for a, b in self.edges:
            lines.append(f'  "{a}" -- "{b}";')
        lines.append("}")
        return "\n".join(lines)


def cycle_rank(vertices: Sequence, edges: Sequence[tuple]) -> int:
    """``E - V + C`` for a multigraph."""
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = len(parent)
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return len(edges) - len(parent) + comps


def slice_2delta(pix: Pixelization) -> ReebGraph:
    """Read a graph off the intervals ``(k delta, (k+2) delta)`` of the pixelization.

    Components over consecutive slices are joined when some component over
    their overlap maps to both.
    """
    d = pix.delta
    fam = pix.refined
    P = pix.pixelized
    ks = sorted({int(a / d) for a, b in pix.grid.intervals if b - a == 2 * d})
    pos = {iv: i for i, iv in enumerate(fam.intervals)}
    graph = ReebGraph([])
    for k in ks:
        q = pos[(k * d, (k + 2) * d)]
        for c in range(P.objs[q]):
            graph.vertices.append((f"{k}:{c}", (k + 1) * d))
    for k in ks:
        if k + 1 not in ks:
            continue
        a, b = pos[(k * d, (k + 2) * d)], pos[((k + 1) * d, (k + 3) * d)]
        j = pos[((k + 1) * d, (k + 2) * d)]
        into_a, into_b = P.map(j, a), P.map(j, b)
        seen = set()
        for z in range(P.objs[j]):
            pair = (into_a[z], into_b[z])
            if pair not in seen:
                seen.add(pair)
                graph.edges.append((f"{k}:{pair[0]}", f"{k + 1}:{pair[1]}"))
    return graph


# ---------------------------------------------------------------------------
def clipped_interval_translation(family: IntervalPoset, delta, lo: int, hi: int):
    """``(a, b) -> (a - k delta, b + k delta)`` clipped to the window, for ``k = 0 .. hi - lo``."""
    from .translate import TranslationFamily
    delta = Fraction(delta)
    L, H = lo * delta, hi * delta
    pos = {iv: i for i, iv in enumerate(family.intervals)}
    maps = {}
    for k in range(hi - lo + 1):
        s = k * delta
        maps[s] = tuple(pos[(max(a - s, L), min(b + s, H))] for a, b in family.intervals)
    return TranslationFamily(family.poset, list(maps), maps)


def reeb_distance(R1: ReebSpace, R2: ReebSpace, delta, mode: str = "weak", *,
                  window: tuple[int, int] | None = None, cap: int | None = None):
    """Interleaving distance of the grid-sampled Reeb cosheaves under the thickening ladder."""
    from .diagrams import ISO_CAP
    from .interleave import distance
    from .translate import IntrinsicShift
    delta = Fraction(delta)
    if window is None:
        w1, w2 = default_window(R1, delta), default_window(R2, delta)
        window = (min(w1[0], w2[0]), max(w1[1], w2[1]))
    grid = IntervalPoset.grid(delta, *window)
    T = clipped_interval_translation(grid, delta, *window)
    M, N = reeb_cosheaf(R1, grid), reeb_cosheaf(R2, grid)
    return distance(M, N, IntrinsicShift(T), mode, cap=cap or ISO_CAP)


def shift_certificate(R: ReebSpace, amount: int, delta, window: tuple[int, int]):
    """Explicit interleaving between ``R`` and ``R`` raised by ``amount * delta``.

    Each component is sent to the component containing the same graph pieces.
    Returns ``None`` when some piece has no image, for instance near the window edge.
    """
    from .interleave import InterleavingCertificate, WEAK, check_certificate
    from .translate import IntrinsicShift
    delta = Fraction(delta)
    R2 = R.shifted(amount * delta)
    grid = IntervalPoset.grid(delta, *window)
    T = clipped_interval_translation(grid, delta, *window)
    shift = IntrinsicShift(T)
    eps = amount * delta
    M, N = reeb_cosheaf(R, grid), reeb_cosheaf(R2, grid)

    def transport(src: ReebSpace, dst: ReebSpace):
        t = T.at(eps)
        comps = []
        for q, (a, b) in enumerate(grid.intervals):
            c_src = src.components(a, b)
            c, d = grid.intervals[t[q]]
            c_dst = dst.components(c, d)
            table = [None] * c_src.count
            for node, x in c_src.label.items():
                if node not in c_dst.label:
                    return None
                table[x] = c_dst.label[node]
            comps.append(tuple(table))
        return comps

    phi_c, psi_c = transport(R, R2), transport(R2, R)
    if phi_c is None or psi_c is None:
        return None
    phi = ModuleMap(M, shift.module(N, eps), phi_c)
    psi = ModuleMap(N, shift.module(M, eps), psi_c)
    if not check_certificate(shift, M, N, phi, psi, eps, WEAK):
        return None
    return InterleavingCertificate(eps, phi, psi, WEAK, "intrinsic")
