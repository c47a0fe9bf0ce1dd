"""Cubical cell posets on bounded windows, grid opens, cell weights and box geometry.

Cells use doubled integer coordinates: an even entry ``2k`` is the vertex
coordinate ``k * delta`` and an odd entry ``2k + 1`` is the open interval
``(k * delta, (k + 1) * delta)``.  A cell ``s`` lies below ``t`` when ``t`` is
a face of ``s``, so principal down sets are open stars and down sets are grid
opens.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .poset import DownLattice, FinitePoset, MonotoneMap, bits, is_full, is_injective
from .translate import TranslationFamily, WeightedPoset, as_weight, thickening_from_weighting

GRID_CAP = 20_000

Interval = tuple[Fraction, Fraction]   # open interval, or a point when both ends agree
Box = tuple[Interval, ...]


class GridError(ValueError):
    pass


class BoundaryError(GridError):
    """A construction would need cells outside the window."""


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GridComplex:
    n: int
    delta: Fraction
    window: tuple[tuple[int, int], ...]
    cells: tuple[tuple[int, ...], ...]
    poset: FinitePoset

    def index(self, cell: Sequence[int]) -> int:
        return self._lookup[tuple(int(c) for c in cell)]

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self._lookup

    @property
    def _lookup(self) -> dict:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {c: i for i, c in enumerate(self.cells)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def dim(self, i: int) -> int:
        return sum(c & 1 for c in self.cells[i])

    def cell_box(self, i: int) -> Box:
        """The open cell itself as a product of points and open intervals."""
        return tuple(_cell_factor(c, self.delta) for c in self.cells[i])

    def star_box(self, i: int) -> Box:
        """The open star of a cell in the untruncated grid (an open box)."""
        return tuple(_star_factor(c, self.delta) for c in self.cells[i])

    def extent(self) -> Box:
        """The closed region covered by the window, as (lo, hi) pairs."""
        return tuple((Fraction(lo) * self.delta / 2, Fraction(hi) * self.delta / 2) for lo, hi in self.window)

    def interior_cells(self, margin: int = 1) -> list[int]:
        """Cells whose full open star plus ``margin`` cells of slack lie in the window."""
        out = []
        for i, c in enumerate(self.cells):
            if all(lo + margin <= x <= hi - margin for x, (lo, hi) in zip(c, self.window)):
                out.append(i)
        return out

    def format_cell(self, i: int) -> str:
        return "(" + ",".join(str(c) for c in self.cells[i]) + ")"


def _cell_factor(c: int, delta: Fraction) -> Interval:
    if c % 2 == 0:
        x = Fraction(c, 2) * delta
        return (x, x)
    return (Fraction(c - 1, 2) * delta, Fraction(c + 1, 2) * delta)


def _star_factor(c: int, delta: Fraction) -> Interval:
    if c % 2 == 0:
        k = c // 2
        return ((k - 1) * delta, (k + 1) * delta)
    return _cell_factor(c, delta)


def cell_leq(s: Sequence[int], t: Sequence[int]) -> bool:
    """``s <= t`` in the cell order: ``t`` is a face of ``s``."""
    return all(a == b or (a % 2 == 1 and abs(a - b) == 1) for a, b in zip(s, t))


def build_grid(n: int, delta, window: Sequence[Sequence[int]], cap: int = GRID_CAP) -> GridComplex:
    if n not in (1, 2, 3):
        raise GridError("only dimensions 1, 2 and 3 are supported")
    delta = Fraction(delta)
    if delta <= 0:
        raise GridError("delta must be positive")
    win = tuple((int(lo), int(hi)) for lo, hi in window)
    if len(win) != n or any(lo > hi for lo, hi in win):
        raise GridError("window must give one nonempty range per dimension")
    count = math.prod(hi - lo + 1 for lo, hi in win)
    if count > cap:
        raise GridError(f"window has {count} cells, above the cap {cap}")
    cells = tuple(itertools.product(*(range(lo, hi + 1) for lo, hi in win)))
    index = {c: i for i, c in enumerate(cells)}
    down = []
    for c in cells:
        mask = 0
        options = [(x - 1, x, x + 1) if x % 2 == 0 else (x,) for x in c]
        for t in itertools.product(*options):
            j = index.get(t)
            if j is not None:
                mask |= 1 << j
        down.append(mask)
    labels = ["(" + ",".join(str(x) for x in c) + ")" for c in cells]
    return GridComplex(n, delta, win, cells, FinitePoset(labels, down))


def grid_from_json(doc: dict, cap: int = GRID_CAP) -> GridComplex:
    return build_grid(int(doc["n"]), Fraction(str(doc["delta"])), doc["window"], cap)


# ---------------------------------------------------------------------------
def _weight_steps(G: GridComplex, source: int) -> list[float]:
    """0-1 BFS in units of delta: free moves to cofaces, unit moves to faces."""
    P = G.poset
    n = len(P)
    dist = [math.inf] * n
    dist[source] = 0
    dq = deque([source])
    while dq:
        u = dq.popleft()
        d = dist[u]
        for v in bits(P.down[u]):
            if d < dist[v]:
                dist[v] = d
                dq.appendleft(v)
        for v in bits(P.up[u]):
            if d + 1 < dist[v]:
                dist[v] = d + 1
                dq.append(v)
    return dist


def weight_table(G: GridComplex) -> list[list]:
    """All pairwise weights as multiples of delta (``inf`` across components)."""
    cache = G.__dict__.get("_weights")
    if cache is None:
        cache = [_weight_steps(G, s) for s in range(len(G.cells))]
        object.__setattr__(G, "_weights", cache)
    return cache


def cell_weight(G: GridComplex, s: int, t: int):
    steps = weight_table(G)[s][t]
    return math.inf if steps == math.inf else steps * G.delta


def weighted_cells(G: GridComplex) -> WeightedPoset:
    return WeightedPoset(G.poset, [[cell_weight(G, s, t) for t in range(len(G.cells))]
                                   for s in range(len(G.cells))])


def path_weights_bruteforce(G: GridComplex, max_len: int = 8) -> list[list]:
    """Minimum zig-zag path weight with at most ``max_len`` steps, by dynamic programming over lengths."""
    P = G.poset
    n = len(P)
    arcs = []
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if P.leq(v, u):
                arcs.append((u, v, 0))
            elif P.leq(u, v):
                arcs.append((u, v, 1))
    out = []
    for s in range(n):
        best = [math.inf] * n
        best[s] = 0
        layer = {s: 0}
        for _ in range(max_len):
            nxt: dict[int, int] = {}
            for u, v, c in arcs:
                if u in layer:
                    val = layer[u] + c
                    if val < nxt.get(v, math.inf):
                        nxt[v] = val
            for v, val in nxt.items():
                best[v] = min(best[v], val)
            layer = nxt
        out.append([x if x == math.inf else x * G.delta for x in best])
    return out


# ---------------------------------------------------------------------------
def _steps(G: GridComplex, eps) -> int | float:
    eps = as_weight(eps)
    if eps < 0:
        raise ValueError("negative radius")
    if eps == math.inf:
        return math.inf
    return math.floor(Fraction(eps) / G.delta)


def star(G: GridComplex, i: int) -> int:
    return G.poset.down[i]


def star_ball(G: GridComplex, i: int, eps) -> int:
    """Union of stars over the directed ball of radius ``eps`` (already down-closed)."""
    k = _steps(G, eps)
    row = weight_table(G)[i]
    mask = 0
    for j, d in enumerate(row):
        if d <= k:
            mask |= 1 << j
    return mask


def tflat_grid(G: GridComplex, U: int, eps) -> int:
    out = 0
    for i in bits(U):
        out |= star_ball(G, i, eps)
    return out


def is_grid_open(G: GridComplex, U: int) -> bool:
    return G.poset.is_down_set(U)


def grid_open_from_cells(G: GridComplex, cells: Iterable[Sequence[int]]) -> int:
    """Down-closure of the listed cells."""
    mask = 0
    for c in cells:
        mask |= G.poset.down[G.index(c)]
    return mask


class GridTranslation:
    """The translation ``U -> union of eps-star balls`` on grid opens, ladder ``0, delta, 2 delta, ...``."""

    def __init__(self, G: GridComplex):
        self.grid = G
        table = weight_table(G)
        finite = [d for row in table for d in row if d != math.inf]
        self.max_steps = max(finite) if finite else 0
        self.ladder = tuple(G.delta * k for k in range(self.max_steps + 1))

    def snap(self, eps) -> Fraction:
        return min(self.max_steps, _steps(self.grid, eps)) * self.grid.delta

    def __call__(self, U: int, eps) -> int:
        return tflat_grid(self.grid, U, eps)

    def validate(self) -> list[str]:
        """Translation axioms and superlinearity, checked on every principal grid open.

        Every grid open is a union of stars and the maps commute with unions,
        so checking stars covers all grid opens.
        """
        G, problems = self.grid, []
        n = len(G.cells)
        balls = {k: [star_ball(G, i, k * G.delta) for i in range(n)] for k in range(self.max_steps + 1)}
        for k, rows in balls.items():
            for i in range(n):
                if not G.poset.is_down_set(rows[i]):
                    problems.append(f"ball of radius {k} at {G.format_cell(i)} is not a grid open")
                if rows[i] & G.poset.down[i] != G.poset.down[i]:
                    problems.append(f"T_{k} does not contain the star of {G.format_cell(i)}")
                if k and rows[i] & balls[k - 1][i] != balls[k - 1][i]:
                    problems.append(f"not increasing in eps at {G.format_cell(i)}")
        for a in balls:
            for b in balls:
                cap = min(a + b, self.max_steps)
                for i in range(n):
                    composite = 0
                    for j in bits(balls[b][i]):
                        composite |= balls[a][j]
                    if composite & ~balls[cap][i]:
                        problems.append(f"superlinearity fails for {a}, {b} at {G.format_cell(i)}")
        return problems

    def family(self, cap: int = 4096) -> TranslationFamily:
        """The same translation as an explicit family on the lattice of grid opens (small windows)."""
        return thickening_from_weighting(weighted_cells(self.grid), cap)


# ---------------------------------------------------------------------------
# exact geometry on finite unions of products of points and open intervals

def _factor_meets(a: Interval, b: Interval) -> bool:
    (a0, a1), (b0, b1) = a, b
    if a0 == a1 and b0 == b1:
        return a0 == b0
    if a0 == a1:
        return b0 < a0 < b1
    if b0 == b1:
        return a0 < b0 < a1
    return a0 < b1 and b0 < a1


def _factor_inside(piece: Interval, f: Interval) -> bool:
    (p0, p1), (f0, f1) = piece, f
    if f0 == f1:
        return p0 == p1 == f0
    if p0 == p1:
        return f0 < p0 < f1
    return f0 <= p0 and p1 <= f1


def boxes_meet(a: Box, b: Box) -> bool:
    return all(_factor_meets(x, y) for x, y in zip(a, b))


def region_subset(A: Sequence[Box], B: Sequence[Box]) -> bool:
    """Whether the union of ``A`` lies in the union of ``B`` (exact, via a breakpoint decomposition)."""
    if not A:
        return True
    n = len(A[0])
    axes = []
    for d in range(n):
        pts = sorted({x for box in [*A, *B] for x in box[d]})
        pieces = [(x, x) for x in pts] + list(zip(pts, pts[1:]))
        axes.append(pieces)
    for box in A:
        per_axis = [[pc for pc in axes[d] if _factor_inside(pc, box[d])] for d in range(n)]
        for piece in itertools.product(*per_axis):
            if not any(all(_factor_inside(pc, f) for pc, f in zip(piece, other)) for other in B):
                return False
    return True


@dataclass(frozen=True)
class RectOpen:
    """A finite union of open axis-aligned boxes with rational corners."""
    boxes: tuple[Box, ...]

    @classmethod
    def of(cls, boxes: Iterable[Sequence[Sequence]]) -> "RectOpen":
        out = []
        for box in boxes:
            b = tuple((Fraction(str(lo)), Fraction(str(hi))) for lo, hi in box)
            if any(lo >= hi for lo, hi in b):
                raise GridError("boxes must be nonempty open boxes")
            out.append(b)
        return cls(tuple(out)).simplified()

    def simplified(self) -> "RectOpen":
        keep = []
        for i, b in enumerate(self.boxes):
            dominated = any(
                j != i and all(o0 <= b0 and b1 <= o1 for (b0, b1), (o0, o1) in zip(b, o))
                and (o != b or j < i)
                for j, o in enumerate(self.boxes))
            if not dominated:
                keep.append(b)
        return RectOpen(tuple(sorted(keep)))

    def thicken(self, eps) -> "RectOpen":
        return metric_thicken(self, eps)

    def __le__(self, other: "RectOpen") -> bool:
        return region_subset(self.boxes, other.boxes)

    def to_json(self) -> list:
        return [[[_fmt(lo), _fmt(hi)] for lo, hi in b] for b in self.boxes]


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def metric_thicken(V: RectOpen, eps) -> RectOpen:
    """The union of open l-infinity balls of radius ``eps`` around ``V``: grow every box."""
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("negative radius")
    return RectOpen(tuple(tuple((lo - eps, hi + eps) for lo, hi in b) for b in V.boxes)).simplified()


def grid_open_cells(G: GridComplex, U: int) -> list[Box]:
    """The geometric realization of a grid open as the union of its cells."""
    return [G.cell_box(i) for i in bits(U)]


def grid_open_extent(G: GridComplex, U: int) -> RectOpen:
    """The grid open of the untruncated grid generated by the stars of the cells of ``U``."""
    return RectOpen(tuple(G.star_box(i) for i in G.poset.maximal(U))).simplified() if U else RectOpen(())


def galois_tflat(G: GridComplex, U: int, eps) -> int:
    """Largest grid open whose stars fit in the metric thickening of ``U`` (window cells only)."""
    thick = metric_thicken(grid_open_extent(G, U), eps)
    mask = 0
    for i in range(len(G.cells)):
        if region_subset([G.star_box(i)], thick.boxes):
            mask |= 1 << i
    return mask


def _inside_window(G: GridComplex, box: Box) -> bool:
    return all(lo < b0 and b1 < hi for (b0, b1), (lo, hi) in zip(box, G.extent()))


def delta_approx_witness(G: GridComplex, V: RectOpen) -> int:
    """Union of the stars of all cells meeting ``V``.

    Raises BoundaryError when a needed star is not entirely inside the window.
    """
    for box in V.boxes:
        if not _inside_window(G, box):
            raise BoundaryError("open set is not inside the window")
    U = 0
    for i, c in enumerate(G.cells):
        if any(boxes_meet(G.cell_box(i), box) for box in V.boxes):
            for x, (lo, hi) in zip(c, G.window):
                if x % 2 == 0 and not (lo <= x - 1 and x + 1 <= hi):
                    raise BoundaryError(f"star of {G.format_cell(i)} leaves the window")
            U |= G.poset.down[i]
    return U


@dataclass
class ApproxCheck:
    lower: bool
    upper: bool

    @property
    def ok(self) -> bool:
        return self.lower and self.upper


def check_delta_approx(G: GridComplex, V: RectOpen, U: int) -> ApproxCheck:
    """``V`` inside ``U`` and ``U`` inside the delta thickening of ``V``, both exact."""
    cells = grid_open_cells(G, U)
    return ApproxCheck(region_subset(V.boxes, cells),
                       region_subset(cells, metric_thicken(V, G.delta).boxes))


# ---------------------------------------------------------------------------
@dataclass
class CoverCompletions:
    star_map: MonotoneMap | None
    monotone: bool
    full: bool
    injective: bool
    meets_are_stars: bool
    empty_meet_seen: bool
    new_meets: list


def cover_completions(G: GridComplex, cap: int = 4096) -> CoverCompletions:
    """Compare cells with the meet completion of their open stars."""
    P = G.poset
    n = len(P)
    stars = [P.down[i] for i in range(n)]
    index = {s: i for i, s in enumerate(stars)}
    monotone = all((stars[a] & ~stars[b]) == 0 for a in range(n) for b in bits(P.up[a]))
    full = all(((stars[a] & ~stars[b]) == 0) == P.leq(a, b) for a in range(n) for b in range(n))
    injective = len(index) == n
    closure, frontier, empty_seen, new = set(stars), list(stars), False, []
    while frontier:
        nxt = []
        for s in frontier:
            for t in list(closure):
                m = s & t
                if m == 0:
                    empty_seen = True
                    continue
                if m not in closure:
                    closure.add(m)
                    nxt.append(m)
                    new.append(P.format_mask(m))
                    if len(closure) > cap:
                        raise GridError("meet closure exceeds cap")
        frontier = nxt
    star_map = None
    if injective:
        L = DownLattice(P, cap) if n <= 12 else None
        if L is not None:
            star_map = MonotoneMap(P, L.poset, [L.element(s) for s in stars])
            full = full and is_full(star_map) and is_injective(star_map)
    return CoverCompletions(star_map, monotone, full, injective, not new, empty_seen, new)


def grid_to_json(G: GridComplex) -> dict:
    return {"n": G.n, "delta": _fmt(G.delta), "window": [list(w) for w in G.window]}


def grid_open_to_json(G: GridComplex, U: int) -> list:
    return [list(G.cells[i]) for i in bits(U)]


# ---------------------------------------------------------------------------
def refine_cells(coarse: GridComplex, fine: GridComplex) -> list[int]:
    """For each coarse cell, the mask of fine cells partitioning it."""
    ratio = coarse.delta / fine.delta
    if ratio.denominator != 1 or coarse.n != fine.n:
        raise GridError("fine spacing must divide the coarse spacing")
    m = int(ratio)
    out = []
    for c in coarse.cells:
        ranges = [(m * x,) if x % 2 == 0 else range(m * (x - 1) + 1, m * (x + 1)) for x in c]
        mask = 0
        for t in itertools.product(*ranges):
            if t not in fine:
                raise BoundaryError("coarse window is not covered by the fine window")
            mask |= 1 << fine.index(t)
        out.append(mask)
    return out


def grid_open_inclusion(coarse: GridComplex, Lc: DownLattice, fine: GridComplex, Lf: DownLattice) -> MonotoneMap:
    """Coarse grid opens viewed as fine grid opens (the same subsets of space)."""
    parts = refine_cells(coarse, fine)
    image = []
    for S in Lc.masks:
        U = 0
        for i in bits(S):
            U |= parts[i]
        image.append(Lf.element(U))
    return MonotoneMap(Lc.poset, Lf.poset, image)
