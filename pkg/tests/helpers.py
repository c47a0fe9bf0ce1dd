"""Fixtures shared by the test modules."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from relint.diagrams import FFMatrix, VectModule
from relint.generate import random_family, random_module, random_monotone, random_poset
from relint.poset import MonotoneMap, build_poset

W_LAYERS = 10


def zigzag():
    """Three elements ``a > b < c``."""
    return build_poset("abc", [("b", "a"), ("b", "c")])


def zigzag_modules():
    """The three pushout examples: identities, a zero leg, and two zero legs."""
    Z = zigzag()
    a, b, c = (Z.index(x) for x in "abc")
    ex_a = VectModule(Z, [1, 1, 1], {(b, a): [[1]], (b, c): [[1]]})
    ex_b = VectModule(Z, [0, 1, 1], {(b, a): FFMatrix.zeros(0, 1), (b, c): [[1]]})
    ex_c = VectModule(Z, [1, 1, 1], {(b, a): [[0]], (b, c): [[0]]})
    return Z, ex_a, ex_b, ex_c


def w_positions(layer: int) -> list[int]:
    return list(range(2, 13, 2)) if layer % 2 == 0 else list(range(1, 14, 2))


def w_label(layer: int, x: int) -> str:
    return f"{layer}:{x}"


def w_poset(layers: int = W_LAYERS):
    """Stacked zig-zags: ``(l, x) < (l + 1, x +- 1)``."""
    labels, rel = [], []
    for l in range(layers):
        for x in w_positions(l):
            labels.append(w_label(l, x))
            if l + 1 < layers:
                for y in (x - 1, x + 1):
                    if y in w_positions(l + 1):
                        rel.append((w_label(l, x), w_label(l + 1, y)))
    return build_poset(labels, rel)


def w_zigzag_module():
    """The bottom two layers with a bar over positions 5..8, killed by the arrow into 9."""
    W = w_poset()
    Z = w_poset(2)
    j = MonotoneMap(Z, W, [W.index(lab) for lab in Z.labels])
    live = {w_label(0, 6), w_label(0, 8), w_label(1, 5), w_label(1, 7)}
    dims = [1 if lab in live else 0 for lab in Z.labels]
    maps = {}
    for lo, hi in Z.hasse:
        if Z.labels[lo] in live and Z.labels[hi] in live:
            maps[(lo, hi)] = [[1]]
    return W, Z, j, VectModule(Z, dims, maps)


def w_shift_map(Z, W, steps: int) -> MonotoneMap:
    """Move the embedded zig-zag up by ``2 * steps`` layers."""
    image = []
    for lab in Z.labels:
        l, x = (int(t) for t in lab.split(":"))
        image.append(W.index(w_label(l + 2 * steps, x)))
    return MonotoneMap(Z, W, image)


def random_relative_instance(rng: np.random.Generator, max_p: int = 5, max_q: int = 7, p: int = 2):
    """``(f, T, M, N)`` with ``f: P -> Q`` monotone and ``M, N`` modules over ``P``."""
    while True:
        T = random_family(rng, max_q)
        P = random_poset(int(rng.integers(1, max_p + 1)), rng)
        f = random_monotone(P, T.poset, rng)
        if f is None:
            continue
        return f, T, random_module(P, rng, p), random_module(P, rng, p)


F = Fraction


# a graph with a tall loop (height 4) and a short one (height 3/5)
REEB_VALUES = {"a": F(1) / 2, "s": F(3) / 2, "l": F(7) / 2, "r": F(13) / 4, "t": F(11) / 2,
               "u": F(36) / 5, "x": F(15) / 2, "y": F(37) / 5, "w": F(39) / 5, "top": F(17) / 2,
               "leaf": F(5)}
REEB_EDGES = [("a", "s"), ("s", "l"), ("s", "r"), ("l", "t"), ("r", "t"), ("t", "u"), ("u", "x"),
              ("u", "y"), ("x", "w"), ("y", "w"), ("w", "top"), ("s", "leaf")]


def sampled_components(values, edges, lo, hi, steps=400):
    """Components of the preimage of (lo, hi), from points sampled along each edge.

    Exact as long as every nonempty piece of an edge is longer than the sample
    spacing, which holds for the fixture heights (multiples of 1/20, spans <= 8).
    """
    nodes, adj = set(), {}

    def link(u, v):
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)

    for v, h in values.items():
        if lo < h < hi:
            nodes.add(("v", v))
    for k, (a, b) in enumerate(edges):
        prev = ("v", a) if ("v", a) in nodes else None
        for i in range(1, steps):
            h = values[a] + (values[b] - values[a]) * Fraction(i, steps)
            node = ("e", k, i)
            if lo < h < hi:
                nodes.add(node)
                if prev is not None:
                    link(prev, node)
                prev = node
            else:
                prev = None
        if prev is not None and ("v", b) in nodes:
            link(prev, ("v", b))
    seen, count = set(), 0
    for start in nodes:
        if start in seen:
            continue
        count += 1
        stack = [start]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(adj.get(x, ()))
    return count
