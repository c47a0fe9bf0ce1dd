from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relint.grid import (BoundaryError, GridError, GridTranslation, RectOpen, build_grid, cell_leq,
                         cell_weight, cover_completions, delta_approx_witness, galois_tflat,
                         grid_from_json, grid_open_extent, grid_open_from_cells, grid_open_inclusion,
                         grid_to_json, is_grid_open, metric_thicken, path_weights_bruteforce,
                         region_subset, star, tflat_grid, weighted_cells)
from relint.poset import DownLattice
from relint.translate import respects_joins, validate_translation, validate_weighted


def test_counts_by_dimension():
    G = build_grid(2, 1, [[0, 4], [0, 4]])
    dims = [G.dim(i) for i in range(len(G.cells))]
    assert (dims.count(0), dims.count(1), dims.count(2)) == (9, 12, 4)
    assert grid_from_json(grid_to_json(G)).cells == G.cells


def test_cell_order_and_stars():
    assert cell_leq((1, 1), (0, 0)) and not cell_leq((0, 0), (1, 1))
    G = build_grid(2, 1, [[0, 4], [0, 4]])
    centre = G.index((2, 2))
    assert bin(star(G, centre)).count("1") == 9
    assert bin(star(G, G.index((1, 1)))).count("1") == 1
    # a corner's star is clipped by the window
    assert bin(star(G, G.index((0, 0)))).count("1") == 4


def test_bad_grids():
    with pytest.raises(GridError):
        build_grid(4, 1, [[0, 1]] * 4)
    with pytest.raises(GridError):
        build_grid(1, 0, [[0, 2]])
    with pytest.raises(GridError):
        build_grid(2, 1, [[0, 200], [0, 200]], cap=1000)


def test_square_to_its_corner_costs_one_step():
    G = build_grid(2, 1, [[0, 2], [0, 2]])
    sq, corner = G.index((1, 1)), G.index((0, 0))
    assert cell_weight(G, sq, corner) == 1
    assert cell_weight(G, corner, sq) == 0
    assert cell_weight(G, G.index((0, 0)), G.index((2, 2))) == 1


def test_weights_match_path_enumeration_in_one_and_three_dimensions():
    for G in (build_grid(1, Fraction(1, 2), [[0, 8]]), build_grid(3, 1, [[0, 2], [0, 2], [0, 2]])):
        brute = path_weights_bruteforce(G)
        n = len(G.cells)
        assert all(cell_weight(G, s, t) == brute[s][t] for s in range(n) for t in range(n))
        assert validate_weighted(weighted_cells(G)).ok


def test_tflat_is_monotone_and_snaps():
    G = build_grid(2, 1, [[0, 6], [0, 6]])
    U = star(G, G.index((3, 3)))
    one, two = tflat_grid(G, U, 1), tflat_grid(G, U, 2)
    assert is_grid_open(G, one) and U & ~one == 0 and one & ~two == 0
    assert tflat_grid(G, U, Fraction(19, 10)) == one
    assert tflat_grid(G, U, 0) == U


def test_grid_translation_family_on_a_segment():
    T = GridTranslation(build_grid(1, 1, [[0, 6]]))
    assert T.validate() == []
    fam = T.family()
    assert validate_translation(fam).ok
    assert T.snap(Fraction(5, 2)) == 2


def test_galois_route_agrees_away_from_the_boundary():
    G = build_grid(2, 1, [[0, 12], [0, 12]])
    for i in G.interior_cells(4):
        assert tflat_grid(G, star(G, i), 1) == galois_tflat(G, star(G, i), 1)


def test_extent_of_a_vertex_star():
    G = build_grid(2, 1, [[0, 4], [0, 4]])
    ext = grid_open_extent(G, star(G, G.index((2, 2))))
    assert ext.to_json() == [[["0/1", "2/1"], ["0/1", "2/1"]]]


def test_rect_open_algebra():
    V = RectOpen.of([[(0, 2), (0, 2)], [(0, 1), (0, 1)]])
    assert len(V.boxes) == 1
    W = RectOpen.of([[(0, 1), (0, 2)], [(1, 2), (0, 2)]])
    assert not (V <= W)  # the seam x = 1 is missing from W
    assert W <= V
    assert metric_thicken(W, Fraction(1, 2)).boxes[0][0] == (Fraction(-1, 2), Fraction(3, 2))
    with pytest.raises(GridError):
        RectOpen.of([[(1, 1), (0, 2)]])


@st.composite
def box_lists(draw):
    out = []
    for _ in range(draw(st.integers(1, 3))):
        box = []
        for _axis in range(2):
            a, b = sorted(draw(st.lists(st.integers(0, 8), min_size=2, max_size=2, unique=True)))
            box.append((Fraction(a, 2), Fraction(b, 2)))
        out.append(tuple(box))
    return out


def _inside(pt, boxes):
    return any(all(lo < x < hi for x, (lo, hi) in zip(pt, b)) for b in boxes)


@given(box_lists(), box_lists())
@settings(max_examples=150, deadline=None)
def test_region_subset_against_sample_points(A, B):
    # all box corners are on the 1/2 lattice, so the 1/4 lattice probes every piece
    pts = [(Fraction(i, 4), Fraction(j, 4)) for i in range(17) for j in range(17)]
    sampled = all(_inside(pt, B) for pt in pts if _inside(pt, A))
    assert region_subset(A, B) == sampled


def test_witness_refuses_the_boundary():
    G = build_grid(2, 1, [[0, 12], [0, 12]])
    with pytest.raises(BoundaryError):
        delta_approx_witness(G, RectOpen.of([[(0, 2), (1, 2)]]))
    # staying off the boundary vertices is enough
    assert delta_approx_witness(G, RectOpen.of([[(Fraction(1, 2), 2), (1, 2)]]))


def test_cover_completions_of_a_segment():
    rep = cover_completions(build_grid(1, 1, [[0, 4]]))
    assert rep.injective and rep.monotone and rep.full
    assert rep.star_map is not None


def test_coarse_opens_include_into_fine_opens():
    fine, coarse = build_grid(1, Fraction(1, 2), [[0, 8]]), build_grid(1, 1, [[0, 4]])
    Lf, Lc = DownLattice(fine.poset), DownLattice(coarse.poset)
    f = grid_open_inclusion(coarse, Lc, fine, Lf)
    assert respects_joins(f)
    rng = np.random.default_rng(0)
    for _ in range(20):
        i = int(rng.integers(len(Lc.masks)))
        assert len(f.target.labels[f.image[i]]) >= len(f.source.labels[i]) or Lc.masks[i] == 0
    whole = Lc.element(coarse.poset.full_mask)
    assert Lf.masks[f.image[whole]] == fine.poset.full_mask


def test_open_from_cells_closes_downward():
    G = build_grid(2, 1, [[0, 4], [0, 4]])
    U = grid_open_from_cells(G, [(2, 2)])
    assert U == star(G, G.index((2, 2)))
