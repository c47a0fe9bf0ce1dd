from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import zigzag, zigzag_modules
from relint.diagrams import are_isomorphic
from relint.generate import (chain_shift, random_family, random_full_embedding, random_module,
                             random_poset, random_weighting)
from relint.poset import MonotoneMap, chain
from relint.translate import (INF, IntrinsicShift, PreconditionError, RelativeShift, TranslationError,
                              TranslationFamily, WeightedPoset, as_weight, fmt_rational, galois,
                              identity_family, lower_approx_translation, path_weighting, respects_joins,
                              shift_three_step, shift_weighted, thickening_from_weighting, time_ball,
                              validate_translation, validate_weighted)

seeds = st.integers(0, 2**32 - 1)


def test_rationals_format_as_fractions():
    assert fmt_rational(Fraction(0)) == "0/1"
    assert fmt_rational(Fraction(3, 2)) == "3/2"
    assert as_weight("inf") == INF and as_weight("5/10") == Fraction(1, 2)


def test_zigzag_weights_and_balls():
    Z = zigzag()
    a, b, c = range(3)
    wZ = path_weighting(Z, {(b, a): 1, (b, c): 1})
    assert validate_weighted(wZ).ok
    assert wZ(a, c) == 1 and wZ(a, b) == 0 and wZ(b, a) == 1
    assert time_ball(wZ, a, 0).members == Z.down[a]
    assert time_ball(wZ, b, 1).members == Z.full_mask


def test_weight_axioms_are_enforced():
    C = chain(2)
    bad = WeightedPoset(C, [[0, 1], [1, 0]])  # going down must be free
    assert not validate_weighted(bad).ok
    triangle = WeightedPoset(chain(3), [[0, 1, 5], [0, 0, 1], [0, 0, 0]])
    assert not validate_weighted(triangle).ok


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_random_weightings_are_valid_and_balls_are_down_sets(seed):
    rng = np.random.default_rng(seed)
    P = random_poset(int(rng.integers(1, 6)), rng)
    wP = random_weighting(P, rng)
    assert validate_weighted(wP).ok
    for eps in (0, Fraction(1, 2), 1, 2):
        for p in range(len(P)):
            assert P.is_down_set(time_ball(wP, p, eps).members)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_thickenings_are_superlinear_translations(seed):
    rng = np.random.default_rng(seed)
    P = random_poset(int(rng.integers(1, 4)), rng)
    T = thickening_from_weighting(random_weighting(P, rng))
    assert validate_translation(T).ok


def test_family_rejects_non_translations():
    C = chain(3)
    with pytest.raises(TranslationError):
        TranslationFamily(C, [0, 1], {0: (0, 1, 2), 1: (0, 0, 2)})
    with pytest.raises(TranslationError):
        TranslationFamily(C, [1], {1: (1, 2, 2)})
    T = chain_shift(4)
    assert T.snap(Fraction(5, 2)) == 2 and T(Fraction(5, 2), 0) == 2


def test_galois_adjoints_on_a_chain_embedding():
    Q, P = chain(20, "r"), chain(5, "n")
    f = MonotoneMap(P, Q, [4 * n for n in range(5)])
    g = galois(f)
    assert g.flat == tuple(r // 4 for r in range(20))
    assert g.sharp == tuple(min(-(-r // 4), 4) for r in range(20))
    assert respects_joins(f)


def test_respects_joins_includes_the_empty_join():
    f = MonotoneMap(chain(2), chain(3), [1, 2])
    assert not respects_joins(f)
    T = chain_shift(3)
    with pytest.raises(PreconditionError):
        lower_approx_translation(f, T)


def test_weighted_shift_of_the_pushout_examples():
    Z, ex_a, ex_b, ex_c = zigzag_modules()
    wZ = path_weighting(Z, {(1, 0): 1, (1, 2): 1})
    assert are_isomorphic(shift_weighted(wZ, ex_a, 1), ex_a)
    assert shift_weighted(wZ, ex_b, 1).total() == 0
    assert shift_weighted(wZ, ex_c, 1).objs == (2, 2, 2)
    assert shift_weighted(wZ, ex_c, 0).objs == ex_c.objs


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_weighted_shift_equals_three_step_route(seed):
    rng = np.random.default_rng(seed)
    P = random_poset(int(rng.integers(1, 5)), rng)
    wP = random_weighting(P, rng)
    M = random_module(P, rng)
    eps = Fraction(int(rng.integers(0, 5)), 2)
    assert are_isomorphic(shift_weighted(wP, M, eps), shift_three_step(wP, M, eps))


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_shift_structure_maps_are_natural(seed):
    rng = np.random.default_rng(seed)
    T = random_family(rng, 6)
    M = random_module(T.poset, rng)
    S = IntrinsicShift(T)
    e1, e2 = T.ladder[int(rng.integers(len(T.ladder)))], T.ladder[-1]
    for alpha in (S.eta(M, e1), S.eta_between(M, e1, e2), S.sigma(M, e1, e2)):
        assert alpha.is_natural()


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_relative_shift_along_identity_is_intrinsic(seed):
    rng = np.random.default_rng(seed)
    T = random_family(rng, 6)
    M = random_module(T.poset, rng)
    ident = MonotoneMap.identity(T.poset)
    e = T.ladder[-1]
    rel, intr = RelativeShift(ident, T), IntrinsicShift(T)
    assert are_isomorphic(rel.module(M, e), intr.module(M, e))
    assert rel.sigma(M, e, e).is_natural() and rel.eta(M, e).is_natural()


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_relative_zero_shift_of_full_embedding_is_the_module(seed):
    rng = np.random.default_rng(seed)
    T = random_family(rng, 6)
    f = random_full_embedding(T.poset, int(rng.integers(1, len(T.poset) + 1)), rng)
    M = random_module(f.source, rng)
    assert RelativeShift(f, T).eta(M, 0).is_iso()


def test_identity_family():
    T = identity_family(chain(3))
    assert T.ladder == (0,) and T.candidates() == [0]
