import itertools
from math import comb

import pytest
from hypothesis import given

import oracles
from strategies import ultrametrics
from ultracoarse.generators import equilateral
from ultracoarse.fu import (
    EmbeddingError,
    build_fu,
    build_fu_literal,
    canonical_form,
    embed_into_fu,
    enumerate_ultrametrics,
    fu_path_distance,
    fu_resolution,
    fu_size,
    fu_size_formula,
    oracle_embed_search,
    top_split_two,
)
from ultracoarse.metric import DSet, FiniteMetricSpace, validate_ultrametric, value_set
from ultracoarse.resolution import verify_resolution


def two(d=1):
    return FiniteMetricSpace(["a", "b"], [[0, d], [d, 0]])


def pair_dists(S):
    return sorted(S.d(x, y) for x, y in itertools.combinations(S.points, 2))


def subsets_with_zero(top=3):
    pos = list(range(1, top + 1))
    for k in range(len(pos) + 1):
        for c in itertools.combinations(pos, k):
            yield DSet.of(c)


# ---- top split onto {0, k} ------------------------------------------------------

def test_top_split_two_examples():
    R = top_split_two(two(4))
    assert R.fiber_ids("0") == ("a",) and R.fiber_ids("4") == ("b",)
    M = FiniteMetricSpace(["a", "b", "c"], [[0, 2, 5], [2, 0, 5], [5, 5, 0]])
    R = top_split_two(M, DSet.of([2, 5]))
    assert R.fiber_ids("0") == ("a", "b") and R.fiber_ids("5") == ("c",)
    assert verify_resolution(R).ok
    E = equilateral(4, 3)
    R = top_split_two(E)
    assert R.fiber_ids("0") == ("p0",) and R.fiber_ids("3") == E.points[1:]


@given(ultrametrics(min_n=2, max_n=12))
def test_top_split_two_is_resolution(M):
    assert verify_resolution(top_split_two(M)).ok


# ---- literal and corrected builds ----------------------------------------------

def test_literal_examples():
    assert len(build_fu_literal(1, [0, 1, 2]).space) == 1
    L = build_fu_literal(2, [1, 2]).space
    assert len(L) == 2 and L.diameter() == 2 and value_set(L) == DSet((0, 2))
    L5 = build_fu_literal(2, [5]).space
    assert len(L5) == 2 and L5.diameter() == 5


def test_corrected_examples():
    F = build_fu(2, [1, 2]).space
    assert len(F) == 3
    assert pair_dists(F) == [1, 2, 2]
    assert len(build_fu(3, [1, 2]).space) == 6
    for m in range(1, 6):
        S = build_fu(m, [4]).space
        assert S == equilateral(m, 4).relabel(dict(zip(equilateral(m, 4).points, S.points)))


@pytest.mark.parametrize("literal", [False, True])
def test_build_matches_unrolled_recursion(literal):
    for m in range(1, 6):
        for D in subsets_with_zero():
            fu = (build_fu_literal if literal else build_fu)(m, D)
            paths, dist = oracles.fu_oracle(m, D.values, literal)
            assert [fu.labels[x] for x in fu.space.points] == paths
            for x in fu.space.points:
                for y in fu.space.points:
                    assert fu.space.d(x, y) == dist[fu.labels[x], fu.labels[y]]


def test_sizes_match_formula():
    for m in range(1, 9):
        for D in subsets_with_zero(4):
            d = len(D) - 1
            assert fu_size(m, D) == fu_size_formula(m, D) == comb(m - 1 + d, d)


def test_fu_is_ultrametric():
    for m in range(1, 6):
        for D in subsets_with_zero():
            assert validate_ultrametric(build_fu(m, D).space).ok


def test_path_distance_agrees():
    fu = build_fu(4, [1, 2, 3])
    for x in fu.space.points:
        for y in fu.space.points:
            assert fu_path_distance(4, fu.D, fu.labels[x], fu.labels[y]) == fu.space.d(x, y)


def test_fu_resolution():
    fu = build_fu(3, [1, 2])
    R = fu_resolution(fu)
    assert verify_resolution(R).ok and R.base.points == ("0", "2")


# ---- embedding ------------------------------------------------------------------

def test_embed_examples():
    assert embed_into_fu(FiniteMetricSpace.single("q"), 3, [1, 2]) == {"q": "x00"}
    f = embed_into_fu(two(1), 2, [1, 2])
    assert all(v.startswith("x0") for v in f.values())
    assert oracles.isometric_copy(two(1), build_fu(2, [1, 2]).space, f)


def test_embed_rejections():
    with pytest.raises(EmbeddingError):
        embed_into_fu(equilateral(3, 1), 2, [1])
    with pytest.raises(EmbeddingError):
        embed_into_fu(two(3), 2, [1, 2])


def test_catalog_embeds_into_fu4():
    D = DSet((0, 1, 2, 3))
    target = build_fu(4, D).space
    for X in enumerate_ultrametrics(4, D).spaces:
        f = embed_into_fu(X, 4, D)
        assert oracles.isometric_copy(X, target, f)
        assert oracle_embed_search(X, target) is not None


@given(ultrametrics(max_n=7, scales=(1, 2, 3)))
def test_embed_generated(M):
    D = DSet((0, 1, 2, 3))
    f = embed_into_fu(M, 7, D)
    assert oracles.isometric_copy(M, build_fu(7, D).space, f)


# ---- catalog ------------------------------------------------------------------------

def test_enumerate_examples():
    cat = enumerate_ultrametrics(3, [1, 2])
    three = {tuple(pair_dists(S)) for S in cat.spaces if len(S) == 3}
    assert three == {(1, 1, 1), (2, 2, 2), (1, 2, 2)}
    assert len(cat.spaces) == 6
    assert len(enumerate_ultrametrics(1, [1, 2, 3]).spaces) == 1
    assert len(enumerate_ultrametrics(2, [7]).spaces) == 2


def test_catalog_matches_brute_force():
    for D in subsets_with_zero():
        cat = enumerate_ultrametrics(4, D)
        for n in range(1, 5):
            got = [S for S in cat.spaces if len(S) == n]
            want = oracles.ultrametric_classes(n, D.values) if n > 1 else {()}
            assert len(got) == len(want), (D, n)
        forms = [canonical_form(S) for S in cat.spaces]
        assert len(set(forms)) == len(forms)


def test_canonical_form_is_invariant(rng):
    from ultracoarse.generators import random_ultrametric
    M = random_ultrametric(10, rng)
    perm = list(rng.permutation(M.points))
    assert canonical_form(M) == canonical_form(M.reorder(perm).relabel(lambda x: "z" + x))


def test_catalog_guard():
    with pytest.raises(ValueError, match="guard"):
        enumerate_ultrametrics(40, list(range(1, 8)))


# ---- oracle ---------------------------------------------------------------------------

def test_oracle_examples():
    M = FiniteMetricSpace(["a", "b", "c"], [[0, 2, 5], [2, 0, 5], [5, 5, 0]])
    assert oracle_embed_search(M, M) == {"a": "a", "b": "b", "c": "c"}
    assert oracle_embed_search(two(1), build_fu_literal(2, [1, 2]).space) is None
    assert oracle_embed_search(two(1), build_fu(2, [1, 2]).space) is not None
