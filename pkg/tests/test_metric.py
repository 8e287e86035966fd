from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import rational_ultrametrics, tree_metrics, ultrametrics
from ultracoarse.generators import equilateral, line_space, random_tree_metric, random_ultrametric
from ultracoarse.metric import (
    DSet,
    FiniteMetricSpace,
    MalformedSpaceError,
    NotIntegralError,
    NotUltrametricError,
    as_dist,
    chain_ultrametric,
    components_below,
    discretize,
    r_components,
    require_ultrametric,
    scaled_threshold,
    separated_net,
    validate_isosceles,
    validate_metric,
    validate_ultrametric,
    value_set,
)


def three(ab, bc, ac):
    return FiniteMetricSpace(["a", "b", "c"], [[0, ab, ac], [ab, 0, bc], [ac, bc, 0]])


# ---- construction -----------------------------------------------------------

def test_tokens():
    assert as_dist("3/2") == Fraction(3, 2)
    assert as_dist(4) == 4
    for bad in (1.5, "1.5", True, "x", "-1/0"):
        with pytest.raises((MalformedSpaceError, TypeError, ZeroDivisionError)):
            as_dist(bad)


def test_construction_rejects_bad_shapes():
    with pytest.raises(MalformedSpaceError):
        FiniteMetricSpace(["a", "b"], [[0, 1]])
    with pytest.raises(MalformedSpaceError):
        FiniteMetricSpace(["a", "b"], [[0, -1], [-1, 0]])
    with pytest.raises(MalformedSpaceError):
        FiniteMetricSpace(["a", "b"], [[1, 1], [1, 0]])
    with pytest.raises(MalformedSpaceError):
        FiniteMetricSpace(["a", "a"], [[0, 1], [1, 0]])


def test_common_denominator_and_big_values():
    M = FiniteMetricSpace(["a", "b", "c"], [[0, "1/2", "1/3"], ["1/2", 0, "1/2"], ["1/3", "1/2", 0]])
    num, den = M.scaled
    assert den == 6 and num.tolist() == [[0, 3, 2], [3, 0, 3], [2, 3, 0]]
    huge = 2**70
    B = FiniteMetricSpace(["a", "b", "c"], [[0, huge, huge], [huge, 0, 1], [huge, 1, 0]])
    assert B.scaled[0].dtype == object
    assert validate_ultrametric(B).ok
    assert chain_ultrametric(B).d("a", "b") == huge + 1


def test_equality_ignores_order():
    M = three(1, 2, 2)
    assert M == M.reorder(["c", "a", "b"])
    assert M != three(1, 2, 3)


# ---- validators -----------------------------------------------------------

def test_validate_metric_examples(rng):
    assert validate_metric(FiniteMetricSpace.single()).ok
    rep = validate_metric(three(1, 1, 3))
    assert [v.kind for v in rep] == ["triangle"]
    assert set(rep.violations[0].points) == {"a", "b", "c"}
    assert validate_metric(random_tree_metric(20, rng)).ok
    assert validate_metric(random_ultrametric(20, rng)).ok


def test_validate_reports_pair_defects():
    # positivity and symmetry defects can only come from raw matrices
    M = FiniteMetricSpace.from_scaled(["a", "b"], np.array([[0, 0], [0, 0]]), 1)
    assert [v.kind for v in validate_metric(M)] == ["positivity"]
    N = FiniteMetricSpace.from_scaled(["a", "b"], np.array([[0, 1], [2, 0]]), 1)
    assert "symmetry" in [v.kind for v in validate_metric(N)]


def test_validate_ultrametric_examples():
    assert validate_ultrametric(FiniteMetricSpace(["a", "b"], [[0, 7], [7, 0]])).ok
    assert validate_ultrametric(three(1, 2, 2)).ok
    rep = validate_ultrametric(three(1, 1, 2))
    assert len(rep) >= 1 and all(v.kind == "ultrametric" for v in rep)
    with pytest.raises(NotUltrametricError):
        require_ultrametric(three(1, 1, 2))


def test_validate_isosceles_examples():
    assert validate_isosceles(three(1, 2, 2)).ok
    assert [v.kind for v in validate_isosceles(three(1, 2, 3))] == ["isosceles"]


@given(ultrametrics(max_n=9))
def test_ultrametrics_are_isosceles(M):
    assert validate_isosceles(M).ok


@given(st.one_of(ultrametrics(max_n=7), tree_metrics(max_n=7), rational_ultrametrics(max_n=7)))
def test_validators_match_brute_force(M):
    assert validate_metric(M).ok == oracles.metric_ok(M)
    assert validate_ultrametric(M).ok == oracles.ultra_ok(M)
    assert validate_isosceles(M).ok == oracles.isosceles_ok(M)


@given(st.integers(3, 6), st.integers(0, 2**32 - 1))
def test_validators_on_arbitrary_matrices(n, seed):
    r = np.random.default_rng(seed)
    vals = r.integers(1, 5, size=(n, n))
    vals = np.triu(vals, 1)
    M = FiniteMetricSpace.from_scaled([f"q{i}" for i in range(n)], vals + vals.T, 1)
    assert validate_metric(M).ok == oracles.metric_ok(M)
    assert validate_ultrametric(M).ok == oracles.ultra_ok(M)
    assert validate_isosceles(M).ok == oracles.isosceles_ok(M)


# ---- value sets -----------------------------------------------------------

def test_value_set_examples():
    assert value_set(three(2, 5, 5)) == DSet((0, 2, 5))
    assert value_set(FiniteMetricSpace.single()) == DSet((0,))
    with pytest.raises(NotIntegralError, match="a.*b|b.*a"):
        value_set(three("3/2", 2, 2))


def test_dset_parsing():
    assert DSet.parse("1,2") == DSet((0, 1, 2))
    assert DSet.parse("0,3") == DSet.of([3])
    assert str(DSet.of([1, 3])) == "0,1,3"
    with pytest.raises(ValueError):
        DSet((1, 2))


# ---- components -----------------------------------------------------------

def test_components_strictness():
    L = line_space([0, 1, 2])
    assert r_components(L, 1).blocks == (("0",), ("1",), ("2",))
    assert r_components(L, Fraction(3, 2)).blocks == (("0", "1", "2"),)
    assert scaled_threshold(Fraction(3, 2), 2) == 3


@given(tree_metrics(max_n=8), st.fractions(min_value=Fraction(1, 8), max_value=12, max_denominator=8))
def test_components_match_bfs(M, r):
    assert sorted(components_below(M, r)) == oracles.components_bfs(M, r)


@given(ultrametrics(max_n=10))
def test_one_block_above_diameter(M):
    assert len(r_components(M, M.diameter() + 1).blocks) == 1


# ---- chain ultrametric ------------------------------------------------------

def test_chain_examples():
    U = chain_ultrametric(line_space([0, 1, 2]))
    assert all(U.d(x, y) == 2 for x in U.points for y in U.points if x != y)
    V = chain_ultrametric(line_space([0, "1/2", 10, "21/2"]))
    assert V.d("0", "1/2") == 1 and V.d("0", "10") == 10
    assert len(chain_ultrametric(FiniteMetricSpace.single())) == 1


def test_chain_non_injective():
    Y = line_space([0, 5])
    U = chain_ultrametric(Y, {"u": "0", "v": "0", "w": "5"})
    assert U.d("u", "v") == 1 and U.d("u", "w") == 6
    with pytest.raises(ValueError):
        chain_ultrametric(Y, {"u": "0", "v": "0"}, strict=True)


@given(st.one_of(tree_metrics(max_n=8), rational_ultrametrics(max_n=8)))
def test_chain_matches_sweep(M):
    U = chain_ultrametric(M)
    ref = oracles.chain_ultrametric_sweep(M)
    assert all(U.d(x, y) == ref[x, y] for x in M.points for y in M.points)
    assert validate_ultrametric(U).ok
    assert all(U.d(x, y) <= M.d(x, y) + 1 for x in M.points for y in M.points)


@given(tree_metrics(max_n=6), st.integers(0, 2**32 - 1))
def test_chain_through_a_map(Y, seed):
    r = np.random.default_rng(seed)
    f = {f"z{i}": Y.points[int(r.integers(len(Y)))] for i in range(5)}
    U = chain_ultrametric(Y, f)
    ref = oracles.chain_ultrametric_sweep(Y, f)
    assert all(U.d(a, b) == ref[a, b] for a in f for b in f)


# ---- nets and discretization -----------------------------------------------

def test_separated_net_examples():
    assert separated_net(line_space([0, "1/2", 1, 3]), 1) == ("0", "3")
    E = equilateral(4, 3)
    assert separated_net(E, 1) == E.points
    assert separated_net(FiniteMetricSpace.single("z")) == ("z",)


@given(tree_metrics(max_n=9))
def test_net_is_separated_and_maximal(M):
    net = separated_net(M, 1)
    assert all(M.d(a, b) > 1 for a in net for b in net if a != b)
    assert all(x in net or any(M.d(x, a) <= 1 for a in net) for x in M.points)


@given(ultrametrics(max_n=10, scales=(2, 3, 4, 5)))
def test_discretize_integral_ultrametric(M):
    disc = discretize(M)
    assert disc.net == tuple(M.sorted_points())
    Y = disc.space
    assert all(M.d(x, y) <= Y.d(x, y) <= M.d(x, y) + 1 for x in M.points for y in M.points)


def test_discretize_two_clusters():
    pts = ["a0", "a1", "a2", "b0", "b1"]
    A = {"a0", "a1", "a2"}
    intra = {("a0", "a1"): Fraction(1, 2), ("a1", "a2"): 1, ("a0", "a2"): 1, ("b0", "b1"): Fraction(3, 4)}

    def d(x, y):
        if x == y:
            return 0
        if (x in A) != (y in A):
            return 100
        return intra.get((x, y), intra.get((y, x)))

    M = FiniteMetricSpace.from_function(pts, d)
    assert validate_metric(M).ok
    disc = discretize(M)
    assert disc.net == ("a0", "b0")
    ref = oracles.chain_ultrametric_sweep(M)
    assert disc.space.d("a0", "b0") == ref["a0", "b0"] == 101
    assert len(discretize(FiniteMetricSpace.single()).net) == 1
