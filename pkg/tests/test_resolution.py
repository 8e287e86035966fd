from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import rational_ultrametrics, seeds, ultrametrics
from ultracoarse.generators import equilateral, random_ultrametric
from ultracoarse.metric import FiniteMetricSpace, NotUltrametricError, validate_ultrametric
from ultracoarse.resolution import (
    LegoNode,
    PreconditionError,
    Resolution,
    assemble_total,
    lca_metric,
    lego_decompose,
    leaves,
    radial_resolution,
    subset_sup_metric,
    to_dot,
    to_newick,
    top_split,
    verify_resolution,
)


def abc():
    # d(a,b) = 2, d(a,c) = d(b,c) = 5
    return FiniteMetricSpace(["a", "b", "c"], [[0, 2, 5], [2, 0, 5], [5, 5, 0]])


def pair(d, ids=("u", "t")):
    return FiniteMetricSpace(list(ids), [[0, d], [d, 0]])


# ---- verify_resolution --------------------------------------------------------

def test_verify_onto_a_point(rng):
    M = random_ultrametric(8, rng)
    R = Resolution(M, FiniteMetricSpace.single("*"), {x: "*" for x in M.points})
    assert verify_resolution(R).ok


@given(ultrametrics(max_n=12), st.data())
def test_radial_resolution_verifies(M, data):
    x0 = data.draw(st.sampled_from(M.points))
    assert verify_resolution(radial_resolution(M, x0)).ok


def test_verify_flags_mismatched_base():
    M = abc()
    base = FiniteMetricSpace(["a", "b", "c"], [[0, 2, 4], [2, 0, 4], [4, 4, 0]])
    rep = verify_resolution(Resolution(M, base, {x: x for x in M.points}))
    assert {v.points for v in rep} == {("a", "c"), ("b", "c")}


def test_verify_rejects_non_surjective():
    M = abc()
    with pytest.raises(ValueError, match="misses"):
        verify_resolution(Resolution(M, pair(5, ("p", "q")), {x: "p" for x in M.points}))


# ---- assemble_total ---------------------------------------------------------

def test_assemble_general():
    base = pair(10)
    R = assemble_total(base, {"u": pair(4, ("x1", "x2")), "t": FiniteMetricSpace.single("y")})
    T = R.total
    assert len(T) == 3
    assert T.d("x1", "y") == T.d("x2", "y") == 10 and T.d("x1", "x2") == 4
    assert verify_resolution(R).ok


def test_assemble_general_bound_enforced():
    with pytest.raises(PreconditionError, match="fiber over u"):
        assemble_total(pair(10), {"u": pair(6, ("x1", "x2")), "t": FiniteMetricSpace.single("y")})


def test_assemble_ultrametric_mode():
    R = assemble_total(pair(5), {"u": pair(5, ("x1", "x2")), "t": FiniteMetricSpace.single("y")}, "ultrametric")
    assert validate_ultrametric(R.total).ok
    assert oracles.ultra_ok(R.total)
    with pytest.raises(PreconditionError):
        assemble_total(pair(5), {"u": pair(6, ("x1", "x2")), "t": FiniteMetricSpace.single("y")}, "ultrametric")


def test_assemble_qualifies_clashing_ids():
    R = assemble_total(pair(10), {"u": FiniteMetricSpace.single("x"), "t": FiniteMetricSpace.single("x")})
    assert R.total.points == ("u:x", "t:x")


# ---- radial resolution --------------------------------------------------------

def test_radial_example():
    R = radial_resolution(abc(), "a")
    assert R.base.points == ("0", "2", "5")
    assert R.base.d("2", "5") == 5 and R.base.d("0", "2") == 2
    assert R.total.d("b", "c") == R.base.d(R.projection["b"], R.projection["c"]) == 5
    single = radial_resolution(FiniteMetricSpace.single(), "x")
    assert single.base.points == ("0",)


def test_radial_equidistant():
    E = equilateral(5, 3)
    R = radial_resolution(E, "p0")
    assert R.base.points == ("0", "3")
    assert R.fiber_ids("3") == E.points[1:]


def test_radial_requires_ultrametric():
    with pytest.raises(NotUltrametricError):
        radial_resolution(FiniteMetricSpace(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]]), "a")


# ---- top split --------------------------------------------------------------

def test_top_split_examples():
    R = top_split(abc())
    assert R.base.points == ("a", "c")
    assert R.fiber_ids("a") == ("a", "b") and R.base.d("a", "c") == 5
    S = top_split(equilateral(4, 7))
    assert len(S.base) == 4
    assert len(top_split(pair(3)).base) == 2


@given(ultrametrics(min_n=2, max_n=40))
def test_top_split_round_trip(M):
    R = top_split(M)
    assert verify_resolution(R).ok
    again = assemble_total(R.base, R.fibers(), "ultrametric")
    assert again.total == M


# ---- lego trees -------------------------------------------------------------

def test_lego_example():
    T = lego_decompose(abc())
    assert T == LegoNode(Fraction(5), (LegoNode(Fraction(2), ("a", "b")), "c"))
    assert to_newick(T) == "((a,b)2,c)5;"
    E = lego_decompose(equilateral(3, 4))
    assert E.scale == 4 and E.children == ("p0", "p1", "p2")
    dot = to_dot(T)
    assert dot.startswith("digraph") and dot.count("->") == 4


def test_lego_round_trip_large(rng):
    for _ in range(5):
        M = random_ultrametric(200, rng)
        assert lca_metric(lego_decompose(M)) == M


@given(rational_ultrametrics(max_n=15))
def test_lego_round_trip_rational(M):
    T = lego_decompose(M)
    assert sorted(leaves(T)) == M.sorted_points()
    assert lca_metric(T) == M


def test_newick_quotes_awkward_ids():
    M = FiniteMetricSpace(["a b", "c"], [[0, "3/2"], ["3/2", 0]])
    assert to_newick(lego_decompose(M)) == "('a b',c)3/2;"


# ---- subset sup metric ------------------------------------------------------

def test_subset_sup_examples():
    M = abc()
    S = subset_sup_metric(M, [{"a"}, {"c"}])
    assert S.d("0", "1") == 5
    assert subset_sup_metric(M, [{"a", "b"}, {"c"}]).d("0", "1") == 5
    assert subset_sup_metric(M, [{"a"}, {"b"}]).d("0", "1") == 2
    with pytest.raises(ValueError):
        subset_sup_metric(M, [set(), {"a"}])


@given(ultrametrics(min_n=2, max_n=8), seeds)
def test_subset_sup_is_ultrametric(M, seed):
    r = np.random.default_rng(seed)
    family = set()
    for _ in range(6):
        k = int(r.integers(1, len(M) + 1))
        family.add(frozenset(r.choice(M.points, size=k, replace=False).tolist()))
    S = subset_sup_metric(M, sorted(family, key=sorted))
    assert oracles.ultra_ok(S)
