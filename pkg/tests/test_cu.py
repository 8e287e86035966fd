import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import tree_metrics, ultrametrics
from ultracoarse.cu import (
    CUAddress,
    CUPoint,
    PUModel,
    block_diameter,
    build_pu_prefix,
    cantor_pairs,
    counterexample_family,
    cu_distance,
    cu_global_distance,
    dset_index,
    embed_into_cu,
    embed_into_cu_d,
    embed_into_pu,
    index_dset,
    parse_pu_point_id,
)
from ultracoarse.fu import build_fu
from ultracoarse.generators import equilateral, random_ultrametric
from ultracoarse.metric import DSet, FiniteMetricSpace, validate_ultrametric
from ultracoarse.splice import ball, coarse_union, union_boundedness_check

D013 = DSet((0, 1, 3))


def addr(*coords, D=D013):
    return CUAddress(D, coords)


# ---- CU(D) ------------------------------------------------------------------------

def test_cu_distance_examples():
    # coordinates are listed top scale first: (scale 3, scale 1)
    assert cu_distance(addr(0, 0), addr(0, 4)) == 1
    assert cu_distance(addr(0, 0), addr(7, 2)) == 3
    assert cu_distance(addr(5, 5), addr(5, 5)) == 0


def test_cu_distance_is_ultrametric():
    pts = {f"{a}.{b}": addr(a, b) for a in range(3) for b in range(3)}
    M = FiniteMetricSpace.from_function(list(pts), lambda x, y: cu_distance(pts[x], pts[y]))
    assert oracles.ultra_ok(M)


def test_embed_cu_d_examples():
    E = equilateral(5, 4)
    out = embed_into_cu_d(E, DSet.of([4]))
    assert [out[x].coords for x in E.points] == [(0,), (1,), (2,), (3,), (4,)]
    single = embed_into_cu_d(FiniteMetricSpace.single(), D013)
    assert single["x"].coords == (0, 0)


def test_embed_cu_d_large(rng):
    M = random_ultrametric(200, rng, scales=(1, 2, 3, 4, 5, 6))
    out = embed_into_cu_d(M, DSet(tuple(range(7))))
    for x, y in itertools.combinations(M.points[:60], 2):
        assert cu_distance(out[x], out[y]) == M.d(x, y)


@given(ultrametrics(max_n=15))
def test_embed_cu_d_generated(M):
    out = embed_into_cu_d(M)
    assert all(cu_distance(out[x], out[y]) == M.d(x, y) for x in M.points for y in M.points)


def test_embed_cu_d_rejects_foreign_values():
    with pytest.raises(ValueError):
        embed_into_cu_d(equilateral(2, 2), D013)


# ---- CU -------------------------------------------------------------------------------

def test_cu_global_examples():
    assert cu_global_distance(CUPoint.make(3, (0, 0, 0)), CUPoint.make(5, (0,) * 5)) == 5
    assert cu_global_distance(CUPoint.make(2, (1, 0)), CUPoint.make(2, (1, 0))) == 0
    p = CUPoint.make(4, (0, 0, 1, 0))
    q = CUPoint.make(4, (0, 0, 2, 5))
    assert cu_global_distance(p, q) == 2


def test_embed_cu_integral_ultrametric(rng):
    M = random_ultrametric(30, rng, scales=(2, 3, 5, 8))
    emb = embed_into_cu(M)
    assert emb.net == tuple(M.sorted_points()) and emb.net_isometric
    for x in M.points:
        for y in M.points:
            assert cu_global_distance(emb.points[x], emb.points[y]) == emb.chain_metric.d(x, y)


def test_embed_cu_single_point():
    emb = embed_into_cu(FiniteMetricSpace.single())
    assert emb.points["x"].level == 0


@given(tree_metrics(max_n=12))
def test_embed_cu_net_exact(M):
    emb = embed_into_cu(M)
    assert emb.net_isometric
    ref = oracles.chain_ultrametric_sweep(M)
    for x in emb.net:
        for y in emb.net:
            assert cu_global_distance(emb.points[x], emb.points[y]) == ref[x, y]
    # radial fibres land on their radius
    for x in emb.net:
        assert emb.points[x].level == emb.chain_metric.d(emb.centre, x)
    assert emb.snap_radius <= 1


# ---- D-set enumeration ---------------------------------------------------------------

def test_dset_index_examples():
    assert dset_index(1) == DSet((0, 1))
    assert dset_index(2) == DSet((0, 2))
    assert dset_index(3) == DSet((0, 1, 2))
    assert index_dset({0, 1}) == 1
    with pytest.raises(ValueError):
        index_dset({0})


def test_dset_round_trip():
    assert all(index_dset(dset_index(n)) == n for n in range(1, 10_001))


def test_cantor_order():
    assert list(itertools.islice(cantor_pairs(), 6)) == [(1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1)]


# ---- PU ---------------------------------------------------------------------------------

def test_block_diameter_matches_materialised():
    for m, n in itertools.islice(cantor_pairs(), 30):
        assert block_diameter(m, n) == build_fu(m, dset_index(n)).space.diameter()


def test_radius_rule():
    model = PUModel()
    total = 0
    for i in range(1, 40):
        total += block_diameter(*model.pair(i))
        assert model.radius(i) == i + total
    assert model.radius(1) == 1 + block_diameter(1, 1)


def test_prefix_ultrametric():
    P = build_pu_prefix(10)
    assert validate_ultrametric(P.total).ok
    assert len(P.blocks) == 10


def test_prefix_balls_are_finite_pieces():
    P = build_pu_prefix(8)
    U = P.as_union()
    for centre in P.total.points:
        home = U.locate(centre)[0]
        for r in range(0, int(P.total.diameter()) + 2):
            pieces = union_boundedness_check(U, ball(P.total, centre, r))
            assert sum(len(p.points) for p in pieces) == len(ball(P.total, centre, r))
            for p in pieces:
                assert p.part == home or P.radii[p.part] <= r


def test_embed_pu_examples():
    U = coarse_union([FiniteMetricSpace.single("a")])
    assert embed_into_pu(U).blocks == (1,)
    V = coarse_union([equilateral(2, 2), build_fu(2, [1, 2]).space])
    emb = embed_into_pu(V)
    model = PUModel()
    (i, j) = emb.blocks
    assert i < j
    assert DSet((0, 2)).issubset(model.block_params(i)[1])
    assert DSet((0, 1, 2)).issubset(model.block_params(j)[1])
    assert emb.within_part_exact


@given(st.lists(ultrametrics(max_n=5, scales=(1, 2, 3)), min_size=4, max_size=4))
def test_embed_pu_four_parts(parts):
    U = coarse_union(parts)
    emb = embed_into_pu(U)
    assert list(emb.blocks) == sorted(set(emb.blocks))
    model = PUModel()
    for s, part in enumerate(parts):
        for x in part.points:
            for y in part.points:
                a = parse_pu_point_id(emb.mapping[U.total_id(s, x)])
                b = parse_pu_point_id(emb.mapping[U.total_id(s, y)])
                assert model.distance(a, b) == part.d(x, y)


# ---- counterexample family ---------------------------------------------------------

def test_counterexample_family():
    U = counterexample_family(1, 2)
    assert len(U.parts) == 1 and U.parts[0].diameter() == 2
    V = counterexample_family(4, 1)
    assert all(len(p) == 1 for p in V.parts)
    assert validate_ultrametric(V.total).ok
    W = counterexample_family(4, 3)
    assert validate_ultrametric(W.total).ok
    pieces = union_boundedness_check(W, W.total.points)
    assert [p.part for p in pieces] == [0, 1, 2, 3]
