"""Splicing fibre metrics along a section, and coarse disjoint unions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .metric import FiniteMetricSpace, as_dist, common_scale, format_dist
from .resolution import disjoint_ids, resolution_total


@dataclass(frozen=True)
class SpliceSpec:
    base: FiniteMetricSpace
    fibers: Mapping[str, FiniteMetricSpace]
    section: Mapping[str, str]

    def __post_init__(self):
        if set(self.fibers) != set(self.base.points):
            raise ValueError("fibers must be given for exactly the base points")
        for t in self.base.points:
            g = self.section.get(t)
            if g is None or g not in self.fibers[t]:
                raise ValueError(f"section point {g!r} is not in the fiber over {t}")

    def with_section(self, section: Mapping[str, str]) -> "SpliceSpec":
        return SpliceSpec(self.base, self.fibers, section)


def _splice(base, fibers, section):
    ids = disjoint_ids([(t, fibers[t].points) for t in base.points])
    mats, den = common_scale(base, *(fibers[t] for t in base.points))
    bmat, fmats = mats[0], mats[1:]
    sizes = [len(fibers[t]) for t in base.points]
    owner = np.repeat(np.arange(len(base)), sizes)
    # offset of each point from its fibre's section point
    offset = np.concatenate([fm[:, fibers[t].index(section[t])]
                             for t, fm in zip(base.points, fmats)])
    num = np.maximum(bmat[np.ix_(owner, owner)], np.maximum(offset[:, None], offset[None, :]))
    start = 0
    for fm, size in zip(fmats, sizes):
        num[start:start + size, start:start + size] = fm
        start += size
    return [x for g in ids for x in g], num, den, owner


def splice_metric(spec: SpliceSpec) -> FiniteMetricSpace:
    """``d(x, y) = max(d_S(u, t), d_u(x, g(u)), d_t(y, g(t)))`` across fibres."""
    ids, num, den, _ = _splice(spec.base, spec.fibers, spec.section)
    return FiniteMetricSpace.from_scaled(ids, num, den)


@dataclass(frozen=True)
class SectionInvariance:
    condition_holds: bool
    sections_checked: int
    agree: bool
    matches_resolution: bool
    # two sections and a pair of points whose spliced distances differ
    witness: tuple | None = None


def _all_sections(spec: SpliceSpec, limit: int):
    choices = [spec.fibers[t].points for t in spec.base.points]
    total = 1
    for c in choices:
        total *= len(c)
    if total > limit:
        raise ValueError(f"{total} sections exceed the enumeration limit {limit}")
    for combo in itertools.product(*choices):
        yield dict(zip(spec.base.points, combo))


def splice_section_invariance(spec: SpliceSpec, sections: Sequence[Mapping[str, str]] | None = None,
                              *, limit: int = 4096) -> SectionInvariance:
    """Compare splicings over several sections.

    When every fibre is no wider than its distance to the rest of the base,
    all sections must give the resolution total.  ``sections=None``
    enumerates every section (up to ``limit``).
    """
    seps = []
    num, den = spec.base.scaled
    for i, t in enumerate(spec.base.points):
        others = np.delete(num[i], i)
        seps.append(Fraction(int(others.min()), den) if others.size else None)
    holds = all(sep is None or spec.fibers[t].diameter() <= sep
                for t, sep in zip(spec.base.points, seps))
    candidates = [spec.section] + list(sections if sections is not None else _all_sections(spec, limit))
    ids, ref, rden, _ = _splice(spec.base, spec.fibers, candidates[0])
    _, res, _, _ = resolution_total(spec.base, spec.fibers)
    agree = True
    witness = None
    for sec in candidates[1:]:
        _, other, _, _ = _splice(spec.base, spec.fibers, sec)
        diff = np.argwhere(other != ref)
        if diff.size:
            agree = False
            i, j = diff[0].tolist()
            witness = (dict(candidates[0]), dict(sec), (ids[i], ids[j]),
                       Fraction(int(ref[i, j]), rden), Fraction(int(other[i, j]), rden))
            break
    matches = agree and bool(np.array_equal(ref, res))
    return SectionInvariance(holds, len(candidates), agree, matches, witness)


# ---- coarse disjoint unions -----------------------------------------------

@dataclass(frozen=True)
class CoarseUnion:
    """Parts glued along basepoints over a max-ultrametric on part indices.

    Part ``s`` (0-based here) sits at base value ``base_values[s]`` and two
    parts ``s != t`` are at base distance ``max(base_values[s], base_values[t])``.
    """

    parts: tuple[FiniteMetricSpace, ...]
    base_values: tuple[Fraction, ...]
    basepoints: tuple[str, ...]
    total: FiniteMetricSpace
    members: tuple[tuple[str, ...], ...]  # total ids of each part, in part order
    _where: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        where = {}
        for s, (part, ids) in enumerate(zip(self.parts, self.members)):
            for local, gid in zip(part.points, ids):
                where[gid] = (s, local)
        self._where.update(where)

    def locate(self, gid: str) -> tuple[int, str]:
        """``(part index, local id)`` of a total point."""
        return self._where[gid]

    def total_id(self, s: int, local: str) -> str:
        return self.members[s][self.parts[s].index(local)]

    def base_distance(self, s: int, t: int) -> Fraction:
        return Fraction(0) if s == t else max(self.base_values[s], self.base_values[t])


def coarse_union(parts: Sequence[FiniteMetricSpace], basepoints: Sequence[str] | None = None) -> CoarseUnion:
    """Splice parts over indices ``1..n`` with base values ``c * i``.

    ``c = 1 + max part diameter``; default basepoints are least ids.
    """
    parts = tuple(parts)
    if not parts:
        raise ValueError("need at least one part")
    if basepoints is None:
        basepoints = tuple(min(p.points) for p in parts)
    basepoints = tuple(basepoints)
    if len(basepoints) != len(parts):
        raise ValueError("one basepoint per part")
    stride = 1 + max(p.diameter() for p in parts)
    values = tuple(stride * (i + 1) for i in range(len(parts)))
    return union_over(parts, values, basepoints)


def union_over(parts: Sequence[FiniteMetricSpace], base_values: Sequence, basepoints: Sequence[str],
               *, qualify: bool = True) -> CoarseUnion:
    """Spliced union of ``parts`` over the max-ultrametric on ``base_values``."""
    parts = tuple(parts)
    values = tuple(as_dist(v) for v in base_values)
    if len(set(values)) != len(values):
        raise ValueError("base values must be distinct")
    names = [str(i + 1) for i in range(len(parts))]
    vals_den = math.lcm(*(v.denominator for v in values))
    scaled = np.array([int(v * vals_den) for v in values], dtype=object)
    bnum = np.maximum(scaled[:, None], scaled[None, :])
    np.fill_diagonal(bnum, 0)
    base = FiniteMetricSpace.from_scaled(names, bnum, int(vals_den))
    fibers = dict(zip(names, parts))
    section = dict(zip(names, basepoints))
    spec = SpliceSpec(base, fibers, section)
    if qualify:
        members = tuple(tuple(f"{n}:{x}" for x in p.points) for n, p in zip(names, parts))
    else:
        members = tuple(tuple(p.points) for p in parts)
        flat = [x for g in members for x in g]
        if len(set(flat)) != len(flat):
            raise ValueError("unqualified ids collide across parts")
    _, num, den, _ = _splice(spec.base, spec.fibers, spec.section)
    total = FiniteMetricSpace.from_scaled([x for g in members for x in g], num, den)
    return CoarseUnion(parts, values, tuple(basepoints), total, members)


@dataclass(frozen=True)
class BoundedWitness:
    scale: Fraction
    bounded: tuple[tuple[str, ...], ...]  # B_s as total ids, per part
    valid: bool
    failures: tuple[tuple[str, str], ...] = ()

    def nonempty_parts(self) -> list[int]:
        return [s for s, b in enumerate(self.bounded) if b]


def verify_union_at_scale(U: CoarseUnion, M) -> BoundedWitness:
    """Canonical bounded sets for scale ``M``, checked against every cross pair.

    ``B_s`` is the ``M``-ball about the basepoint of part ``s`` when the part's
    base value is at most ``M``, otherwise empty.  Outside the ``B_s``, any two
    points of different parts must be more than ``M`` apart.
    """
    M = as_dist(M)
    bounded = []
    for s, part in enumerate(U.parts):
        if U.base_values[s] <= M:
            g = U.basepoints[s]
            bounded.append(tuple(U.members[s][i] for i, x in enumerate(part.points) if part.d(x, g) <= M))
        else:
            bounded.append(())
    num, den = U.total.scaled
    owner = np.empty(len(U.total), dtype=np.int64)
    outside = np.ones(len(U.total), dtype=bool)
    for s, ids in enumerate(U.members):
        for gid in ids:
            owner[U.total.index(gid)] = s
        for gid in bounded[s]:
            outside[U.total.index(gid)] = False
    # d > M  <=>  num * M.den > M.num * den
    close = num * M.denominator <= M.numerator * den
    bad = close & (owner[:, None] != owner[None, :]) & outside[:, None] & outside[None, :]
    pts = U.total.points
    failures = tuple((pts[i], pts[j]) for i, j in np.argwhere(np.triu(bad, 1)).tolist())
    return BoundedWitness(M, tuple(bounded), not failures, failures)


def radial_block_decomposition(M: FiniteMetricSpace, x0: str) -> CoarseUnion:
    """Fibres of the radial resolution at ``x0``, ordered by radius.

    The union keeps the original ids and the original metric.
    """
    from .resolution import radial_resolution

    if not M.is_integral:
        raise ValueError("radial block decomposition expects an integral ultrametric")
    R = radial_resolution(M, x0)
    parts, values, basepoints = [], [], []
    for t in R.base.points:
        ids = sorted(R.fiber_ids(t))
        parts.append(M.subspace(ids))
        values.append(as_dist(t))
        basepoints.append(ids[0])
    U = union_over(parts, values, basepoints, qualify=False)
    if U.total != M:
        raise AssertionError("radial splice did not reproduce the metric")
    return CoarseUnion(U.parts, U.base_values, U.basepoints, M.subspace(U.total.points), U.members)


@dataclass(frozen=True)
class UnionMap:
    mapping: dict[str, str]
    # (R, S): pairs within R in the source land within S in the target
    expansion: tuple[tuple[Fraction, Fraction], ...]
    # (R, S): pairs within R in the target came from pairs within S
    compression: tuple[tuple[Fraction, Fraction], ...]
    within_part_exact: bool


def control_tables(src: np.ndarray, src_den: int, dst: np.ndarray, dst_den: int):
    """Monotone control functions of a map given paired distance matrices.

    ``expansion[R]`` = max target distance over source pairs at distance
    ``<= R``; ``compression`` is the same with the roles swapped.
    """
    iu = np.triu_indices(src.shape[0], 1)
    a = [Fraction(int(v), src_den) for v in src[iu].tolist()]
    b = [Fraction(int(v), dst_den) for v in dst[iu].tolist()]
    return _running_max(a, b), _running_max(b, a)


def _running_max(keys, vals):
    order = sorted(zip(keys, vals))
    out = []
    best = None
    i = 0
    while i < len(order):
        r = order[i][0]
        while i < len(order) and order[i][0] == r:
            best = order[i][1] if best is None else max(best, order[i][1])
            i += 1
        out.append((r, best))
    return tuple(out)


class NotIsometricError(ValueError):
    pass


def map_union(U: CoarseUnion, V: CoarseUnion, part_maps: Sequence[Mapping[str, str]]) -> UnionMap:
    """Induced map of unions from per-part isometric embeddings."""
    if len(U.parts) != len(V.parts) or len(part_maps) != len(U.parts):
        raise ValueError("unions and part maps must share one index set")
    mapping = {}
    for s, (P, Q, f) in enumerate(zip(U.parts, V.parts, part_maps)):
        check_isometric(P, Q, f, what=f"part {s + 1}")
        for x in P.points:
            mapping[U.total_id(s, x)] = V.total_id(s, f[x])
    src_ids = list(U.total.points)
    src, sden = U.total.scaled
    dst_space = V.total.subspace([mapping[x] for x in src_ids]) if len(set(mapping.values())) == len(mapping) \
        else None
    if dst_space is None:
        raise NotIsometricError("part maps collide in the target union")
    dst, dden = dst_space.scaled
    exp, comp = control_tables(src, sden, dst, dden)
    return UnionMap(mapping, exp, comp, True)


def check_isometric(P: FiniteMetricSpace, Q: FiniteMetricSpace, f: Mapping[str, str], *, what: str = "map") -> None:
    missing = [x for x in P.points if x not in f]
    if missing:
        raise NotIsometricError(f"{what} undefined on {missing[0]}")
    image = [f[x] for x in P.points]
    if len(set(image)) != len(image):
        raise NotIsometricError(f"{what} is not injective")
    (a, b), _ = common_scale(P, Q.subspace(image))
    if not np.array_equal(a, b):
        i, j = np.argwhere(a != b)[0].tolist()
        x, y = P.points[i], P.points[j]
        raise NotIsometricError(
            f"{what} distorts ({x}, {y}): {format_dist(P.d(x, y))} -> {format_dist(Q.d(f[x], f[y]))}")


@dataclass(frozen=True)
class BoundedPiece:
    part: int
    points: tuple[str, ...]
    diameter: Fraction


def union_boundedness_check(U: CoarseUnion, B) -> tuple[BoundedPiece, ...]:
    """Split a set of total points into its per-part pieces with diameters."""
    by_part: dict[int, list[str]] = {}
    for x in B:
        s, _ = U.locate(x)
        by_part.setdefault(s, []).append(x)
    pieces = []
    for s in sorted(by_part):
        ids = tuple(sorted(by_part[s]))
        pieces.append(BoundedPiece(s, ids, U.total.subspace(ids).diameter()))
    return tuple(pieces)


def ball(M: FiniteMetricSpace, center: str, radius) -> tuple[str, ...]:
    """Closed ball ``{y : d(center, y) <= radius}`` in point order."""
    r = as_dist(radius)
    num, den = M.scaled
    row = num[M.index(center)]
    return tuple(p for p, v in zip(M.points, row.tolist()) if int(v) * r.denominator <= r.numerator * den)
