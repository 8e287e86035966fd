"""Address models of the countable universal spaces CU(D), CU and PU.

CU(D) is never materialised: a point is a tuple of natural-number
coordinates, one per positive value of D, most significant scale first.
PU is materialised only as a finite prefix of blocks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .fu import FUSpace, build_fu, embed_into_fu, fu_path_distance, fu_size
from .metric import (
    DSet,
    FiniteMetricSpace,
    NotIntegralError,
    discretize,
    value_set,
)
from .resolution import assemble_total, radial_resolution
from .splice import CoarseUnion, coarse_union, control_tables, union_over


@dataclass(frozen=True)
class CUAddress:
    D: DSet
    coords: tuple[int, ...]  # coordinate for max(D) first

    def __post_init__(self):
        if len(self.coords) != len(self.D) - 1:
            raise ValueError(f"CU({{{self.D}}}) addresses have {len(self.D) - 1} coordinates")
        if any(c < 0 for c in self.coords):
            raise ValueError("coordinates are natural numbers")


def cu_distance(a: CUAddress, b: CUAddress) -> int:
    """Scale of the most significant coordinate where the addresses differ."""
    if a.D != b.D:
        raise ValueError("addresses live in different CU(D)")
    scales = a.D.positive[::-1]
    for g, x, y in zip(scales, a.coords, b.coords):
        if x != y:
            return g
    return 0


def embed_into_cu_d(X: FiniteMetricSpace, D=None) -> dict[str, CUAddress]:
    """Isometric embedding of a D-ultrametric space into CU(D).

    At scale ``k = max D`` a greedy maximal ``k``-separated set (id order)
    splits ``X`` into parts of diameter ``< k``; part ``j`` gets top
    coordinate ``j`` and the recursion continues on ``D - {k}``.
    """
    vals = value_set(X)
    D = vals if D is None else (D if isinstance(D, DSet) else DSet.of(D))
    if not vals.issubset(D):
        raise ValueError(f"distances {vals} are not contained in D = {D}")
    num, _ = X.scaled
    coords: dict[int, list[int]] = {i: [] for i in range(len(X))}
    rank = {i: r for r, i in enumerate(sorted(range(len(X)), key=lambda i: X.points[i]))}

    def split(idx: list[int], scales: Sequence[int]) -> None:
        if not scales:
            return
        k = scales[0]
        centres: list[int] = []
        part: dict[int, int] = {}
        for i in sorted(idx, key=rank.__getitem__):
            for j, c in enumerate(centres):
                if num[i, c] < k:
                    part[i] = j
                    break
            else:
                part[i] = len(centres)
                centres.append(i)
        for i in idx:
            coords[i].append(part[i])
        for j in range(len(centres)):
            split([i for i in idx if part[i] == j], scales[1:])

    split(list(range(len(X))), D.positive[::-1])
    out = {X.points[i]: CUAddress(D, tuple(c)) for i, c in coords.items()}
    _check_cu_isometry(X, out)
    return out


def address_matrix(addresses: Sequence[CUAddress]) -> np.ndarray:
    """Pairwise CU(D) distances of addresses sharing one D."""
    if not addresses:
        return np.zeros((0, 0), dtype=np.int64)
    D = addresses[0].D
    scales = np.array(D.positive[::-1], dtype=np.int64)
    if scales.size == 0:
        return np.zeros((len(addresses),) * 2, dtype=np.int64)
    A = np.array([a.coords for a in addresses], dtype=np.int64)
    diff = A[:, None, :] != A[None, :, :]
    first = diff.argmax(axis=2)
    return np.where(diff.any(axis=2), scales[first], 0)


def _check_cu_isometry(X: FiniteMetricSpace, out: Mapping[str, CUAddress]) -> None:
    got = address_matrix([out[x] for x in X.points])
    num, _ = X.scaled
    if not np.array_equal(got, num):
        i, j = np.argwhere(got != num)[0].tolist()
        raise AssertionError(f"CU embedding distorts ({X.points[i]}, {X.points[j]})")


@dataclass(frozen=True)
class CUPoint:
    level: int
    address: CUAddress

    def __post_init__(self):
        if self.address.D != DSet(tuple(range(self.level + 1))):
            raise ValueError("a level-i point needs an address over {0, ..., i}")

    @classmethod
    def make(cls, level: int, coords: Sequence[int]) -> "CUPoint":
        return cls(level, CUAddress(DSet(tuple(range(level + 1))), tuple(coords)))


def cu_global_distance(p: CUPoint, q: CUPoint) -> int:
    if p.level != q.level:
        return max(p.level, q.level)
    return cu_distance(p.address, q.address)


@dataclass(frozen=True)
class CUEmbedding:
    net: tuple[str, ...]
    chain_metric: FiniteMetricSpace  # integral ultrametric on the net
    centre: str
    points: dict[str, CUPoint]  # every point of the input
    snap: dict[str, str]  # input point -> net point it was sent through
    snap_radius: Fraction
    net_isometric: bool
    expansion: tuple = field(default=(), repr=False)
    compression: tuple = field(default=(), repr=False)


def embed_into_cu(M: FiniteMetricSpace) -> CUEmbedding:
    """Coarse embedding of a finite metric space into CU.

    The 1-separated net is given its chain ultrametric, resolved radially
    about its least point, and each radial fibre at radius ``t`` goes to
    level ``t`` via :func:`embed_into_cu_d`.  Other points follow their
    nearest net point (ties by id).  On the net the map is an exact isometry
    of the chain metric; the control tables against ``M`` are reported.
    """
    disc = discretize(M)
    Y = disc.space
    centre = min(disc.net)
    R = radial_resolution(Y, centre)
    images: dict[str, CUPoint] = {}
    for t in R.base.points:
        level = int(t)
        fiber = Y.subspace(sorted(R.fiber_ids(t)))
        addr = embed_into_cu_d(fiber, DSet(tuple(range(level + 1))))
        for x, a in addr.items():
            images[x] = CUPoint(level, a)
    net_ids = list(Y.points)
    got = np.array([[cu_global_distance(images[x], images[y]) for y in net_ids] for x in net_ids],
                   dtype=np.int64)
    ynum, _ = Y.scaled
    isometric = bool(np.array_equal(got, ynum))

    num, den = M.scaled
    net_ix = [M.index(x) for x in sorted(disc.net)]
    snap = {}
    radius = Fraction(0)
    for p in M.points:
        row = num[M.index(p), net_ix]
        best = int(np.argmin(row))  # first minimum = least id among ties
        snap[p] = M.points[net_ix[best]]
        radius = max(radius, Fraction(int(row[best]), den))
    points = {p: images[snap[p]] for p in M.points}
    img = np.array([[cu_global_distance(points[x], points[y]) for y in M.points] for x in M.points],
                   dtype=np.int64)
    exp, comp = control_tables(num, den, img, 1)
    return CUEmbedding(tuple(disc.net), Y, centre, points, snap, radius, isometric, exp, comp)


# ---- enumeration of finite subsets of N containing 0 -------------------------

def dset_index(n: int) -> DSet:
    """``D_n``: positive ``g`` is in ``D_n`` iff bit ``g - 1`` of ``n`` is set."""
    if n < 1:
        raise ValueError("index starts at 1")
    return DSet.of(g + 1 for g in range(n.bit_length()) if n >> g & 1)


def index_dset(D) -> int:
    D = D if isinstance(D, DSet) else DSet.of(D)
    n = sum(1 << (g - 1) for g in D.positive)
    if n == 0:
        raise ValueError("{0} has no index: the enumeration starts at D_1 = {0, 1}")
    return n


def cantor_pairs() -> Iterator[tuple[int, int]]:
    """``(m, n)`` for ``m, n >= 1`` along anti-diagonals, ``m`` ascending."""
    for s in itertools.count(2):
        for m in range(1, s):
            yield m, s - m


def block_diameter(m: int, n: int) -> int:
    return 0 if m == 1 else dset_index(n).top


class PUModel:
    """Lazily evaluated PU: block ``i`` (1-based) is ``FU(m_i, D_{n_i})``.

    Block ``i`` sits over ``r_i = i + sum_{j <= i} diam(Y_j)`` and points of
    different blocks are ``max(r_i, r_j)`` apart.
    """

    def __init__(self):
        self._pairs: list[tuple[int, int]] = []
        self._radii: list[int] = []
        self._gen = cantor_pairs()

    def _extend(self, i: int) -> None:
        while len(self._pairs) < i:
            m, n = next(self._gen)
            self._pairs.append((m, n))
            prev = self._radii[-1] - len(self._radii) if self._radii else 0
            j = len(self._pairs)
            self._radii.append(j + prev + block_diameter(m, n))

    def pair(self, i: int) -> tuple[int, int]:
        self._extend(i)
        return self._pairs[i - 1]

    def radius(self, i: int) -> int:
        self._extend(i)
        return self._radii[i - 1]

    def block_params(self, i: int) -> tuple[int, DSet]:
        m, n = self.pair(i)
        return m, dset_index(n)

    def find_block(self, size: int, values: DSet, after: int = 0, *, limit: int = 10**7) -> int:
        """Least block index ``> after`` with room for ``size`` points and all ``values``."""
        i = after + 1
        while i <= limit:
            m, D = self.block_params(i)
            if m >= size and values.issubset(D):
                return i
            i += 1
        raise ValueError("no block found within the search limit")

    def distance(self, p: tuple[int, str], q: tuple[int, str]) -> int:
        """Distance between ``(block, path)`` addresses."""
        (i, a), (j, b) = p, q
        if i != j:
            return max(self.radius(i), self.radius(j))
        m, D = self.block_params(i)
        return fu_path_distance(m, D, a, b)


def pu_point_id(block: int, fu_id: str) -> str:
    return f"b{block}:{fu_id}"


def parse_pu_point_id(pid: str) -> tuple[int, str]:
    head, _, fu_id = pid.partition(":")
    if not head.startswith("b") or not fu_id.startswith("x"):
        raise ValueError(f"not a PU point id: {pid!r}")
    return int(head[1:]), fu_id[1:]


@dataclass(frozen=True)
class PUPrefix:
    N: int
    pairs: tuple[tuple[int, int], ...]
    blocks: tuple[FUSpace, ...]
    radii: tuple[int, ...]
    total: FiniteMetricSpace
    projection: Mapping[str, str]

    def as_union(self) -> CoarseUnion:
        """The prefix as a union of its blocks over the radii (same ids, same metric)."""
        names = [str(r) for r in self.radii]
        parts = [self.total.subspace([x for x in self.total.points if self.projection[x] == t])
                 for t in names]
        U = union_over(parts, self.radii, [p.points[0] for p in parts], qualify=False)
        if U.total != self.total:
            raise AssertionError("block union disagrees with the assembled prefix")
        return U


PU_POINT_LIMIT = 5_000


def build_pu_prefix(N: int) -> PUPrefix:
    """First ``N`` blocks of PU assembled as an ultrametric resolution over the radii."""
    if N < 1:
        raise ValueError("N must be at least 1")
    model = PUModel()
    pairs = tuple(model.pair(i) for i in range(1, N + 1))
    size = sum(fu_size(m, dset_index(n)) for m, n in pairs)
    if size > PU_POINT_LIMIT:
        raise ValueError(f"PU prefix would have {size} points, above {PU_POINT_LIMIT}")
    blocks = tuple(build_fu(m, dset_index(n)) for m, n in pairs)
    radii = tuple(model.radius(i) for i in range(1, N + 1))
    names = [str(r) for r in radii]
    base = FiniteMetricSpace(names, [[0 if a == b else max(a, b) for b in radii] for a in radii])
    fibers = {name: blk.space.relabel(lambda x, i=i: pu_point_id(i, x))
              for i, (name, blk) in enumerate(zip(names, blocks), start=1)}
    R = assemble_total(base, fibers, "ultrametric")
    return PUPrefix(N, pairs, blocks, radii, R.total, dict(R.projection))


@dataclass(frozen=True)
class PUEmbedding:
    blocks: tuple[int, ...]  # block index chosen for each part
    mapping: dict[str, str]  # union point id -> PU point id
    within_part_exact: bool
    expansion: tuple
    compression: tuple


def embed_into_pu(U: CoarseUnion, model: PUModel | None = None) -> PUEmbedding:
    """Send part ``k`` of a union of finite integral ultrametrics into PU.

    Blocks are matched greedily with strictly increasing indices, each large
    enough and with a D-set containing the part's distances.
    """
    model = model or PUModel()
    chosen = []
    mapping: dict[str, str] = {}
    prev = 0
    for s, part in enumerate(U.parts):
        try:
            vals = value_set(part)
        except NotIntegralError as exc:
            raise NotIntegralError(f"part {s + 1}: {exc}") from None
        i = model.find_block(len(part), vals, prev)
        m, D = model.block_params(i)
        local = embed_into_fu(part, m, D)
        for x, fid in local.items():
            mapping[U.total_id(s, x)] = pu_point_id(i, fid)
        chosen.append(i)
        prev = i
    src_ids = list(U.total.points)
    addr = [parse_pu_point_id(mapping[x]) for x in src_ids]
    img = np.array([[model.distance(a, b) for b in addr] for a in addr], dtype=np.int64)
    num, den = U.total.scaled
    exact = True
    for s, ids in enumerate(U.members):
        ix = [U.total.index(x) for x in ids]
        sub = num[np.ix_(ix, ix)]
        exact &= bool(np.array_equal(sub, img[np.ix_(ix, ix)] * den))
    exp, comp = control_tables(num, den, img, 1)
    return PUEmbedding(tuple(chosen), mapping, exact, exp, comp)


def counterexample_family(levels: int, per_part: int) -> CoarseUnion:
    """Finite truncation of the non-properly-embeddable family.

    For each ``n = 1..levels`` one part with ``per_part`` points pairwise
    ``n + 1`` apart, glued by :func:`coarse_union`.
    """
    from .generators import equilateral

    if levels < 1 or per_part < 1:
        raise ValueError("levels and per_part must be positive")
    parts = [equilateral(per_part, n + 1) for n in range(1, levels + 1)]
    return coarse_union(parts)

