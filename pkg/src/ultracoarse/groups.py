"""Left-invariant ultrametrics on the countable Z/2 vector space.

A group element is a finite set of positive coordinates (a ``BitVector``;
bit ``i - 1`` of ``bits`` is coordinate ``i``), the group operation is
symmetric difference.  A :class:`Filtration` picks the nested subgroups
``G_{a_n} = span(e_1, ..., e_{dim_n})`` and induces
``d(g, h) = min{a_n : g + h in G_{a_n}}``.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metric import FiniteMetricSpace, components_below, require_ultrametric
from .splice import CoarseUnion, control_tables


@dataclass(frozen=True, order=True)
class BitVector:
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("bit vectors are non-negative integers")

    @classmethod
    def from_support(cls, coords: Iterable[int]) -> "BitVector":
        bits = 0
        for c in coords:
            if c < 1:
                raise ValueError("coordinates start at 1")
            bits ^= 1 << (c - 1)
        return cls(bits)

    def support(self) -> tuple[int, ...]:
        b, out, i = self.bits, [], 1
        while b:
            if b & 1:
                out.append(i)
            b >>= 1
            i += 1
        return tuple(out)

    @property
    def top(self) -> int:
        """Highest coordinate in the support, 0 for the identity."""
        return self.bits.bit_length()

    def __xor__(self, other: "BitVector") -> "BitVector":
        return BitVector(self.bits ^ other.bits)

    __add__ = __xor__


IDENTITY = BitVector(0)


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class Filtration:
    scales: tuple[int, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        s, d = tuple(int(v) for v in self.scales), tuple(int(v) for v in self.dims)
        if len(s) != len(d) or not s:
            raise ValueError("scales and dims must be non-empty and of equal length")
        if s[0] != 0 or d[0] != 0:
            raise ValueError("G_0 must be trivial: scale 0 with dimension 0")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("scales must strictly increase")
        if any(b < a for a, b in zip(d, d[1:])):
            raise ValueError("dimensions must not decrease")
        object.__setattr__(self, "scales", s)
        object.__setattr__(self, "dims", d)

    @classmethod
    def from_dims(cls, dims: Sequence[int]) -> "Filtration":
        """Scales ``0, 1, 2, ...`` with the given dimensions."""
        return cls(tuple(range(len(dims))), tuple(dims))

    @property
    def depth(self) -> int:
        return len(self.scales) - 1

    @property
    def rank(self) -> int:
        return self.dims[-1]

    def level(self, g: BitVector) -> int:
        """Least ``n`` with ``g`` in ``G_{a_n}``."""
        if g.top > self.rank:
            raise ValueError(f"coordinate {g.top} lies beyond the truncation (rank {self.rank})")
        return bisect_left(self.dims, g.top)

    def norm(self, g: BitVector) -> int:
        return self.scales[self.level(g)]

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.scales, self.dims))


def filtration_metric(F: Filtration, g: BitVector, h: BitVector) -> int:
    return F.norm(g ^ h)


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    forward: tuple[tuple[int, int], ...]  # (n, m): G1_n inside G2_m
    backward: tuple[tuple[int, int], ...]
    # (direction, level, scale) of the first subgroup with no container
    failure: tuple[str, int, int] | None = None


def _cover(src: Filtration, dst: Filtration, depth: int):
    out = []
    for n in range(1, min(depth, src.depth) + 1):
        m = bisect_left(dst.dims, src.dims[n])
        if m > dst.depth:
            return tuple(out), n
        out.append((n, m))
    return tuple(out), None


def filtrations_equivalent(F1: Filtration, F2: Filtration, depth: int) -> EquivalenceVerdict:
    """Whether each of the first ``depth`` subgroups of one filtration sits in some
    subgroup of the other (searched over the other's full truncation), both ways.
    """
    fwd, bad = _cover(F1, F2, depth)
    if bad is not None:
        return EquivalenceVerdict(False, fwd, (), ("forward", bad, F1.scales[bad]))
    bwd, bad = _cover(F2, F1, depth)
    if bad is not None:
        return EquivalenceVerdict(False, fwd, bwd, ("backward", bad, F2.scales[bad]))
    return EquivalenceVerdict(True, fwd, bwd)


# ---- capacities and embeddings ----------------------------------------------

def _require_integral_ultrametric(M: FiniteMetricSpace) -> int:
    if not M.is_integral:
        raise ValueError("expected an integral ultrametric")
    require_ultrametric(M)
    return int(M.diameter())


@dataclass(frozen=True)
class CapacityProfile:
    c: tuple[int, ...]  # c[n] = max |B(x, n + 2)|, closed balls

    def __call__(self, n: int) -> int:
        return self.c[min(n, len(self.c) - 1)]


def capacity_profile(M: FiniteMetricSpace) -> CapacityProfile:
    diam = _require_integral_ultrametric(M)
    num, _ = M.scaled
    return CapacityProfile(tuple(int((num <= n + 2).sum(axis=1).max()) for n in range(diam + 1)))


def _class_labels(M: FiniteMetricSpace, n: int) -> dict[str, str]:
    """Each point -> least id of its ``(d <= n)``-class."""
    return {x: b[0] for b in components_below(M, n + 1) for x in b}


def level_counts(M: FiniteMetricSpace) -> list[int]:
    """``counts[n]`` = most ``(d <= n-1)``-classes inside one ``(d <= n)``-class."""
    diam = int(M.diameter())
    counts = [1]
    prev = _class_labels(M, 0)
    for n in range(1, diam + 1):
        cur = _class_labels(M, n)
        subs: dict[str, set[str]] = {}
        for x in M.points:
            subs.setdefault(cur[x], set()).add(prev[x])
        counts.append(max(len(s) for s in subs.values()))
        prev = cur
    return counts


def _bits_for(count: int) -> int:
    return (count - 1).bit_length()


def auto_filtration(counts: Sequence[int], extra: Iterable[int] = ()) -> Filtration:
    """Smallest dims with ``2^(dim_n - dim_{n-1}) >= counts[n]``; levels in ``extra``
    get at least one coordinate."""
    extra = set(extra)
    depth = max([len(counts) - 1, *extra]) if extra else len(counts) - 1
    dims = [0]
    for n in range(1, depth + 1):
        need = _bits_for(counts[n]) if n < len(counts) else 0
        if n in extra:
            need = max(need, 1)
        dims.append(dims[-1] + need)
    return Filtration.from_dims(dims)


def _check_capacity(F: Filtration, counts: Sequence[int]) -> None:
    for n in range(1, len(counts)):
        if n > F.depth or F.scales[n] != n:
            raise CapacityError(f"filtration must have scale {n} at level {n}")
        room = 1 << (F.dims[n] - F.dims[n - 1])
        if room < counts[n]:
            raise CapacityError(f"level {n} offers {room} cosets, {counts[n]} classes need distinct tags")


@dataclass(frozen=True)
class GroupEmbedding:
    mapping: dict[str, BitVector]
    filtration: Filtration
    counts: tuple[int, ...]


def embed_into_group(M: FiniteMetricSpace, F: Filtration | None = None) -> GroupEmbedding:
    """Isometric embedding of a finite integral ultrametric into the Z/2 group.

    At each threshold ``n`` the ``(d <= n-1)``-subclasses of a ``(d <= n)``-class
    get distinct tags in the coordinate block ``(dim_{n-1}, dim_n]``, the first
    (least id) the identity.  A point's image is the sum of its tags, so two
    points at distance ``n`` differ last in block ``n``.
    """
    diam = _require_integral_ultrametric(M)
    counts = level_counts(M)
    if F is None:
        F = auto_filtration(counts)
    else:
        _check_capacity(F, counts)
    image = {x: 0 for x in M.points}
    prev = _class_labels(M, 0)
    for n in range(1, diam + 1):
        cur = _class_labels(M, n)
        subs: dict[str, list[str]] = {}
        for x in M.points:
            lst = subs.setdefault(cur[x], [])
            if prev[x] not in lst:
                lst.append(prev[x])
        shift = F.dims[n - 1]
        for c, lst in subs.items():
            tag = {s: j << shift for j, s in enumerate(sorted(lst))}
            for x in M.points:
                if cur[x] == c:
                    image[x] ^= tag[prev[x]]
        prev = cur
    mapping = {x: BitVector(b) for x, b in image.items()}
    for i, x in enumerate(M.points):
        for y in M.points[i + 1:]:
            if filtration_metric(F, mapping[x], mapping[y]) != M.d(x, y):
                raise AssertionError(f"group embedding distorts ({x}, {y})")
    return GroupEmbedding(mapping, F, tuple(counts))


class FiltrationTooShallowError(CapacityError):
    pass


@dataclass(frozen=True)
class BlockTranslation:
    mapping: dict[str, BitVector]
    filtration: Filtration
    norms: tuple[int, ...]  # s_n, one per block
    translations: tuple[BitVector, ...]  # g_n
    within_block_exact: bool
    annulus_ok: bool
    expansion: tuple
    compression: tuple


def block_translate_embed(U: CoarseUnion, F: Filtration | None = None) -> BlockTranslation:
    """Embed the blocks of a radial decomposition and push block ``n`` out by ``g_n``.

    ``g_n`` is one coordinate whose norm ``s_n`` exceeds the previous block's
    radius plus this block's diameter (and ``s_1 > r_1``); block ``n`` then lands
    in the annulus ``s_{n-1} < |g| <= s_n``.
    """
    blocks = list(U.parts)
    radii = [int(v) for v in U.base_values]
    diams = [int(b.diameter()) for b in blocks]
    counts_per_block = [level_counts(b) for b in blocks]
    counts = [max((c[n] for c in counts_per_block if n < len(c)), default=1)
              for n in range(max(len(c) for c in counts_per_block))]
    lower = []
    for n in range(len(blocks)):
        floor = radii[0] if n == 0 else radii[n - 1] + diams[n]
        lower.append(max(floor, diams[n]) + 1)
    if F is None:
        norms, s = [], 0
        for lo in lower:
            s = max(lo, s + 1)
            norms.append(s)
        F = auto_filtration(counts, norms)
    else:
        _check_capacity(F, counts)
        norms, s = [], 0
        for lo in lower:
            s = max(lo, s + 1)
            while s <= F.depth and (F.scales[s] != s or F.dims[s] == F.dims[s - 1]):
                s += 1
            if s > F.depth:
                raise FiltrationTooShallowError(f"no single-coordinate element of norm >= {lo}")
            norms.append(s)
    translations = tuple(BitVector(1 << F.dims[s - 1]) for s in norms)
    mapping: dict[str, BitVector] = {}
    exact = True
    for n, block in enumerate(blocks):
        emb = embed_into_group(block, F)
        local = {x: translations[n] ^ g for x, g in emb.mapping.items()}
        pts = block.points
        for i, x in enumerate(pts):
            for y in pts[i + 1:]:
                exact &= filtration_metric(F, local[x], local[y]) == block.d(x, y)
        for x, g in local.items():
            mapping[U.total_id(n, x)] = g
    annulus = True
    for n, block in enumerate(blocks):
        lo = norms[n - 1] if n else 0
        for x in block.points:
            annulus &= lo < F.norm(mapping[U.total_id(n, x)]) <= norms[n]
    ids = list(U.total.points)
    img = np.array([[filtration_metric(F, mapping[x], mapping[y]) for y in ids] for x in ids], dtype=np.int64)
    num, den = U.total.scaled
    exp, comp = control_tables(num, den, img, 1)
    return BlockTranslation(mapping, F, tuple(norms), translations, exact, annulus, exp, comp)


def group_metric_space(F: Filtration, elements: Mapping[str, BitVector]) -> FiniteMetricSpace:
    """Finite sample of the group as a metric space."""
    ids = list(elements)
    return FiniteMetricSpace.from_scaled(
        ids, np.array([[filtration_metric(F, elements[a], elements[b]) for b in ids] for a in ids],
                      dtype=np.int64).reshape(len(ids), len(ids)), 1)
