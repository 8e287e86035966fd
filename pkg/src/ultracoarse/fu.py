"""Finite universal ultrametric spaces FU(m, D).

``build_fu`` uses the recursion ``FU(m, D) = FU(m, D - {k}) ⊔_k FU(m - 1, D)``
(``k = max D``), which contains every D-ultrametric space with at most ``m``
points.  ``build_fu_literal`` keeps ``FU(m - 1, D - {k})`` as the first part;
that space is too small (two points at distance 1 do not fit in
``FU(2, {0, 1, 2})``) and is shipped only so the gap stays testable.

Points are named ``"x" + path`` where the path records the branch taken at
each split (``0`` = first part, ``1`` = second part).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterator, Mapping

import numpy as np

from .metric import DSet, FiniteMetricSpace, common_scale, value_set
from .resolution import Resolution

FU_MATERIALIZE_LIMIT = 20_000


def _step(m: int, D: DSet, bit: str, literal: bool) -> tuple[int, DSet]:
    if bit == "0":
        return (m - 1 if literal else m), D.without_top()
    return m - 1, D


def _is_point(m: int, D: DSet) -> bool:
    return m <= 1 or D.top == 0


@lru_cache(maxsize=None)
def fu_size(m: int, D: DSet, literal: bool = False) -> int:
    if _is_point(m, D):
        return 1
    a, Da = _step(m, D, "0", literal)
    b, Db = _step(m, D, "1", literal)
    return fu_size(a, Da, literal) + fu_size(b, Db, literal)


def fu_size_formula(m: int, D: DSet) -> int:
    """``C(m - 1 + d, d)`` with ``d = |D| - 1``; equals ``fu_size`` for the corrected build."""
    d = len(D) - 1
    return comb(m - 1 + d, d)


@lru_cache(maxsize=256)
def _fu_block(m: int, D: DSet, literal: bool) -> tuple[tuple[str, ...], np.ndarray]:
    if _is_point(m, D):
        return ("",), np.zeros((1, 1), dtype=np.int64)
    k = D.top
    pa, A = _fu_block(*_step(m, D, "0", literal), literal)
    pb, B = _fu_block(*_step(m, D, "1", literal), literal)
    na, nb = len(pa), len(pb)
    out = np.full((na + nb, na + nb), k, dtype=np.int64)
    out[:na, :na] = A
    out[na:, na:] = B
    out.setflags(write=False)
    return tuple("0" + p for p in pa) + tuple("1" + p for p in pb), out


@dataclass(frozen=True)
class FUSpace:
    m: int
    D: DSet
    literal: bool
    space: FiniteMetricSpace
    labels: Mapping[str, str]  # point id -> branch path


def fu_point_id(path: str) -> str:
    return "x" + path


def _build(m: int, D, literal: bool) -> FUSpace:
    if m < 1:
        raise ValueError("m must be at least 1")
    D = D if isinstance(D, DSet) else DSet.of(D)
    size = fu_size(m, D, literal)
    if size > FU_MATERIALIZE_LIMIT:
        raise ValueError(f"FU({m}, {{{D}}}) has {size} points, above the limit {FU_MATERIALIZE_LIMIT}")
    paths, num = _fu_block(m, D, literal)
    ids = [fu_point_id(p) for p in paths]
    return FUSpace(m, D, literal, FiniteMetricSpace.from_scaled(ids, num, 1), dict(zip(ids, paths)))


def build_fu(m: int, D) -> FUSpace:
    return _build(m, D, False)


def build_fu_literal(m: int, D) -> FUSpace:
    return _build(m, D, True)


def fu_path_distance(m: int, D: DSet, p: str, q: str, *, literal: bool = False) -> int:
    """Distance in FU(m, D) between the points with branch paths ``p`` and ``q``."""
    for a, b in zip(p, q):
        if a != b:
            return D.top
        m, D = _step(m, D, a, literal)
    if len(p) != len(q):
        raise ValueError(f"paths {p!r} and {q!r} are not both points of FU")
    return 0


def fu_resolution(fu: FUSpace) -> Resolution:
    """The split of FU(m, D) onto ``{0, k}`` into its two recursive parts."""
    if _is_point(fu.m, fu.D):
        raise ValueError("a one-point FU has no split")
    k = fu.D.top
    base = FiniteMetricSpace(["0", str(k)], [[0, k], [k, 0]])
    projection = {x: ("0" if fu.labels[x][0] == "0" else str(k)) for x in fu.space.points}
    return Resolution(fu.space, base, projection)


# ---- splitting and embedding ----------------------------------------------

def top_split_two(M: FiniteMetricSpace, D: DSet | None = None) -> Resolution:
    """Resolve a D-ultrametric space of diameter ``max D`` onto ``{0, k}``.

    With ``a, b`` the lexicographically first pair at distance ``k``, the
    fibre over 0 is ``{x : d(x, a) < k}`` and the fibre over ``k`` the rest.
    """
    D = D if D is not None else value_set(M)
    k = D.top
    if k <= 0 or M.diameter() != k:
        raise ValueError(f"diameter {M.diameter()} must equal max(D) = {k} > 0")
    pts = M.sorted_points()
    a = next(x for x in pts if any(M.d(x, y) == k for y in pts if y > x))
    base = FiniteMetricSpace(["0", str(k)], [[0, k], [k, 0]])
    projection = {x: ("0" if M.d(x, a) < k else str(k)) for x in M.points}
    return Resolution(M, base, projection)


class EmbeddingError(ValueError):
    pass


def embed_into_fu(X: FiniteMetricSpace, m: int, D) -> dict[str, str]:
    """Isometric embedding of a D-ultrametric space with ``<= m`` points into FU(m, D).

    Returns point id -> FU point id.  The result is checked pair by pair
    against the FU distance before it is returned.
    """
    D = D if isinstance(D, DSet) else DSet.of(D)
    if len(X) > m:
        raise EmbeddingError(f"{len(X)} points do not fit in FU({m}, ...)")
    if len(X) == 0:
        return {}
    vals = value_set(X)
    if not vals.issubset(D):
        raise EmbeddingError(f"distances {vals} are not contained in D = {D}")
    num, _ = X.scaled
    out: dict[str, str] = {}

    def place(idx: list[int], m: int, D: DSet, prefix: str) -> None:
        if _is_point(m, D):
            if len(idx) != 1:
                raise AssertionError("recursion reached a point with several inputs")
            out[X.points[idx[0]]] = prefix
            return
        k = D.top
        sub = num[np.ix_(idx, idx)]
        if sub.max() < k:
            place(idx, *_step(m, D, "0", False), prefix + "0")
            return
        order = sorted(range(len(idx)), key=lambda i: X.points[idx[i]])
        a = next(i for i in order if sub[i].max() == k)
        near = [idx[i] for i in range(len(idx)) if sub[a, i] < k]
        far = [idx[i] for i in range(len(idx)) if sub[a, i] == k]
        place(near, *_step(m, D, "0", False), prefix + "0")
        place(far, *_step(m, D, "1", False), prefix + "1")

    place(list(range(len(X))), m, D, "")
    for x, y in itertools.combinations(X.points, 2):
        if fu_path_distance(m, D, out[x], out[y]) != X.d(x, y):
            raise AssertionError(f"embedding distorts ({x}, {y})")
    return {x: fu_point_id(p) for x, p in out.items()}


# ---- catalog of small ultrametric spaces -----------------------------------

CATALOG_LIMIT = 10_000

# canonical tree: (scale, children); a point is (0, ())
Tree = tuple


def canonical_form(M: FiniteMetricSpace) -> Tree:
    """Sorted scale-labelled tree; equal forms iff the spaces are isometric."""
    from .resolution import lego_decompose

    def conv(node):
        if isinstance(node, str):
            return (0, ())
        return (node.scale, tuple(sorted(conv(c) for c in node.children)))

    return conv(lego_decompose(M))


def _integer_partitions(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    max_part = n if max_part is None else max_part
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _integer_partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _trees(n: int, scales: tuple[int, ...]) -> tuple[Tree, ...]:
    if n == 1:
        return ((0, ()),)
    out = []
    for i, s in enumerate(scales):
        lower = scales[:i]
        for parts in _integer_partitions(n):
            if len(parts) < 2:
                continue
            per_size = []
            for size, count in sorted({p: parts.count(p) for p in parts}.items()):
                options = _trees(size, lower)
                per_size.append(list(itertools.combinations_with_replacement(options, count)))
            for choice in itertools.product(*per_size):
                kids = tuple(sorted(t for group in choice for t in group))
                out.append((s, kids))
    return tuple(sorted(set(out)))


def tree_space(tree: Tree, prefix: str = "p") -> FiniteMetricSpace:
    """Materialise a canonical tree as a space on ``p0, p1, ...``."""
    leaves: list[int] = []
    pairs: list[tuple[list[int], list[int], int]] = []

    def walk(node) -> list[int]:
        scale, kids = node
        if not kids:
            leaves.append(len(leaves))
            return [leaves[-1]]
        groups = [walk(c) for c in kids]
        for gi, g in enumerate(groups):
            for h in groups[gi + 1:]:
                pairs.append((g, h, scale))
        return [x for g in groups for x in g]

    walk(tree)
    n = len(leaves)
    num = np.zeros((n, n), dtype=np.int64)
    for g, h, s in pairs:
        num[np.ix_(g, h)] = s
        num[np.ix_(h, g)] = s
    width = len(str(max(n - 1, 0)))
    return FiniteMetricSpace.from_scaled([f"{prefix}{i:0{width}d}" for i in range(n)], num, 1)


@dataclass(frozen=True)
class UltraCatalog:
    m: int
    D: DSet
    forms: tuple[Tree, ...]
    spaces: tuple[FiniteMetricSpace, ...]


def enumerate_ultrametrics(m: int, D) -> UltraCatalog:
    """One space per isometry class of D-ultrametric spaces with 1..m points."""
    D = D if isinstance(D, DSet) else DSet.of(D)
    if m < 1:
        raise ValueError("m must be at least 1")
    bound = fu_size_formula(m, D)
    if bound > CATALOG_LIMIT:
        raise ValueError(f"catalog guard: C(m-1+d, d) = {bound} > {CATALOG_LIMIT}")
    forms = [t for n in range(1, m + 1) for t in _trees(n, D.positive)]
    return UltraCatalog(m, D, tuple(forms), tuple(tree_space(t) for t in forms))


# ---- independent backtracking oracle ----------------------------------------

ORACLE_LIMIT = 60


def oracle_embed_search(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> dict[str, str] | None:
    """Exhaustive search for an isometric embedding ``X -> Y``.

    Returns a mapping, or ``None`` once every distance-compatible assignment
    has been ruled out.
    """
    if len(Y) > ORACLE_LIMIT:
        raise ValueError(f"oracle limited to targets of {ORACLE_LIMIT} points")
    if len(X) > len(Y):
        return None
    (xa, ya), _ = common_scale(X, Y)
    n = len(X)
    img = [-1] * n
    used = np.zeros(len(Y), dtype=bool)

    def extend(i: int) -> bool:
        if i == n:
            return True
        ok = ~used
        if i:
            ok &= np.all(ya[:, img[:i]] == xa[i, :i][None, :], axis=1)
        for y in np.flatnonzero(ok).tolist():
            img[i] = y
            used[y] = True
            if extend(i + 1):
                return True
            used[y] = False
        img[i] = -1
        return False

    if not extend(0):
        return None
    return {X.points[i]: Y.points[img[i]] for i in range(n)}
