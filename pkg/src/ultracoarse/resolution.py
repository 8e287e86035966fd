"""Metric resolutions and the decomposition of ultrametric spaces into simplices."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .metric import (
    FiniteMetricSpace,
    ValidationReport,
    Violation,
    common_scale,
    components_below,
    format_dist,
    require_ultrametric,
    validate_ultrametric,
)


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Resolution:
    """A surjection ``projection: total -> base``.

    It is a metric resolution when points in different fibres are exactly
    as far apart as their images; :func:`verify_resolution` checks that.
    """

    total: FiniteMetricSpace
    base: FiniteMetricSpace
    projection: Mapping[str, str]

    def fiber_ids(self, t: str) -> tuple[str, ...]:
        return tuple(x for x in self.total.points if self.projection[x] == t)

    def fibers(self) -> dict[str, FiniteMetricSpace]:
        return {t: self.total.subspace(self.fiber_ids(t)) for t in self.base.points}


def _check_projection(R: Resolution) -> np.ndarray:
    missing = [x for x in R.total.points if x not in R.projection]
    if missing:
        raise ValueError(f"projection undefined on {missing[0]}")
    image = [R.base.index(R.projection[x]) for x in R.total.points]
    unhit = set(range(len(R.base))) - set(image)
    if unhit:
        raise ValueError(f"projection misses base point {R.base.points[min(unhit)]}")
    return np.asarray(image, dtype=np.int64)


def verify_resolution(R: Resolution) -> ValidationReport:
    """List every cross-fibre pair whose distance differs from the base distance."""
    p = _check_projection(R)
    (tot, base), den = common_scale(R.total, R.base)
    lifted = base[np.ix_(p, p)]
    bad = (p[:, None] != p[None, :]) & (tot != lifted)
    out = []
    pts = R.total.points
    for i, j in np.argwhere(np.triu(bad, 1)).tolist():
        out.append(Violation(
            "cross-fiber", (pts[i], pts[j]),
            f"{format_dist(Fraction(int(tot[i, j]), den))} != base "
            f"{format_dist(Fraction(int(lifted[i, j]), den))}"))
    return ValidationReport("resolution", tuple(out))


def disjoint_ids(groups: Sequence[tuple[str, Sequence[str]]]) -> list[list[str]]:
    """Point ids for a disjoint union of labelled groups.

    Ids are kept when they are already distinct across groups; otherwise
    every id is qualified as ``"<group>:<id>"``.
    """
    flat = [x for _, ids in groups for x in ids]
    if len(set(flat)) == len(flat):
        return [list(ids) for _, ids in groups]
    return [[f"{t}:{x}" for x in ids] for t, ids in groups]


def _separation(base: FiniteMetricSpace) -> list[Fraction | None]:
    """Distance from each base point to the rest of the base (None if alone)."""
    num, den = base.scaled
    out = []
    for i in range(len(base)):
        others = np.delete(num[i], i)
        out.append(Fraction(int(others.min()), den) if others.size else None)
    return out


def resolution_total(base: FiniteMetricSpace, fibers: Mapping[str, FiniteMetricSpace]):
    """Fibre metrics inside fibres and base distances across, with no checks.

    Returns ``(ids, num, den, projection)``; ``ids`` follow base order, then
    fibre order.
    """
    groups = [(t, fibers[t].points) for t in base.points]
    ids = disjoint_ids(groups)
    mats, den = common_scale(base, *(fibers[t] for t in base.points))
    bmat, fmats = mats[0], mats[1:]
    sizes = [len(fibers[t]) for t in base.points]
    owner = np.repeat(np.arange(len(base)), sizes)
    num = bmat[np.ix_(owner, owner)].copy()
    start = 0
    for fm, size in zip(fmats, sizes):
        num[start:start + size, start:start + size] = fm
        start += size
    projection = {x: t for (t, _), group in zip(groups, ids) for x in group}
    return [x for group in ids for x in group], num, den, projection


def assemble_total(base: FiniteMetricSpace, fibers: Mapping[str, FiniteMetricSpace],
                   mode: str = "general") -> Resolution:
    """Glue fibres over a base so the fibre map is a metric resolution.

    ``general`` requires ``diam(fibre over t) <= d(t, other)/2`` for every other
    base point; ``ultrametric`` requires ultrametric base and fibres and allows
    ``diam <= d(t, other)``.  The bound is enforced, never repaired.
    """
    if mode not in ("general", "ultrametric"):
        raise ValueError(f"unknown mode {mode!r}")
    if set(fibers) != set(base.points):
        raise ValueError("fibers must be given for exactly the base points")
    if any(len(f) == 0 for f in fibers.values()):
        raise ValueError("fibers must be non-empty")
    if mode == "ultrametric":
        require_ultrametric(base)
        for t in base.points:
            report = validate_ultrametric(fibers[t])
            if not report.ok:
                raise PreconditionError(f"fiber over {t} is not ultrametric: {report.violations[0]}")
    factor = Fraction(1, 2) if mode == "general" else Fraction(1)
    num, den = base.scaled
    for i, (t, sep) in enumerate(zip(base.points, _separation(base))):
        if sep is None:
            continue
        diam = fibers[t].diameter()
        if diam > factor * sep:
            row = np.delete(np.arange(len(base)), i)
            u = base.points[int(row[np.argmin(num[i, row])])]
            raise PreconditionError(
                f"diam(fiber over {t}) = {format_dist(diam)} exceeds "
                f"{format_dist(factor * sep)} (d({t}, {u}) = {format_dist(sep)}, {mode} mode)")
    ids, tnum, tden, projection = resolution_total(base, fibers)
    return Resolution(FiniteMetricSpace.from_scaled(ids, tnum, tden), base, projection)


def radial_resolution(M: FiniteMetricSpace, x0: str) -> Resolution:
    """Project each point to its distance from ``x0``; base carries ``max(u, t)``."""
    require_ultrametric(M)
    num, den = M.scaled
    row = num[M.index(x0)]
    radii = np.unique(row)
    names = [format_dist(Fraction(int(v), den)) for v in radii.tolist()]
    base_num = np.maximum(radii[:, None], radii[None, :])
    np.fill_diagonal(base_num, 0)
    base = FiniteMetricSpace.from_scaled(names, base_num, den)
    lookup = dict(zip(radii.tolist(), names))
    projection = {x: lookup[v] for x, v in zip(M.points, row.tolist())}
    return Resolution(M, base, projection)


def _class_resolution(M: FiniteMetricSpace, blocks, m: Fraction) -> Resolution:
    names = [b[0] for b in blocks]
    k = len(names)
    mnum = m * M.denominator
    base = FiniteMetricSpace.from_scaled(
        names, np.where(np.eye(k, dtype=bool), 0, int(mnum)), M.denominator)
    projection = {x: b[0] for b in blocks for x in b}
    return Resolution(M, base, projection)


def top_split(M: FiniteMetricSpace, *, check: bool = True) -> Resolution:
    """Resolve ``M`` onto ``diam(M)`` times a full simplex.

    Base points are the classes of ``d < diam``, each named by its least id.
    """
    if check:
        require_ultrametric(M)
    if len(M) < 2:
        raise ValueError("top_split needs at least two points")
    m = M.diameter()
    if m == 0:
        raise ValueError("two distinct points at distance 0: not a metric")
    return _class_resolution(M, components_below(M, m), m)


# ---- Lego trees -----------------------------------------------------------

@dataclass(frozen=True)
class LegoNode:
    """Internal node: its leaves are pairwise ``scale`` apart across children."""

    scale: Fraction
    children: tuple["LegoTree", ...]


LegoTree = Union[LegoNode, str]


def lego_decompose(M: FiniteMetricSpace) -> LegoTree:
    """Split recursively by :func:`top_split` down to single points."""
    require_ultrametric(M)
    if len(M) == 0:
        raise ValueError("empty space")

    def build(S: FiniteMetricSpace) -> LegoTree:
        if len(S) == 1:
            return S.points[0]
        R = top_split(S, check=False)
        kids = [build(S.subspace(sorted(R.fiber_ids(t)))) for t in R.base.points]
        kids.sort(key=first_leaf)
        return LegoNode(S.diameter(), tuple(kids))

    return build(M.subspace(M.sorted_points()))


def leaves(tree: LegoTree) -> list[str]:
    if isinstance(tree, str):
        return [tree]
    return [x for c in tree.children for x in leaves(c)]


def first_leaf(tree: LegoTree) -> str:
    while not isinstance(tree, str):
        tree = tree.children[0]
    return tree


def lca_metric(tree: LegoTree) -> FiniteMetricSpace:
    """Metric with ``d(x, y)`` = scale of the lowest common ancestor."""
    pts = leaves(tree)
    pos = {p: i for i, p in enumerate(pts)}
    n = len(pts)
    dist = [[Fraction(0)] * n for _ in range(n)]

    def fill(node: LegoTree) -> None:
        if isinstance(node, str):
            return
        groups = [leaves(c) for c in node.children]
        for gi, g in enumerate(groups):
            for h in groups[gi + 1:]:
                for a in g:
                    for b in h:
                        dist[pos[a]][pos[b]] = dist[pos[b]][pos[a]] = node.scale
        for c in node.children:
            fill(c)

    fill(tree)
    return FiniteMetricSpace(pts, dist)


def _newick_label(x: str) -> str:
    if any(ch in x for ch in " ()[]':;,") or not x:
        return "'" + x.replace("'", "''") + "'"
    return x


def to_newick(tree: LegoTree) -> str:
    def emit(node: LegoTree) -> str:
        if isinstance(node, str):
            return _newick_label(node)
        return "(" + ",".join(emit(c) for c in node.children) + ")" + format_dist(node.scale)

    return emit(tree) + ";"


def to_dot(tree: LegoTree) -> str:
    lines = ["digraph lego {"]
    counter = [0]

    def emit(node: LegoTree) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        if isinstance(node, str):
            label = node.replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  {name} [shape=box, label="{label}"];')
            return name
        lines.append(f'  {name} [shape=ellipse, label="{format_dist(node.scale)}"];')
        for c in node.children:
            lines.append(f"  {name} -> {emit(c)};")
        return name

    emit(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"


def subset_sup_metric(M: FiniteMetricSpace, subsets: Sequence) -> FiniteMetricSpace:
    """``rho(A, B) = max d(a, b)`` over non-empty subsets, indexed ``"0"``, ``"1"``, ..."""
    require_ultrametric(M)
    sets = [frozenset(s) for s in subsets]
    for i, s in enumerate(sets):
        if not s:
            raise ValueError(f"subset {i} is empty")
        for x in s:
            M.index(x)
    if len(set(sets)) != len(sets):
        raise ValueError("duplicate subsets would sit at distance 0")
    num, den = M.scaled
    idx = [np.array(sorted(M.index(x) for x in s), dtype=np.int64) for s in sets]
    k = len(sets)
    out = np.zeros((k, k), dtype=num.dtype)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = num[np.ix_(idx[i], idx[j])].max()
    return FiniteMetricSpace.from_scaled([str(i) for i in range(k)], out, den)
