"""Finite metric spaces with exact rational distances.

A :class:`FiniteMetricSpace` keeps its distances as an integer matrix plus a
common denominator, so every axiom check reduces to integer comparisons and
can run through the compiled kernels without losing exactness.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels

Dist = Fraction

# sums of two entries must stay inside int64
_INT64_HEADROOM = 2**61

_RATIONAL_TOKEN = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


class MalformedSpaceError(ValueError):
    """Distance data that cannot describe a finite metric space at all."""


class NotIntegralError(ValueError):
    pass


class NotUltrametricError(ValueError):
    pass


def as_dist(value) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to an exact distance.

    Floats are refused: ``1.5`` must be written ``"3/2"``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not distances")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        m = _RATIONAL_TOKEN.match(value)
        if m is None:
            raise MalformedSpaceError(f"malformed rational token {value!r}")
        num, den = m.group(1), m.group(2)
        if den is not None and int(den) == 0:
            raise MalformedSpaceError(f"zero denominator in {value!r}")
        return Fraction(int(num), int(den) if den is not None else 1)
    raise TypeError(f"cannot use {type(value).__name__} {value!r} as an exact distance")


def format_dist(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _to_matrix(rows) -> np.ndarray:
    big = max((abs(int(v)) for row in rows for v in row), default=0)
    if big < _INT64_HEADROOM:
        return np.array(rows, dtype=np.int64).reshape(len(rows), len(rows))
    out = np.empty((len(rows), len(rows)), dtype=object)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = int(v)
    return out


class FiniteMetricSpace:
    """Labelled points with an exact symmetric distance matrix.

    Construction only rejects data that is not a distance matrix at all
    (non-square, negative, non-zero diagonal, floats).  Symmetry, positivity
    and the triangle inequality are left to :func:`validate_metric` so that
    broken inputs can be reported rather than refused.
    """

    __slots__ = ("points", "_index", "_num", "_den")

    def __init__(self, points: Sequence, dist: Sequence[Sequence]):
        pts = tuple(str(p) for p in points)
        rows = [[as_dist(v) for v in row] for row in dist]
        n = len(pts)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise MalformedSpaceError(f"distance matrix is not {n}x{n}")
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                if v < 0:
                    raise MalformedSpaceError(f"negative distance {v} at ({pts[i]}, {pts[j]})")
            if row[i] != 0:
                raise MalformedSpaceError(f"non-zero diagonal entry at {pts[i]}")
        den = _lcm(v.denominator for row in rows for v in row)
        num = [[v.numerator * (den // v.denominator) for v in row] for row in rows]
        self._init(pts, _to_matrix(num) if n else np.zeros((0, 0), dtype=np.int64), den)

    def _init(self, pts, num, den):
        if len(set(pts)) != len(pts):
            raise MalformedSpaceError("duplicate point ids")
        num.setflags(write=False)
        self.points = pts
        self._index = {p: i for i, p in enumerate(pts)}
        self._num = num
        self._den = den

    @classmethod
    def from_scaled(cls, points: Sequence[str], num, den: int = 1) -> "FiniteMetricSpace":
        """Build from an integer matrix ``num`` with ``d = num / den``.

        Trusted constructor for internally produced matrices; the fraction is
        reduced so equal spaces always share one representation.
        """
        arr = np.asarray(num)
        g = den
        for v in np.unique(arr).tolist() if arr.size else ():
            g = math.gcd(g, int(v))
            if g == 1:
                break
        if g > 1:
            arr = arr // g
            den //= g
        if arr.dtype != object:
            arr = arr.astype(np.int64, copy=True)
        else:
            arr = _to_matrix(arr.tolist())
        self = cls.__new__(cls)
        self._init(tuple(points), arr, den)
        return self

    @classmethod
    def single(cls, point: str = "x") -> "FiniteMetricSpace":
        return cls([point], [[0]])

    @classmethod
    def from_function(cls, points: Sequence[str], fn) -> "FiniteMetricSpace":
        pts = list(points)
        return cls(pts, [[0 if p == q else fn(p, q) for q in pts] for p in pts])

    # ---- access -----------------------------------------------------------
    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[str]:
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return p in self._index

    def index(self, p: str) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise KeyError(f"unknown point id {p!r}") from None

    @property
    def scaled(self) -> tuple[np.ndarray, int]:
        """``(num, den)`` with ``d(points[i], points[j]) = num[i, j] / den``."""
        return self._num, self._den

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def is_integral(self) -> bool:
        return self._den == 1

    def d(self, x: str, y: str) -> Fraction:
        return Fraction(int(self._num[self.index(x), self.index(y)]), self._den)

    def matrix(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self._den) for v in row] for row in self._num.tolist()]

    def diameter(self) -> Fraction:
        if len(self) == 0:
            return Fraction(0)
        return Fraction(int(self._num.max()), self._den)

    def distances(self) -> list[Fraction]:
        """Sorted distinct distance values, including 0 for non-empty spaces."""
        if len(self) == 0:
            return []
        return [Fraction(int(v), self._den) for v in np.unique(self._num).tolist()]

    def sorted_points(self) -> list[str]:
        return sorted(self.points)

    # ---- derived spaces ---------------------------------------------------
    def subspace(self, ids: Iterable[str]) -> "FiniteMetricSpace":
        ids = list(ids)
        ix = [self.index(p) for p in ids]
        return FiniteMetricSpace.from_scaled(ids, self._num[np.ix_(ix, ix)], self._den)

    def relabel(self, mapping) -> "FiniteMetricSpace":
        """Rename points through a dict or callable; distances unchanged."""
        f = mapping.__getitem__ if isinstance(mapping, Mapping) else mapping
        return FiniteMetricSpace.from_scaled([str(f(p)) for p in self.points], self._num, self._den)

    def reorder(self, ids: Sequence[str]) -> "FiniteMetricSpace":
        if sorted(ids) != sorted(self.points):
            raise ValueError("reorder needs a permutation of the point ids")
        return self.subspace(ids)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        if set(self.points) != set(other.points) or self._den != other._den:
            return False
        ix = [other.index(p) for p in self.points]
        return bool(np.array_equal(self._num, other._num[np.ix_(ix, ix)]))

    __hash__ = None

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({len(self)} points, diam={format_dist(self.diameter())})"


def common_scale(*spaces: FiniteMetricSpace) -> tuple[list[np.ndarray], int]:
    """Rescale several spaces to one denominator; returns (matrices, den)."""
    den = _lcm(s.denominator for s in spaces)
    mats = []
    for s in spaces:
        num, d = s.scaled
        factor = den // d
        mats.append(num * factor if factor != 1 else num)
    return mats, den


def scaled_threshold(r: Fraction, den: int) -> int:
    """Integer T with ``num < T`` iff ``num / den < r`` for integer ``num``."""
    x = Fraction(r) * den
    return -((-x.numerator) // x.denominator)


# ---- validation -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    points: tuple[str, ...]
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.kind}: " + ", ".join(self.points)
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    check: str
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def to_text(self) -> str:
        lines = [f"check: {self.check}", f"violations: {len(self.violations)}"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines) + "\n"


def _pair_violations(M: FiniteMetricSpace) -> list[Violation]:
    num, den = M.scaled
    pts = M.points
    out = []
    asym = np.argwhere(np.triu(num != num.T, 1))
    for i, j in asym.tolist():
        out.append(Violation("symmetry", (pts[i], pts[j]),
                             f"{format_dist(Fraction(int(num[i, j]), den))} != "
                             f"{format_dist(Fraction(int(num[j, i]), den))}"))
    zero = np.argwhere(np.triu(num == 0, 1))
    for i, j in zero.tolist():
        out.append(Violation("positivity", (pts[i], pts[j]), "distinct points at distance 0"))
    return out


def _triples(M, rows, kind, describe):
    pts = M.points
    return [Violation(kind, (pts[x], pts[y], pts[z]), describe(x, y, z)) for x, y, z in rows.tolist()]


def validate_metric(M: FiniteMetricSpace) -> ValidationReport:
    """Report every asymmetric pair, zero off-diagonal pair and triangle failure.

    A triangle violation ``(x, y, z)`` means ``d(x, z) > d(x, y) + d(y, z)``.
    """
    num, den = M.scaled
    f = lambda i, j: format_dist(Fraction(int(num[i, j]), den))  # noqa: E731
    out = _pair_violations(M)
    out += _triples(M, _kernels.triangle_violations(num), "triangle",
                    lambda x, y, z: f"{f(x, z)} > {f(x, y)} + {f(y, z)}")
    return ValidationReport("metric", tuple(out))


def validate_ultrametric(M: FiniteMetricSpace) -> ValidationReport:
    """Violations ``(x, y, z)`` with ``d(x, z) > max(d(x, y), d(y, z))``."""
    num, den = M.scaled
    f = lambda i, j: format_dist(Fraction(int(num[i, j]), den))  # noqa: E731
    out = _pair_violations(M)
    out += _triples(M, _kernels.ultrametric_violations(num), "ultrametric",
                    lambda x, y, z: f"{f(x, z)} > max({f(x, y)}, {f(y, z)})")
    return ValidationReport("ultrametric", tuple(out))


def validate_isosceles(M: FiniteMetricSpace) -> ValidationReport:
    num, den = M.scaled
    f = lambda i, j: format_dist(Fraction(int(num[i, j]), den))  # noqa: E731
    out = _pair_violations(M)
    out += _triples(M, _kernels.isosceles_violations(num), "isosceles",
                    lambda x, y, z: f"sides {f(x, y)}, {f(x, z)}, {f(y, z)} all distinct")
    return ValidationReport("isosceles", tuple(out))


def is_ultrametric(M: FiniteMetricSpace) -> bool:
    return validate_ultrametric(M).ok


def require_ultrametric(M: FiniteMetricSpace) -> None:
    report = validate_ultrametric(M)
    if not report.ok:
        raise NotUltrametricError(f"space is not ultrametric: {report.violations[0]}")


# ---- value sets -----------------------------------------------------------

@dataclass(frozen=True)
class DSet:
    """Finite set of non-negative integers containing 0, kept sorted."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals or vals[0] != 0 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"DSet must be strictly increasing and start at 0, got {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, values: Iterable[int]) -> "DSet":
        vals = {int(v) for v in values}
        if any(v < 0 for v in vals):
            raise ValueError("DSet values must be non-negative")
        return cls(tuple(sorted(vals | {0})))

    @classmethod
    def parse(cls, text: str) -> "DSet":
        """Comma-separated integers; 0 is implied."""
        parts = [p for p in (t.strip() for t in text.split(",")) if p]
        try:
            return cls.of(int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"bad D set {text!r}: {exc}") from None

    @property
    def top(self) -> int:
        return self.values[-1]

    @property
    def positive(self) -> tuple[int, ...]:
        return self.values[1:]

    def without_top(self) -> "DSet":
        return DSet(self.values[:-1]) if len(self.values) > 1 else self

    def __contains__(self, v) -> bool:
        return v in self.values

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def issubset(self, other: "DSet") -> bool:
        return set(self.values) <= set(other.values)

    def __str__(self) -> str:
        return ",".join(str(v) for v in self.values)


def value_set(M: FiniteMetricSpace) -> DSet:
    """``{0} ∪ {d(x, y)}``; raises :class:`NotIntegralError` naming a pair otherwise."""
    num, den = M.scaled
    if den != 1:
        bad = np.argwhere(num % den != 0)
        i, j = bad[0].tolist()
        raise NotIntegralError(
            f"non-integral distance {format_dist(M.d(M.points[i], M.points[j]))} "
            f"between {M.points[i]} and {M.points[j]}")
    if len(M) == 0:
        return DSet((0,))
    return DSet.of(np.unique(num).tolist())


# ---- scales -----------------------------------------------------------------

@dataclass(frozen=True)
class ScalePartition:
    scale: Fraction
    blocks: tuple[tuple[str, ...], ...]

    def block_of(self, p: str) -> tuple[str, ...]:
        for b in self.blocks:
            if p in b:
                return b
        raise KeyError(p)


def _blocks_from_labels(pts: Sequence[str], labels) -> tuple[tuple[str, ...], ...]:
    groups: dict[int, list[str]] = {}
    for p, lab in zip(pts, labels.tolist()):
        groups.setdefault(lab, []).append(p)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


def components_below(M: FiniteMetricSpace, r: Fraction) -> tuple[tuple[str, ...], ...]:
    """Blocks of the transitive closure of ``d < r`` (no positivity check on r)."""
    num, den = M.scaled
    if len(M) == 0:
        return ()
    labels = _kernels.components_below(num, scaled_threshold(r, den))
    return _blocks_from_labels(M.points, labels)


def r_components(M: FiniteMetricSpace, r) -> ScalePartition:
    """Partition into r-components: maximal sets joined by chains with steps ``< r``."""
    r = as_dist(r)
    if r <= 0:
        raise ValueError(f"scale must be positive, got {r}")
    return ScalePartition(r, components_below(M, r))


# ---- chain ultrametric ------------------------------------------------------

def minimax(M: FiniteMetricSpace) -> np.ndarray:
    """Scaled bottleneck distances (same denominator as ``M``)."""
    num, _ = M.scaled
    return _kernels.minimax_matrix(num)


def chain_ultrametric(Y: FiniteMetricSpace, mapping: Mapping[str, str] | None = None,
                      *, strict: bool = False) -> FiniteMetricSpace:
    """Integral ultrametric induced on a set by a map into ``Y``.

    ``mapping`` sends each point of the domain (its keys, in order) to a point
    of ``Y``; ``None`` means the identity on ``Y``.  For distinct ``x, y`` the
    distance is the least integer ``r >= 1`` admitting a chain from ``f(x)``
    to ``f(y)`` with every step ``< r``, i.e. ``floor(bottleneck) + 1``.
    Distinct points with the same image get distance 1; ``strict=True``
    refuses non-injective maps instead.
    """
    if mapping is None:
        domain = list(Y.points)
        image = list(range(len(Y)))
    else:
        domain = [str(x) for x in mapping]
        image = [Y.index(mapping[x]) for x in mapping]
        if strict and len(set(image)) != len(image):
            seen: dict[int, str] = {}
            for x, i in zip(domain, image):
                if i in seen:
                    raise ValueError(f"{seen[i]} and {x} both map to {Y.points[i]}")
                seen[i] = x
    if not domain:
        return FiniteMetricSpace([], [])
    _, den = Y.scaled
    mm = minimax(Y)
    ix = np.asarray(image, dtype=np.int64)
    r = mm[np.ix_(ix, ix)] // den + 1
    if r.dtype != object:
        np.fill_diagonal(r, 0)
    else:
        for i in range(len(domain)):
            r[i, i] = 0
    return FiniteMetricSpace.from_scaled(domain, r, 1)


def separated_net(M: FiniteMetricSpace, r=1) -> tuple[str, ...]:
    """Greedy maximal subset with pairwise distances ``> r`` (id order)."""
    r = as_dist(r)
    num, den = M.scaled
    kept: list[int] = []
    # d > r  <=>  num * r.den > r.num * den
    for p in M.sorted_points():
        i = M.index(p)
        if all(int(num[i, j]) * r.denominator > r.numerator * den for j in kept):
            kept.append(i)
    return tuple(M.points[i] for i in kept)


@dataclass(frozen=True)
class Discretization:
    net: tuple[str, ...]
    space: FiniteMetricSpace
    inclusion: Mapping[str, str]


def discretize(M: FiniteMetricSpace) -> Discretization:
    """1-separated net carrying the chain ultrametric of the whole space.

    Chains run through every point of ``M``, not only through the net.
    """
    net = separated_net(M, 1)
    full = chain_ultrametric(M)
    return Discretization(net, full.subspace(net), {p: p for p in net})
