"""Random space generators used by tests, benchmarks and the acceptance run.

All generators take a ``numpy.random.Generator`` so runs are reproducible.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .metric import FiniteMetricSpace


def _ids(n: int, prefix: str = "p") -> list[str]:
    width = len(str(max(n - 1, 0)))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def random_ultrametric(n: int, rng: np.random.Generator, scales: Sequence = (1, 2, 3, 4, 5, 6),
                       *, prefix: str = "p") -> FiniteMetricSpace:
    """Cophenetic metric of a random dendrogram whose heights come from ``scales``.

    Heights strictly decrease towards the leaves, so the value set is a subset
    of ``{0} ∪ scales``.
    """
    scales = sorted(Fraction(s) for s in scales)
    ids = _ids(n, prefix)
    level_of = np.full((n, n), -1, dtype=np.int64)

    def split(block: list[int], top: int) -> None:
        if len(block) < 2:
            return
        level = int(rng.integers(0, top + 1))
        if level == 0:
            groups = [[i] for i in block]
        else:
            k = int(rng.integers(2, len(block) + 1))
            order = rng.permutation(block).tolist()
            cuts = sorted(rng.choice(np.arange(1, len(block)), size=k - 1, replace=False).tolist())
            groups = [order[a:b] for a, b in zip([0] + cuts, cuts + [len(block)])]
        for gi, g in enumerate(groups):
            rest = [i for other in groups[gi + 1:] for i in other]
            if rest:
                level_of[np.ix_(g, rest)] = level
                level_of[np.ix_(rest, g)] = level
        for g in groups:
            split(g, level - 1)

    split(list(range(n)), len(scales) - 1)
    den = 1
    for s in scales:
        den = den * s.denominator // math.gcd(den, s.denominator)
    table = np.array([0] + [int(s * den) for s in scales], dtype=np.int64)
    return FiniteMetricSpace.from_scaled(ids, table[level_of + 1], int(den))


def random_rational_ultrametric(n: int, rng: np.random.Generator, levels: int = 5,
                                *, max_den: int = 4) -> FiniteMetricSpace:
    heights = set()
    while len(heights) < levels:
        heights.add(Fraction(int(rng.integers(1, 8 * max_den)), int(rng.integers(1, max_den + 1))))
    return random_ultrametric(n, rng, sorted(heights))


def random_tree_metric(n: int, rng: np.random.Generator, *, max_den: int = 4,
                       prefix: str = "p") -> FiniteMetricSpace:
    """Path-length metric between the leaves of a random binary dendrogram.

    Branch lengths are positive rationals; the result is a metric but in
    general neither ultrametric nor isosceles.
    """
    ids = _ids(n, prefix)
    # each cluster carries its members' depth below the cluster root
    clusters = [{i: Fraction(0)} for i in range(n)]
    dist = [[Fraction(0)] * n for _ in range(n)]
    while len(clusters) > 1:
        a, b = sorted(rng.choice(len(clusters), size=2, replace=False).tolist())
        ca, cb = clusters[a], clusters[b]
        la = Fraction(int(rng.integers(1, 6 * max_den)), int(rng.integers(1, max_den + 1)))
        lb = Fraction(int(rng.integers(1, 6 * max_den)), int(rng.integers(1, max_den + 1)))
        for x, dx in ca.items():
            for y, dy in cb.items():
                dist[x][y] = dist[y][x] = dx + la + dy + lb
        merged = {x: dx + la for x, dx in ca.items()}
        merged.update({y: dy + lb for y, dy in cb.items()})
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
    return FiniteMetricSpace(ids, dist)


def line_space(coords: Sequence, ids: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Points on the real line with ``d(x, y) = |x - y|``."""
    cs = [Fraction(c) for c in coords]
    if ids is None:
        ids = [str(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}" for c in cs]
    return FiniteMetricSpace(ids, [[abs(a - b) for b in cs] for a in cs])


def equilateral(n: int, k, prefix: str = "p") -> FiniteMetricSpace:
    ids = _ids(n, prefix)
    return FiniteMetricSpace(ids, [[0 if i == j else k for j in range(n)] for i in range(n)])
