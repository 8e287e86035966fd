"""Pure-numpy kernels.

Every function takes a square integer matrix of scaled distances (int64, or
object dtype holding Python ints when values are too large for int64) and is
exact.  These are also the reference path the numba kernels are tested
against.
"""
import numpy as np


def triangle_violations(a):
    n = a.shape[0]
    out = []
    idx = np.arange(n)
    for x in range(n):
        # s[y, z] = a[x, y] + a[y, z]
        s = a[x][:, None] + a
        bad = a[x][None, :] > s
        bad &= idx[None, :] > x
        bad[x, :] = False
        bad[idx, idx] = False
        ys, zs = np.nonzero(bad)
        for y, z in zip(ys.tolist(), zs.tolist()):
            out.append((x, y, z))
    return _as_triples(out)


def ultrametric_violations(a):
    n = a.shape[0]
    out = []
    idx = np.arange(n)
    for x in range(n):
        s = np.maximum(a[x][:, None], a)
        bad = a[x][None, :] > s
        bad &= idx[None, :] > x
        bad[x, :] = False
        bad[idx, idx] = False
        ys, zs = np.nonzero(bad)
        for y, z in zip(ys.tolist(), zs.tolist()):
            out.append((x, y, z))
    return _as_triples(out)


def isosceles_violations(a):
    n = a.shape[0]
    out = []
    idx = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            ab = a[i, j]
            ac = a[i, j + 1:]
            bc = a[j, j + 1:]
            bad = (ab != ac) & (ab != bc) & (ac != bc)
            for k in idx[j + 1:][bad].tolist():
                out.append((i, j, k))
    return _as_triples(out)


def components_below(a, threshold):
    """Label points by the components of the graph ``a[i, j] < threshold``.

    The label of each point is the smallest index in its component.
    """
    n = a.shape[0]
    adj = a < threshold
    labels = np.arange(n)
    big = n
    while True:
        cand = np.where(adj, labels[None, :], big).min(axis=1)
        new = np.minimum(labels, cand)
        # pointer jumping keeps the iteration count logarithmic in practice
        new = new[new]
        if np.array_equal(new, labels):
            return labels.astype(np.int64)
        labels = new


def minimax_matrix(a):
    """All-pairs bottleneck distance: min over paths of the max edge.

    Prim's algorithm gives a minimum spanning tree; the tree edges are then
    replayed in increasing order, and each merge fills the bottleneck value
    for every pair it joins.
    """
    n = a.shape[0]
    out = np.zeros_like(a)
    if n < 2:
        return out
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = a[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        masked = np.where(in_tree, _max_sentinel(a), best)
        v = int(np.argmin(masked))
        edges.append((best[v], int(parent[v]), v))
        in_tree[v] = True
        closer = (a[v] < best) & ~in_tree
        best = np.where(closer, a[v], best)
        parent = np.where(closer, v, parent)
    edges.sort(key=lambda e: (e[0], e[1], e[2]))
    members = {i: [i] for i in range(n)}
    root = list(range(n))
    for w, u, v in edges:
        ru, rv = root[u], root[v]
        mu, mv = members[ru], members[rv]
        out[np.ix_(mu, mv)] = w
        out[np.ix_(mv, mu)] = w
        if len(mu) < len(mv):
            ru, rv, mu, mv = rv, ru, mv, mu
        mu.extend(mv)
        for p in mv:
            root[p] = ru
        del members[rv]
    return out


def _max_sentinel(a):
    if a.dtype == object:
        return max(int(v) for v in a.flat) + 1 if a.size else 1
    return np.iinfo(a.dtype).max


def _as_triples(rows):
    if not rows:
        return np.zeros((0, 3), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)
