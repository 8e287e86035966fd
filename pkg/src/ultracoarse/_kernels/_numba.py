"""numba-compiled kernels; same contracts as the numpy module.

Only int64 matrices are accepted here.  Triple scans run two passes (count,
then fill) so the output array is allocated once, in the same (x, y, z)
order the numpy scans produce.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _triangle_scan(a, out, fill):
    n = a.shape[0]
    c = 0
    for x in range(n):
        for y in range(n):
            if y == x:
                continue
            axy = a[x, y]
            for z in range(x + 1, n):
                if z == y:
                    continue
                if a[x, z] > axy + a[y, z]:
                    if fill:
                        out[c, 0] = x
                        out[c, 1] = y
                        out[c, 2] = z
                    c += 1
    return c


@njit(cache=True)
def _ultrametric_scan(a, out, fill):
    n = a.shape[0]
    c = 0
    for x in range(n):
        for y in range(n):
            if y == x:
                continue
            axy = a[x, y]
            for z in range(x + 1, n):
                if z == y:
                    continue
                m = axy
                if a[y, z] > m:
                    m = a[y, z]
                if a[x, z] > m:
                    if fill:
                        out[c, 0] = x
                        out[c, 1] = y
                        out[c, 2] = z
                    c += 1
    return c


@njit(cache=True)
def _isosceles_scan(a, out, fill):
    n = a.shape[0]
    c = 0
    for i in range(n):
        for j in range(i + 1, n):
            ab = a[i, j]
            for k in range(j + 1, n):
                ac = a[i, k]
                bc = a[j, k]
                if ab != ac and ab != bc and ac != bc:
                    if fill:
                        out[c, 0] = i
                        out[c, 1] = j
                        out[c, 2] = k
                    c += 1
    return c


def _collect(scan, a):
    empty = np.zeros((0, 3), dtype=np.int64)
    count = scan(a, empty, False)
    out = np.zeros((count, 3), dtype=np.int64)
    if count:
        scan(a, out, True)
    return out


def triangle_violations(a):
    return _collect(_triangle_scan, a)


def ultrametric_violations(a):
    return _collect(_ultrametric_scan, a)


def isosceles_violations(a):
    return _collect(_isosceles_scan, a)


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def components_below(a, threshold):
    n = a.shape[0]
    parent = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            if a[i, j] < threshold:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    # keep the smaller index as root so labels are canonical
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        labels[i] = _find(parent, i)
    return labels


@njit(cache=True)
def minimax_matrix(a):
    """Bottleneck distances via Prim's tree and one traversal per source."""
    n = a.shape[0]
    out = np.zeros_like(a)
    if n < 2:
        return out
    in_tree = np.zeros(n, dtype=np.bool_)
    best = a[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    in_tree[0] = True
    # adjacency of the spanning tree as (neighbour, weight) lists in flat arrays
    deg = np.zeros(n, dtype=np.int64)
    eu = np.empty(n - 1, dtype=np.int64)
    ev = np.empty(n - 1, dtype=np.int64)
    ew = np.empty(n - 1, dtype=a.dtype)
    for e in range(n - 1):
        v = -1
        for j in range(n):
            if not in_tree[j] and (v < 0 or best[j] < best[v]):
                v = j
        in_tree[v] = True
        eu[e] = parent[v]
        ev[e] = v
        ew[e] = best[v]
        deg[parent[v]] += 1
        deg[v] += 1
        for j in range(n):
            if not in_tree[j] and a[v, j] < best[j]:
                best[j] = a[v, j]
                parent[j] = v
    start = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        start[i + 1] = start[i] + deg[i]
    fill = start[:-1].copy()
    nbr = np.empty(2 * (n - 1), dtype=np.int64)
    wt = np.empty(2 * (n - 1), dtype=a.dtype)
    for e in range(n - 1):
        u = eu[e]
        v = ev[e]
        nbr[fill[u]] = v
        wt[fill[u]] = ew[e]
        fill[u] += 1
        nbr[fill[v]] = u
        wt[fill[v]] = ew[e]
        fill[v] += 1
    stack = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    for s in range(n):
        seen[:] = False
        seen[s] = True
        top = 0
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for p in range(start[u], start[u + 1]):
                v = nbr[p]
                if not seen[v]:
                    seen[v] = True
                    w = wt[p]
                    cur = out[s, u]
                    out[s, v] = w if w > cur else cur
                    stack[top] = v
                    top += 1
    return out
