"""Shortest paths on windows of the periodic grid graph.

The graph lives on a rectangular index window cut out of the lift of the
grid; edge weights are metric lengths of straight segments (composite
midpoint rule), precomputed as dense (node, move) arrays by vectorized numpy
so both backends consume identical inputs.  The heap loop is the hot part:
an A* search with a consistent metric lower bound (scaled Euclidean), run
once per base point with an incumbent cutoff.  Ties break on node index, so
runs are bit-reproducible.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .._backend import USE_NUMBA

if USE_NUMBA:
    from numba import njit


def _search_py(nbr, wts, H, sources, dst, cutoff):
    """Dijkstra/A* with lazy deletion.  dst < 0 runs to exhaustion.

    Returns (distance to dst or inf, settled distance array).
    """
    N = nbr.shape[0]
    M = nbr.shape[1]
    dist = np.full(N, np.inf)
    heap = []
    for s in sources:
        dist[s] = 0.0
        heapq.heappush(heap, (H[s], s))
    while heap:
        f, u = heapq.heappop(heap)
        if f > cutoff:
            break
        du = f - H[u]
        if du > dist[u] + 1e-15:
            continue
        if u == dst:
            return du, dist
        row_n = nbr[u]
        row_w = wts[u]
        for m in range(M):
            v = row_n[m]
            if v < 0:
                continue
            nd = du + row_w[m]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd + H[v], v))
    if dst >= 0:
        return math.inf, dist
    return 0.0, dist


if USE_NUMBA:

    @njit(cache=True)
    def _search_nb(nbr, wts, H, sources, dst, cutoff):  # pragma: no cover
        N = nbr.shape[0]
        M = nbr.shape[1]
        dist = np.full(N, np.inf)
        heap = [(0.0, -1)]
        heap.pop()
        for k in range(sources.shape[0]):
            s = sources[k]
            dist[s] = 0.0
            heapq.heappush(heap, (H[s], s))
        while len(heap) > 0:
            f, u = heapq.heappop(heap)
            if f > cutoff:
                break
            du = f - H[u]
            if du > dist[u] + 1e-15:
                continue
            if u == dst:
                return du, dist
            for m in range(M):
                v = np.int64(nbr[u, m])
                if v < 0:
                    continue
                nd = du + wts[u, m]
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd + H[v], v))
        if dst >= 0:
            return np.inf, dist
        return 0.0, dist

    _search = _search_nb
else:
    _search = _search_py


def search(nbr, wts, H, sources, dst=-1, cutoff=np.inf):
    """Backend-selected shortest-path search; see _search_py for semantics."""
    sources = np.asarray(sources, dtype=np.int64)
    d, dist = _search(
        np.ascontiguousarray(nbr),
        np.ascontiguousarray(wts),
        np.ascontiguousarray(H, dtype=np.float64),
        sources,
        int(dst),
        float(cutoff),
    )
    return float(d), dist


def moves_2d(radius: int = 3) -> np.ndarray:
    """Coprime integer offsets up to the given Chebyshev radius.

    Richer than the 8-connected stencil so that straight classes like (2,1)
    are represented exactly; composite offsets are redundant and dropped.
    """
    out = []
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            if (a, b) == (0, 0):
                continue
            if math.gcd(abs(a), abs(b)) == 1:
                out.append((a, b))
    return np.array(out, dtype=np.int64)


def moves_nd(n: int) -> np.ndarray:
    """Full unit-box stencil (8-connected in 2D, 26-connected in 3D)."""
    grids = np.meshgrid(*([np.arange(-1, 2)] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts[np.any(pts != 0, axis=1)].astype(np.int64)


def default_moves(n: int) -> np.ndarray:
    return moves_2d(3) if n == 2 else moves_nd(n)


def periodic_weight_table(metric, moves) -> np.ndarray:
    """Edge weights on one fundamental period: entry (node, move) is the
    composite-midpoint metric length of the straight segment from the node
    along the move.  Weights are periodic, so windows tile this table.
    Cached on the metric (immutable) keyed by the move stencil."""
    key = ("weights", moves.tobytes())
    cache = getattr(metric, "_path_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(metric, "_path_cache", cache)
    if key in cache:
        return cache[key]
    res = metric.resolution
    n = metric.n
    base = np.indices((res,) * n).reshape(n, -1).T / res  # (res^n, n)
    M = moves.shape[0]
    W0 = np.empty((base.shape[0], M))
    for m in range(M):
        d = moves[m].astype(float) / res
        nseg = max(int(np.abs(moves[m]).max()), 1)
        dd = d / nseg
        w = np.zeros(base.shape[0])
        for s in range(nseg):
            mid = base + d * ((s + 0.5) / nseg)
            g = metric.eval_many(np.mod(mid, 1.0))
            w += np.sqrt(np.einsum("kij,i,j->k", g, dd, dd))
        W0[:, m] = w
    cache[key] = W0
    return W0


def build_window_graph(metric, lo, shape, moves):
    """Dense neighbor/weight tables for the index window [0, shape) at lift
    offset lo (in grid units)."""
    res = metric.resolution
    n = metric.n
    shape = tuple(int(s) for s in shape)
    lo = np.asarray(lo, dtype=np.int64)
    N = int(np.prod(shape))
    M = moves.shape[0]
    W0 = periodic_weight_table(metric, moves)
    idx = np.indices(shape).reshape(n, -1).T  # (N, n)
    period_flat = np.ravel_multi_index(tuple(((lo + idx) % res).T), (res,) * n)
    wts = W0[period_flat].copy()
    nbr = np.full((N, M), -1, dtype=np.int32)
    shape_arr = np.array(shape)
    for m in range(M):
        J = idx + moves[m]
        valid = np.all((J >= 0) & (J < shape_arr), axis=1)
        if np.any(valid):
            nbr[valid, m] = np.ravel_multi_index(
                tuple(J[valid].T), shape
            ).astype(np.int32)
        wts[~valid, m] = np.inf
    coords = (lo + idx) / res
    return nbr, wts, coords


def euclid_heuristic(coords, target, scale):
    """Consistent A* lower bound: scale * Euclidean distance to target."""
    return scale * np.sqrt(((coords - target) ** 2).sum(axis=1))
