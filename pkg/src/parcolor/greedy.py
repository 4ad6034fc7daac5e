"""Sequential greedy coloring and the two first-fit kernels.

A coloring is an int32 array indexed by vertex; 0 means uncolored and valid
colors start at 1. First-fit kernels only compute a color, phase drivers own
every write to the coloring.
"""

from __future__ import annotations

import numpy as np

from . import _backend
from ._backend import njit
from .graph import CsrGraph, GraphInputError

WORD_BITS = 64
_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
# index table for the 64-bit de Bruijn sequence above
_DEBRUIJN_INDEX = np.array(
    [
        0, 1, 48, 2, 57, 49, 28, 3, 61, 58, 50, 42, 38, 29, 17, 4,
        62, 55, 59, 36, 53, 51, 43, 22, 45, 39, 33, 30, 24, 18, 12, 5,
        63, 47, 56, 27, 60, 41, 37, 16, 54, 35, 52, 21, 44, 32, 23, 11,
        46, 26, 40, 15, 34, 20, 31, 10, 25, 14, 19, 9, 13, 8, 7, 6,
    ],
    dtype=np.int64,
)
MASK_SENTINEL = -1  # stamp value outside [0, n)


@njit
def ffs64(word):
    """0-based index of the least significant set bit; -1 when ``word == 0``."""
    if word == 0:
        return -1
    low = word & (~word + np.uint64(1))
    return _DEBRUIJN_INDEX[(low * _DEBRUIJN) >> np.uint64(58)]


@njit
def ff_mask_kernel(indptr, indices, colors, v, scratch):
    # scratch[c] == v marks color c forbidden for v; index 0 is never consulted
    start, stop = indptr[v], indptr[v + 1]
    limit = stop - start + 1
    for j in range(start, stop):
        c = colors[indices[j]]
        if 0 < c <= limit:
            scratch[c] = v
    for c in range(1, limit + 1):
        if scratch[c] != v:
            return c
    return limit + 1  # unreachable: degree d forbids at most d colors


@njit
def ff_bitset_kernel(indptr, indices, colors, v):
    start, stop = indptr[v], indptr[v + 1]
    base = 1
    while True:
        word = np.uint64(0xFFFFFFFFFFFFFFFF)
        top = base + 64
        for j in range(start, stop):
            c = colors[indices[j]]
            if base <= c < top:
                word &= ~(np.uint64(1) << np.uint64(c - base))
        if word != 0:
            return base + ffs64(word)
        base = top


@njit
def _sequential_kernel(indptr, indices, order, use_bitset):
    n = indptr.shape[0] - 1
    colors = np.zeros(n, dtype=np.int32)
    maxdeg = 0
    for v in range(n):
        d = indptr[v + 1] - indptr[v]
        if d > maxdeg:
            maxdeg = d
    scratch = np.full(maxdeg + 2, -1, dtype=np.int64)
    for i in range(order.shape[0]):
        v = order[i]
        if use_bitset:
            colors[v] = ff_bitset_kernel(indptr, indices, colors, v)
        else:
            colors[v] = ff_mask_kernel(indptr, indices, colors, v, scratch)
    return colors


def new_scratch(g: CsrGraph) -> np.ndarray:
    """Mark array for :func:`first_fit_mask`; one per worker."""
    return np.full(g.max_degree() + 2, MASK_SENTINEL, dtype=np.int64)


def first_fit_mask(g: CsrGraph, v: int, coloring: np.ndarray, scratch: np.ndarray | None = None) -> int:
    """Smallest color >= 1 unused by v's neighbours, via a vertex-stamped mark array.

    Marks are stamped with ``v`` and never cleared, so a ``scratch`` array can
    serve many distinct vertices; reset it to ``MASK_SENTINEL`` before asking
    about the same ``v`` again under a different coloring.
    """
    if scratch is None:
        scratch = new_scratch(g)
    if not _backend.use_numba():
        return _py_mask(g.neighbors(v), coloring, v, scratch)
    return int(ff_mask_kernel(g.row_offsets, g.col_indices, coloring, np.int64(v), scratch))


def first_fit_bitset(g: CsrGraph, v: int, coloring: np.ndarray) -> int:
    """Same contract as :func:`first_fit_mask`, using 64-bit windows and find-first-set."""
    if not _backend.use_numba():
        return _py_bitset(coloring[g.neighbors(v)])
    return int(ff_bitset_kernel(g.row_offsets, g.col_indices, coloring, np.int64(v)))


def neighbor_segments(indptr, indices, items):
    """Flatten the adjacency of ``items``: (segment id per entry, neighbour ids, degrees)."""
    items = np.asarray(items, dtype=np.int64)
    starts = indptr[items]
    deg = indptr[items + 1] - starts
    total = int(deg.sum())
    seg = np.repeat(np.arange(items.size, dtype=np.int64), deg)
    seg_first = np.cumsum(deg) - deg
    pos = np.repeat(starts - seg_first, deg) + np.arange(total, dtype=np.int64)
    return seg, indices[pos].astype(np.int64), deg


def smallest_missing(seg, nc, deg) -> np.ndarray:
    """Per segment, the smallest color >= 1 absent from ``nc`` (the segment's neighbour colors)."""
    k = deg.size
    out = np.ones(k, dtype=np.int32)
    keep = (nc > 0) & (nc <= deg[seg] + 1)
    seg, nc = seg[keep], nc[keep].astype(np.int64)
    if seg.size == 0:
        return out
    span = int(deg.max()) + 2
    pairs = np.unique(seg * span + nc)
    useg, ucol = np.divmod(pairs, span)
    cnt = np.bincount(useg, minlength=k)
    first = np.cumsum(cnt) - cnt
    rank = np.arange(pairs.size, dtype=np.int64) - first[useg]
    # distinct forbidden colors ascending: the first gap is the answer
    out[:] = cnt + 1
    gap = ucol != rank + 1
    if gap.any():
        gidx, at = np.unique(useg[gap], return_index=True)
        out[gidx] = (rank[gap][at] + 1).astype(np.int32)
    return out


def first_fit_many(indptr, indices, colors, items) -> np.ndarray:
    """Vectorized first-fit of every vertex in ``items`` against a fixed ``colors``."""
    seg, nbr, deg = neighbor_segments(indptr, indices, items)
    return smallest_missing(seg, colors[nbr], deg)


def _sequential_python(g: CsrGraph, order: np.ndarray, use_bitset: bool) -> np.ndarray:
    r, c = g.row_offsets, g.col_indices
    colors = np.zeros(g.num_vertices, dtype=np.int32)
    scratch = new_scratch(g)
    for v in order.tolist():
        s, e = r[v], r[v + 1]
        if use_bitset:
            colors[v] = _py_bitset(colors[c[s:e]])
        else:
            colors[v] = _py_mask(c[s:e], colors, v, scratch)
    return colors


def _py_mask(neighbors: np.ndarray, colors: np.ndarray, v: int, scratch: np.ndarray) -> int:
    limit = neighbors.size + 1
    for col in colors[neighbors].tolist():
        if 0 < col <= limit:
            scratch[col] = v
    cc = 1
    while scratch[cc] == v:
        cc += 1
    return cc


def _py_bitset(neighbor_colors: np.ndarray) -> int:
    base = 1
    cols = neighbor_colors.tolist()
    while True:
        word = (1 << WORD_BITS) - 1
        for col in cols:
            if base <= col < base + WORD_BITS:
                word &= ~(1 << (col - base))
        if word:
            return base + (word & -word).bit_length() - 1
        base += WORD_BITS


def color_sequential(g: CsrGraph, order=None, kernel: str = "bitset") -> np.ndarray:
    """Greedy first-fit coloring visiting vertices in ``order`` (identity by default)."""
    n = g.num_vertices
    if order is None:
        order = np.arange(n, dtype=np.int64)
    else:
        order = np.asarray(order, dtype=np.int64)
        if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
            raise GraphInputError("order must be a permutation of the vertex ids")
    if kernel not in ("bitset", "mask"):
        raise ValueError(f"unknown first-fit kernel {kernel!r}")
    if _backend.use_numba():
        return _sequential_kernel(g.row_offsets, g.col_indices, order, kernel == "bitset")
    return _sequential_python(g, order, kernel == "bitset")
