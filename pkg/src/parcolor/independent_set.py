"""Independent-set coloring: Jones-Plassmann and the multi-hash variant.

Both color one or more independent sets of the still-uncolored vertices per
round. Priorities come from a keyed 64-bit integer mix of (vertex, index,
seed), so rounds are pure functions of their inputs and need no shared RNG
state between workers. Ties in hash value are broken by vertex id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from ._backend import jit_pair, njit, prange
from .graph import CsrGraph
from .greedy import neighbor_segments
from .speculative import ConvergenceTrace, NonConvergenceError

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_KMUL = 0xC2B2AE3D27D4EB4F


def _mix_py(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


@njit
def _hash_nb(v, k, seed):
    z = (np.uint64(v) + np.uint64(1)) * np.uint64(_GOLDEN)
    z ^= (np.uint64(k) + np.uint64(1)) * np.uint64(_KMUL)
    z ^= np.uint64(seed)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def hash_vertex(v: int, k: int, seed: int) -> int:
    """64-bit keyed hash of vertex ``v`` under hash index ``k``."""
    z = (((v + 1) * _GOLDEN) & _M64) ^ (((k + 1) * _KMUL) & _M64) ^ (seed & _M64)
    return _mix_py(z)


def hash_array(vertices, k: int, seed: int) -> np.ndarray:
    """Vectorized :func:`hash_vertex`; returns uint64."""
    with np.errstate(over="ignore"):
        z = (np.asarray(vertices, dtype=np.uint64) + np.uint64(1)) * np.uint64(_GOLDEN)
        z ^= np.uint64(((k + 1) * _KMUL) & _M64)
        z ^= np.uint64(seed & _M64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


@njit
def _beats(hv, v, hw, w):
    return hv > hw or (hv == hw and v > w)


# -- Jones-Plassmann --------------------------------------------------------

def _jp_select_impl(indptr, indices, items, colors, prio, selected):
    for i in prange(items.shape[0]):
        v = items[i]
        ok = True
        for j in range(indptr[v], indptr[v + 1]):
            w = indices[j]
            if colors[w] == 0 and not _beats(prio[v], v, prio[w], w):
                ok = False
                break
        selected[i] = ok


_jp_select_ser, _jp_select_par = jit_pair(_jp_select_impl)


def _np_local_max(r, c, items, colors, prio):
    seg, w, _ = neighbor_segments(r, c, items)
    v = items[seg]
    live = colors[w] == 0
    beaten = live & ((prio[w] > prio[v]) | ((prio[w] == prio[v]) & (w > v)))
    return np.bincount(seg[beaten], minlength=items.size) == 0


def jp_color(g: CsrGraph, seed: int = 0, workers: int = 1, priorities=None, max_rounds: int | None = None):
    """Jones-Plassmann coloring; round ``i`` colors a fresh independent set with ``i + 1``.

    ``priorities`` pins the per-vertex values for every round (testing);
    otherwise round ``i`` draws ``hash_vertex(v, i, seed)``.
    """
    n = g.num_vertices
    r, c = g.row_offsets, g.col_indices
    colors = np.zeros(n, dtype=np.int32)
    trace = ConvergenceTrace()
    cap = max_rounds if max_rounds is not None else n + 1
    fixed = None if priorities is None else np.asarray(priorities, dtype=np.uint64)
    if fixed is not None and fixed.shape != (n,):
        raise ValueError("priorities must have one entry per vertex")
    allv = np.arange(n, dtype=np.int64)
    w = allv
    par = workers > 1
    with _backend.threads(workers):
        while w.size:
            if trace.iterations >= cap:
                raise NonConvergenceError(f"{w.size} vertices uncolored after {cap} rounds", trace)
            prio = fixed if fixed is not None else hash_array(allv, trace.iterations, seed)
            if _backend.use_numba():
                sel = np.empty(w.size, dtype=np.bool_)
                (_jp_select_par if par else _jp_select_ser)(r, c, w, colors, prio, sel)
            else:
                sel = _np_local_max(r, c, w, colors, prio)
            colors[w[sel]] = trace.iterations + 1
            w = w[~sel]
            trace.record(w.size, 0)
    return colors, trace


# -- multi-hash ---------------------------------------------------------------

@dataclass(frozen=True)
class MultiHashConfig:
    num_hashes: int = 2
    seed: int = 0
    max_rounds: int | None = None  # None: n + 1
    workers: int = 1

    def __post_init__(self):
        if self.num_hashes < 1:
            raise ValueError("num_hashes must be >= 1")


def _mh_select_impl(indptr, indices, items, colors, nh, seed, out):
    # out[i]: lowest qualifying set (2k local max, 2k+1 local min), -1 if none
    for i in prange(items.shape[0]):
        v = items[i]
        best = -1
        for k in range(nh):
            hv = _hash_nb(v, k, seed)
            is_max = True
            is_min = True
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                if colors[w] != 0:
                    continue
                hw = _hash_nb(w, k, seed)
                if _beats(hw, w, hv, v):
                    is_max = False
                else:
                    is_min = False
                if not is_max and not is_min:
                    break
            if is_max:
                best = 2 * k
                break
            if is_min:
                best = 2 * k + 1
                break
        out[i] = best


_mh_select_ser, _mh_select_par = jit_pair(_mh_select_impl)


def _np_mh_select(r, c, items, colors, nh, seed):
    seg, w, _ = neighbor_segments(r, c, items)
    v = items[seg]
    live = colors[w] == 0
    out = np.full(items.size, -1, dtype=np.int64)
    for k in range(nh):
        hv, hw = hash_array(v, k, seed), hash_array(w, k, seed)
        above = live & ((hw > hv) | ((hw == hv) & (w > v)))
        below = live & ~above
        is_max = np.bincount(seg[above], minlength=items.size) == 0
        is_min = np.bincount(seg[below], minlength=items.size) == 0
        free = out < 0
        out[free & is_max] = 2 * k
        out[free & ~is_max & is_min] = 2 * k + 1
    return out


def multihash_color(g: CsrGraph, cfg: MultiHashConfig | None = None):
    """Color up to ``2 * num_hashes`` independent sets per round.

    Round ``i`` hashes with seed ``cfg.seed ^ i``. Sets that come out empty are
    skipped, so the colors a round hands out are consecutive.
    """
    cfg = cfg or MultiHashConfig()
    n = g.num_vertices
    r, c = g.row_offsets, g.col_indices
    colors = np.zeros(n, dtype=np.int32)
    trace = ConvergenceTrace()
    cap = cfg.max_rounds if cfg.max_rounds is not None else n + 1
    nsets = 2 * cfg.num_hashes
    w = np.arange(n, dtype=np.int64)
    base = 0
    par = cfg.workers > 1
    with _backend.threads(cfg.workers):
        while w.size:
            if trace.iterations >= cap:
                raise NonConvergenceError(f"{w.size} vertices uncolored after {cap} rounds", trace)
            seed = (cfg.seed ^ trace.iterations) & _M64
            if _backend.use_numba():
                member = np.empty(w.size, dtype=np.int64)
                (_mh_select_par if par else _mh_select_ser)(r, c, w, colors, cfg.num_hashes, np.uint64(seed), member)
            else:
                member = _np_mh_select(r, c, w, colors, cfg.num_hashes, seed)
            picked = member >= 0
            used = np.bincount(member[picked], minlength=nsets) > 0
            rank = np.cumsum(used) - 1  # compact: empty sets take no color
            colors[w[picked]] = base + 1 + rank[member[picked]]
            base += int(used.sum())
            w = w[~picked]
            trace.record(w.size, 0)
    return colors, trace
