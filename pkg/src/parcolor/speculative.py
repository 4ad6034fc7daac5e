"""Speculative greedy coloring: topology-driven and data-driven drivers.

Each iteration is two bulk-synchronous phases over contiguous work chunks:

* first-fit: every pending vertex takes the smallest color its neighbours
  do not hold;
* conflict resolve: a pending vertex sharing a color with a neighbour that
  outranks it clears its color and is queued for the next iteration.

In deterministic mode the first-fit phase reads the colors as they stood at
the preceding barrier, so the result depends only on the graph and policy,
never on workers, coarsening or chunking. In racy mode workers read and
write the live color array; there coarsening matters, since a chunk sees its
own earlier writes, and a single worker is plain sequential greedy in
worklist order.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._backend import jit_pair, njit, prange
from .graph import CsrGraph
from .greedy import (
    _py_bitset,
    ff_bitset_kernel,
    ff_mask_kernel,
    first_fit_many,
    neighbor_segments,
)


class Policy(str, enum.Enum):
    BASELINE_ID = "baseline"  # smaller id loses
    DEGREE = "degree"  # smaller degree loses; ties: larger id loses


class Balance(str, enum.Enum):
    UNIFORM = "uniform"
    EDGE = "edge"


EDGE_BALANCE_SLACK = 0.25


@dataclass(frozen=True)
class SpecConfig:
    policy: Policy = Policy.BASELINE_ID
    coarsening: int = 128
    balance: Balance = Balance.UNIFORM
    workers: int = field(default_factory=_backend.max_workers)
    deterministic: bool = True
    max_iterations: int | None = None  # None: n + 1
    kernel: str = "bitset"

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "balance", Balance(self.balance))
        if self.coarsening < 1:
            raise ValueError("coarsening must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.kernel not in ("bitset", "mask"):
            raise ValueError(f"unknown first-fit kernel {self.kernel!r}")


@dataclass
class ConvergenceTrace:
    """Per-iteration record. ``worklist_sizes[i]`` is the number of vertices
    still pending after iteration ``i``; the last entry is 0 on success."""

    iterations: int = 0
    worklist_sizes: list[int] = field(default_factory=list)
    conflicts_per_iter: list[int] = field(default_factory=list)
    phase_ns: dict[str, int] = field(
        default_factory=lambda: {"first_fit": 0, "conflict": 0, "compact": 0}
    )

    def record(self, pending: int, conflicts: int) -> None:
        self.iterations += 1
        self.worklist_sizes.append(int(pending))
        self.conflicts_per_iter.append(int(conflicts))


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, trace: ConvergenceTrace):
        super().__init__(message)
        self.trace = trace


# -- conflict rules --------------------------------------------------------

@njit
def _loses(v, w, indptr, degree_policy):
    if degree_policy:
        dv = indptr[v + 1] - indptr[v]
        dw = indptr[w + 1] - indptr[w]
        if dv != dw:
            return dv < dw
        return v > w
    return v < w


def resolve_loser(v: int, w: int, g: CsrGraph, policy: Policy | str) -> int:
    """Which endpoint of a same-colored edge gives up its color."""
    if v == w:
        raise ValueError("resolve_loser needs two distinct vertices")
    deg = Policy(policy) is Policy.DEGREE
    return v if _loses(np.int64(v), np.int64(w), g.row_offsets, deg) else w


def conflict_scan(g: CsrGraph, v: int, coloring: np.ndarray, policy: Policy | str) -> bool:
    """True iff v shares its color with a neighbour that outranks it."""
    c = coloring[v]
    deg = Policy(policy) is Policy.DEGREE
    for w in g.neighbors(v):
        if coloring[w] == c and _loses(np.int64(v), np.int64(w), g.row_offsets, deg):
            return True
    return False


# -- worklist compaction ----------------------------------------------------

def _count_impl(flags, bounds, counts):
    for b in prange(bounds.shape[0] - 1):
        s = 0
        for i in range(bounds[b], bounds[b + 1]):
            s += flags[i]
        counts[b] = s


def _scatter_impl(candidates, flags, bounds, offsets, out):
    for b in prange(bounds.shape[0] - 1):
        k = offsets[b]
        for i in range(bounds[b], bounds[b + 1]):
            if flags[i]:
                out[k] = candidates[i]
                k += 1


_count_ser, _count_par = jit_pair(_count_impl)
_scatter_ser, _scatter_par = jit_pair(_scatter_impl)


def _even_bounds(size: int, parts: int) -> np.ndarray:
    parts = max(1, min(parts, size)) if size else 1
    return np.linspace(0, size, parts + 1).astype(np.int64)


def compact_worklist(candidates, flags, workers: int = 1, bounds=None, out=None) -> np.ndarray:
    """Stable filter of ``candidates`` by ``flags`` via per-block counts and an
    exclusive prefix sum, so every block knows where to write independently.

    ``bounds`` are block boundaries (defaults to ``workers`` even blocks);
    ``out`` may be a preallocated buffer, in which case a prefix view of it is
    returned.
    """
    candidates = np.asarray(candidates)
    flags = np.asarray(flags).astype(np.int8, copy=False)
    if flags.shape != candidates.shape:
        raise ValueError("flags and candidates must have the same length")
    if bounds is None:
        bounds = _even_bounds(candidates.size, workers)
    nblocks = bounds.size - 1
    if _backend.use_numba():
        counts = np.empty(nblocks, dtype=np.int64)
        par = workers > 1
        with _backend.threads(workers):
            (_count_par if par else _count_ser)(flags, bounds, counts)
            offsets = np.zeros(nblocks + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            total = int(offsets[-1])
            dst = np.empty(total, dtype=candidates.dtype) if out is None else out[:total]
            (_scatter_par if par else _scatter_ser)(candidates, flags, bounds, offsets, dst)
        return dst
    csum = np.concatenate([[0], np.cumsum(flags, dtype=np.int64)])
    counts = csum[bounds[1:]] - csum[bounds[:-1]]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    total = int(offsets[-1])
    dst = np.empty(total, dtype=candidates.dtype) if out is None else out[:total]
    sel = np.flatnonzero(flags)
    block = np.searchsorted(bounds, sel, side="right") - 1
    # rank of each selected item inside its block, then block base offset
    pos = offsets[block] + (csum[sel] - csum[bounds[block]])
    dst[pos] = candidates[sel]
    return dst


# -- scheduling -----------------------------------------------------------

def chunk_schedule(work, g: CsrGraph, cfg: SpecConfig) -> np.ndarray:
    """Chunk boundaries over ``work``: chunk i is ``work[b[i]:b[i+1]]``.

    Uniform chunks hold ``cfg.coarsening`` vertices. Edge-balanced chunks are
    cut greedily left to right so each chunk's degree sum stays within
    ``ceil(total / uniform_chunks) * (1 + slack)``; a single vertex heavier
    than that cap sits alone in its chunk.
    """
    work = np.asarray(work)
    size = work.size
    if size == 0:
        return np.zeros(1, dtype=np.int64)
    k = cfg.coarsening
    if cfg.balance is Balance.UNIFORM:
        return np.append(np.arange(0, size, k, dtype=np.int64), size)
    deg = g.row_offsets[work + 1] - g.row_offsets[work]
    prefix = np.concatenate([[0], np.cumsum(deg)])
    nuniform = -(-size // k)
    cap = -(-int(prefix[-1]) // nuniform) * (1.0 + EDGE_BALANCE_SLACK)
    cuts = [0]
    s = 0
    while s < size:
        e = int(np.searchsorted(prefix, prefix[s] + cap, side="right")) - 1
        e = min(max(e, s + 1), size)
        cuts.append(e)
        s = e
    return np.asarray(cuts, dtype=np.int64)


def chunk_ranges(bounds) -> list[range]:
    return [range(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


# -- phase kernels -----------------------------------------------------------

def _assign_impl(indptr, indices, items, bounds, colors, live, use_bitset, maxdeg, out):
    for ci in prange(bounds.shape[0] - 1):
        scratch = np.full(maxdeg + 2 if not use_bitset else 1, -1, dtype=np.int64)
        for i in range(bounds[ci], bounds[ci + 1]):
            v = items[i]
            if use_bitset:
                c = ff_bitset_kernel(indptr, indices, colors, v)
            else:
                c = ff_mask_kernel(indptr, indices, colors, v, scratch)
            if live:
                colors[v] = c
            else:
                out[i] = c


def _resolve_impl(indptr, indices, items, bounds, colors, live, degree_policy, flags, lost):
    for ci in prange(bounds.shape[0] - 1):
        for i in range(bounds[ci], bounds[ci + 1]):
            v = items[i]
            c = colors[v]
            cnt = 0
            if c != 0:
                for j in range(indptr[v], indptr[v + 1]):
                    w = indices[j]
                    if colors[w] == c and _loses(v, w, indptr, degree_policy):
                        cnt += 1
            lost[i] = cnt
            if cnt > 0:
                flags[i] = 1
                if live:
                    colors[v] = 0
            else:
                flags[i] = 0


def _topo_assign_impl(indptr, indices, bounds, colors, live, use_bitset, maxdeg, out, assigned):
    for ci in prange(bounds.shape[0] - 1):
        scratch = np.full(maxdeg + 2 if not use_bitset else 1, -1, dtype=np.int64)
        k = 0
        for v in range(bounds[ci], bounds[ci + 1]):
            if colors[v] != 0:
                continue  # colored: finalized or awaiting its conflict scan
            if use_bitset:
                c = ff_bitset_kernel(indptr, indices, colors, v)
            else:
                c = ff_mask_kernel(indptr, indices, colors, v, scratch)
            if live:
                colors[v] = c
            else:
                out[v] = c
            k += 1
        assigned[ci] = k


def _topo_resolve_impl(indptr, indices, bounds, colors, finalized, live, degree_policy, flags, lost):
    for ci in prange(bounds.shape[0] - 1):
        for v in range(bounds[ci], bounds[ci + 1]):
            flags[v] = 0
            lost[v] = 0
            if finalized[v]:
                continue
            c = colors[v]
            cnt = 0
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                if colors[w] == c and _loses(v, w, indptr, degree_policy):
                    cnt += 1
            if cnt > 0:
                flags[v] = 1
                lost[v] = cnt
                if live:
                    colors[v] = 0
            else:
                finalized[v] = True


_assign_ser, _assign_par = jit_pair(_assign_impl)
_resolve_ser, _resolve_par = jit_pair(_resolve_impl)
_topo_assign_ser, _topo_assign_par = jit_pair(_topo_assign_impl)
_topo_resolve_ser, _topo_resolve_par = jit_pair(_topo_resolve_impl)


# -- numpy fallbacks ----------------------------------------------------------

def _np_assign_live(r, c, items, colors) -> None:
    # numpy has no shared-memory threads; workers running one after another
    # is a legal racy schedule, and it is plain sequential greedy
    for v in items.tolist():
        colors[v] = _py_bitset(colors[c[r[v] : r[v + 1]]])


def _np_losers(indptr, indices, items, colors, degree_policy):
    """Vectorized conflict scan; returns (flags, lost-edge counts) per item."""
    seg, w, deg = neighbor_segments(indptr, indices, items)
    v = items[seg]
    cv = colors[v]
    hit = (cv == colors[w]) & (cv != 0)
    if degree_policy:
        dv, dw = deg[seg], indptr[w + 1] - indptr[w]
        loses = (dv < dw) | ((dv == dw) & (v > w))
    else:
        loses = v < w
    lost = np.bincount(seg[hit & loses], minlength=items.size)
    return (lost > 0).astype(np.int8), lost


# -- drivers -----------------------------------------------------------------

def _cap(g: CsrGraph, cfg: SpecConfig) -> int:
    return cfg.max_iterations if cfg.max_iterations is not None else g.num_vertices + 1


def color_data_driven(g: CsrGraph, cfg: SpecConfig | None = None):
    """Worklist-driven speculative greedy coloring.

    Returns ``(colors, trace)``. Raises :class:`NonConvergenceError` if the
    worklist is still non-empty after ``cfg.max_iterations`` iterations.
    """
    cfg = cfg or SpecConfig()
    n = g.num_vertices
    r, c = g.row_offsets, g.col_indices
    colors = np.zeros(n, dtype=np.int32)
    trace = ConvergenceTrace()
    cap = _cap(g, cfg)
    use_bitset = cfg.kernel == "bitset"
    degree_policy = cfg.policy is Policy.DEGREE
    live = not cfg.deterministic
    maxdeg = g.max_degree()
    numba_path = _backend.use_numba()
    par = cfg.workers > 1

    # double buffer: compaction writes into w_out, then the two swap
    buf_in = np.arange(n, dtype=np.int64)
    buf_out = np.empty(n, dtype=np.int64)
    size = n
    clock = time.perf_counter_ns
    with _backend.threads(cfg.workers):
        while size:
            if trace.iterations >= cap:
                raise NonConvergenceError(
                    f"worklist not empty after {trace.iterations} iterations", trace
                )
            w_in = buf_in[:size]
            bounds = chunk_schedule(w_in, g, cfg)
            t0 = clock()
            if numba_path:
                out = np.empty(0 if live else size, dtype=np.int32)
                (_assign_par if par else _assign_ser)(
                    r, c, w_in, bounds, colors, live, use_bitset, maxdeg, out
                )
                if not live:
                    colors[w_in] = out
            elif live:
                _np_assign_live(r, c, w_in, colors)
            else:
                colors[w_in] = first_fit_many(r, c, colors, w_in)
            t1 = clock()
            if numba_path:
                flags = np.empty(size, dtype=np.int8)
                lost = np.empty(size, dtype=np.int64)
                (_resolve_par if par else _resolve_ser)(
                    r, c, w_in, bounds, colors, live, degree_policy, flags, lost
                )
            else:
                flags, lost = _np_losers(r, c, w_in, colors, degree_policy)
            if not (live and numba_path):
                colors[w_in[flags.astype(bool)]] = 0
            t2 = clock()
            w_out = compact_worklist(w_in, flags, cfg.workers, bounds=bounds, out=buf_out)
            t3 = clock()
            size = w_out.size
            buf_in, buf_out = buf_out, buf_in
            trace.record(size, int(lost.sum()))
            trace.phase_ns["first_fit"] += t1 - t0
            trace.phase_ns["conflict"] += t2 - t1
            trace.phase_ns["compact"] += t3 - t2
    return colors, trace


def color_topology_driven(g: CsrGraph, cfg: SpecConfig | None = None):
    """Sweep every vertex each iteration, skipping the finalized ones.

    The closing sweep that finds nothing left to color is not counted as an
    iteration in the returned trace.
    """
    cfg = cfg or SpecConfig()
    n = g.num_vertices
    r, c = g.row_offsets, g.col_indices
    colors = np.zeros(n, dtype=np.int32)
    finalized = np.zeros(n, dtype=np.bool_)
    trace = ConvergenceTrace()
    cap = _cap(g, cfg)
    use_bitset = cfg.kernel == "bitset"
    degree_policy = cfg.policy is Policy.DEGREE
    live = not cfg.deterministic
    maxdeg = g.max_degree()
    numba_path = _backend.use_numba()
    par = cfg.workers > 1
    bounds = chunk_schedule(np.arange(n, dtype=np.int64), g, cfg)
    nchunks = bounds.size - 1
    flags = np.zeros(n, dtype=np.int8)
    lost = np.zeros(n, dtype=np.int64)
    clock = time.perf_counter_ns
    with _backend.threads(cfg.workers):
        while True:
            t0 = clock()
            if numba_path:
                assigned = np.zeros(nchunks, dtype=np.int64)
                out = colors if live else colors.copy()
                (_topo_assign_par if par else _topo_assign_ser)(
                    r, c, bounds, colors, live, use_bitset, maxdeg, out, assigned
                )
                changed = bool(assigned.sum())
                colors = out
            else:
                pending = np.flatnonzero(colors == 0)
                changed = pending.size > 0
                if live:
                    _np_assign_live(r, c, pending, colors)
                else:
                    colors[pending] = first_fit_many(r, c, colors, pending)
            t1 = clock()
            trace.phase_ns["first_fit"] += t1 - t0
            if not changed:
                break
            if trace.iterations >= cap:
                raise NonConvergenceError(
                    f"vertices still pending after {trace.iterations} iterations", trace
                )
            if numba_path:
                (_topo_resolve_par if par else _topo_resolve_ser)(
                    r, c, bounds, colors, finalized, live, degree_policy, flags, lost
                )
                if not live:
                    colors[flags.astype(bool)] = 0
            else:
                active = np.flatnonzero(~finalized)
                f, lst = _np_losers(r, c, active, colors, degree_policy)
                lost[:] = 0
                lost[active] = lst
                bad = f.astype(bool)
                colors[active[bad]] = 0
                finalized[active[~bad]] = True
            trace.phase_ns["conflict"] += clock() - t1
            trace.record(n - int(finalized.sum()), int(lost.sum()))
    return colors, trace
