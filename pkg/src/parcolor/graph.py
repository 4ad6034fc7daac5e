"""Undirected graphs in compressed sparse row form.

Vertex ids are 0-based. ``num_edges`` (m) counts directed adjacency entries,
so every undirected edge contributes two entries to ``col_indices``.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np


class GraphInputError(ValueError):
    """Malformed edge list, CSR arrays or generator parameters."""


class MatrixMarketError(ValueError):
    """Matrix Market parse failure; ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class EdgeList:
    num_vertices: int
    edges: np.ndarray  # shape (k, 2), int64

    @classmethod
    def from_pairs(cls, num_vertices: int, pairs: Iterable[tuple[int, int]]) -> "EdgeList":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(int(num_vertices), arr)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edges]

    def __len__(self) -> int:
        return int(self.edges.shape[0])


@dataclass(frozen=True, eq=False)
class CsrGraph:
    row_offsets: np.ndarray  # int64, n+1
    col_indices: np.ndarray  # int32 (int64 when n >= 2**31), m

    @property
    def num_vertices(self) -> int:
        return int(self.row_offsets.shape[0] - 1)

    @property
    def num_edges(self) -> int:
        return int(self.col_indices.shape[0])

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.num_vertices else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v] : self.row_offsets[v + 1]]

    def edge_sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_vertices, dtype=np.int64), self.degrees())

    @classmethod
    def from_edges(cls, num_vertices: int, pairs: Iterable[tuple[int, int]]) -> "CsrGraph":
        """Canonicalize an arbitrary pair list and build the graph."""
        return build_csr(canonicalize(EdgeList.from_pairs(num_vertices, pairs)))


@dataclass(frozen=True)
class DegreeStats:
    min_degree: int
    max_degree: int
    avg_degree: float
    degree_variance: float


@dataclass(frozen=True)
class RmatParams:
    a: float
    b: float
    c: float
    d: float
    num_vertices: int
    num_undirected_edges: int
    seed: int = 0

    def __post_init__(self):
        probs = (self.a, self.b, self.c, self.d)
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise GraphInputError(f"R-MAT probabilities must lie in [0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise GraphInputError(f"R-MAT probabilities must sum to 1, got {sum(probs)!r}")
        n = self.num_vertices
        if n < 2 or n & (n - 1):
            raise GraphInputError(f"num_vertices must be a power of two >= 2, got {n}")
        if self.num_undirected_edges < 0:
            raise GraphInputError("num_undirected_edges must be non-negative")

    @property
    def scale(self) -> int:
        return self.num_vertices.bit_length() - 1


def _index_dtype(n: int):
    return np.int32 if n < 2**31 else np.int64


def canonicalize(raw: EdgeList) -> EdgeList:
    """Symmetrize, drop self-loops and duplicates; output sorted by (u, v)."""
    n = raw.num_vertices
    e = np.asarray(raw.edges, dtype=np.int64).reshape(-1, 2)
    bad = np.flatnonzero((e < 0).any(axis=1) | (e >= n).any(axis=1))
    if bad.size:
        i = int(bad[0])
        raise GraphInputError(
            f"edge {i} ({int(e[i, 0])}, {int(e[i, 1])}) has an endpoint outside [0, {n})"
        )
    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]])
    keys = np.unique(both[:, 0] * n + both[:, 1])
    out = np.empty((keys.size, 2), dtype=np.int64)
    out[:, 0], out[:, 1] = np.divmod(keys, n) if n else (keys, keys)
    return EdgeList(n, out)


def build_csr(edges: EdgeList) -> CsrGraph:
    """Build CSR arrays from a canonical edge list (see :func:`canonicalize`)."""
    n = edges.num_vertices
    e = np.asarray(edges.edges, dtype=np.int64).reshape(-1, 2)
    if e.size:
        if (e < 0).any() or (e >= n).any():
            raise GraphInputError("edge endpoint out of range")
        if (e[:, 0] == e[:, 1]).any():
            raise GraphInputError("self-loop in edge list; run canonicalize first")
        keys = e[:, 0] * n + e[:, 1]
        if (np.diff(keys) <= 0).any():
            raise GraphInputError("edge list is not sorted and deduplicated; run canonicalize first")
        rev = np.sort(e[:, 1] * n + e[:, 0])
        if not np.array_equal(rev, keys):
            raise GraphInputError("edge list is not symmetric; run canonicalize first")
    counts = np.bincount(e[:, 0], minlength=n) if e.size else np.zeros(n, dtype=np.int64)
    row_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_offsets[1:])
    return CsrGraph(row_offsets, e[:, 1].astype(_index_dtype(n)))


def check_csr(g: CsrGraph) -> None:
    """Raise :class:`GraphInputError` unless every CSR invariant holds."""
    r, c = g.row_offsets, g.col_indices
    n = g.num_vertices
    if n < 0 or r[0] != 0 or r[-1] != c.size or (np.diff(r) < 0).any():
        raise GraphInputError("row_offsets malformed")
    if c.size and ((c < 0).any() or (c >= n).any()):
        raise GraphInputError("column index out of range")
    src = g.edge_sources()
    if (src == c).any():
        raise GraphInputError("self-loop present")
    keys = src * max(n, 1) + c
    if (np.diff(keys) <= 0).any():
        raise GraphInputError("adjacency segment not strictly increasing")
    if not np.array_equal(np.sort(c.astype(np.int64) * max(n, 1) + src), keys):
        raise GraphInputError("adjacency not symmetric")


def degree_stats(g: CsrGraph) -> DegreeStats:
    if g.num_vertices == 0:
        raise GraphInputError("degree statistics of an empty graph are undefined")
    deg = g.degrees().astype(np.float64)
    return DegreeStats(
        min_degree=int(deg.min()),
        max_degree=int(deg.max()),
        avg_degree=g.num_edges / g.num_vertices,
        degree_variance=float(deg.var()),
    )


# -- Matrix Market ---------------------------------------------------------

_MM_FIELDS = {"pattern": 0, "real": 1, "integer": 1, "complex": 2}
_MM_SYMMETRY = {"general", "symmetric", "skew-symmetric", "hermitian"}


def parse_matrix_market(stream: TextIO | str) -> EdgeList:
    """Read the sparsity pattern of a coordinate Matrix Market file.

    Values are ignored. General matrices are symmetrized (A | A^T) by the
    later :func:`canonicalize` step, so the returned list is just the stored
    entries shifted to 0-based ids.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    header = stream.readline()
    tokens = header.strip().split()
    if not tokens or tokens[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("missing %%MatrixMarket header", 1)
    if len(tokens) != 5:
        raise MatrixMarketError(f"malformed header {header.strip()!r}", 1)
    obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported object/format {obj!r} {fmt!r}", 1)
    if field not in _MM_FIELDS:
        raise MatrixMarketError(f"unknown field {field!r}", 1)
    if symmetry not in _MM_SYMMETRY:
        raise MatrixMarketError(f"unknown symmetry {symmetry!r}", 1)
    nvals = _MM_FIELDS[field]

    lineno = 1
    dims = None
    for line in stream:
        lineno += 1
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise MatrixMarketError("size line must be 'rows cols entries'", lineno)
        try:
            dims = tuple(int(p) for p in parts)
        except ValueError:
            raise MatrixMarketError(f"non-integer size line {s!r}", lineno) from None
        break
    if dims is None:
        raise MatrixMarketError("missing size line", lineno)
    rows, cols, nnz = dims
    if rows != cols:
        raise MatrixMarketError(f"adjacency matrix must be square, got {rows}x{cols}", lineno)
    if rows < 0 or nnz < 0:
        raise MatrixMarketError("negative dimension", lineno)

    edges = np.empty((nnz, 2), dtype=np.int64)
    k = 0
    for line in stream:
        lineno += 1
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != 2 + nvals:
            raise MatrixMarketError(f"expected {2 + nvals} fields, got {len(parts)}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MatrixMarketError(f"non-integer coordinates {s!r}", lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MatrixMarketError(f"entry ({i}, {j}) outside {rows}x{cols}", lineno)
        if k >= nnz:
            raise MatrixMarketError(f"more than the declared {nnz} entries", lineno)
        edges[k] = (i - 1, j - 1)
        k += 1
    if k != nnz:
        raise MatrixMarketError(f"declared {nnz} entries, found {k}", lineno)
    return EdgeList(rows, edges)


def read_matrix_market(path: str | os.PathLike) -> EdgeList:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return parse_matrix_market(fh)


def write_matrix_market(g: CsrGraph, path: str | os.PathLike, comment: str | None = None) -> None:
    """Write the lower triangle as ``pattern symmetric``, sorted by (row, col)."""
    src = g.edge_sources()
    dst = g.col_indices.astype(np.int64)
    lower = src > dst
    # Stored entries are (i, j) with i > j; sort by column-major of upper = row-major of lower.
    rows, cols = src[lower] + 1, dst[lower] + 1
    order = np.lexsort((cols, rows))
    buf = io.StringIO()
    buf.write("%%MatrixMarket matrix coordinate pattern symmetric\n")
    if comment:
        for ln in comment.splitlines():
            buf.write(f"% {ln}\n")
    buf.write(f"{g.num_vertices} {g.num_vertices} {rows.size}\n")
    body = np.column_stack([rows[order], cols[order]])
    np.savetxt(buf, body, fmt="%d")
    Path(path).write_text(buf.getvalue(), encoding="ascii")


# -- binary CSR cache ------------------------------------------------------
#
# Layout (little-endian):
#   bytes 0..3   magic b"PCSR"
#   u32          version (1)
#   u64          n
#   u64          m
#   u64[n+1]     row offsets
#   u32[m]       column indices   (version 1 requires n < 2**32)

CSR_MAGIC = b"PCSR"
CSR_VERSION = 1
_CSR_HEADER = struct.Struct("<4sIQQ")


def save_csr_binary(g: CsrGraph, path: str | os.PathLike) -> None:
    if g.num_vertices >= 2**32:
        raise GraphInputError("binary CSR v1 stores 32-bit column indices")
    with open(path, "wb") as fh:
        fh.write(_CSR_HEADER.pack(CSR_MAGIC, CSR_VERSION, g.num_vertices, g.num_edges))
        fh.write(g.row_offsets.astype("<u8").tobytes())
        fh.write(g.col_indices.astype("<u4").tobytes())


def load_csr_binary(path: str | os.PathLike, validate: bool = True) -> CsrGraph:
    with open(path, "rb") as fh:
        head = fh.read(_CSR_HEADER.size)
        if len(head) != _CSR_HEADER.size:
            raise GraphInputError(f"{path}: truncated CSR header")
        magic, version, n, m = _CSR_HEADER.unpack(head)
        if magic != CSR_MAGIC:
            raise GraphInputError(f"{path}: bad magic {magic!r}")
        if version != CSR_VERSION:
            raise GraphInputError(f"{path}: unsupported CSR version {version}")
        rb, cb = fh.read(8 * (n + 1)), fh.read(4 * m)
    if len(rb) != 8 * (n + 1) or len(cb) != 4 * m:
        raise GraphInputError(f"{path}: truncated CSR payload")
    r = np.frombuffer(rb, dtype="<u8")
    c = np.frombuffer(cb, dtype="<u4")
    g = CsrGraph(r.astype(np.int64), c.astype(_index_dtype(n)))
    if validate:
        check_csr(g)
    return g


def load_graph(path: str | os.PathLike) -> CsrGraph:
    """Load a ``.mtx`` file or a binary CSR cache (detected by magic bytes)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == CSR_MAGIC:
        return load_csr_binary(path)
    return build_csr(canonicalize(read_matrix_market(path)))


# -- R-MAT -----------------------------------------------------------------

def _rmat_draw(rng: np.random.Generator, count: int, scale: int, probs) -> tuple[np.ndarray, np.ndarray]:
    a, b, c, _ = probs
    u = np.zeros(count, dtype=np.int64)
    v = np.zeros(count, dtype=np.int64)
    ab, abc = a + b, a + b + c
    for level in range(scale):
        r = rng.random(count)
        bit = np.int64(1) << (scale - 1 - level)
        # quadrants: a=(0,0) b=(0,1) c=(1,0) d=(1,1)
        row = r >= ab
        col = ((r >= a) & (r < ab)) | (r >= abc)
        u += np.where(row, bit, 0)
        v += np.where(col, bit, 0)
    return u, v


def generate_rmat(p: RmatParams) -> EdgeList:
    """Sample distinct undirected non-loop edges by recursive quadrant descent.

    Duplicates and self-loops are rejected and redrawn until exactly
    ``p.num_undirected_edges`` distinct pairs exist. Edges are returned as
    (u, v) in acceptance order, one orientation each.
    """
    n = p.num_vertices
    target = p.num_undirected_edges
    if target > n * (n - 1) // 2:
        raise GraphInputError(f"{target} distinct edges do not fit in {n} vertices")
    rng = np.random.Generator(np.random.PCG64(p.seed))
    probs = (p.a, p.b, p.c, p.d)
    budget = 100 * max(target, 1)
    drawn = 0
    keys = np.empty(0, dtype=np.int64)  # accepted canonical keys, acceptance order
    pu = np.empty(0, dtype=np.int64)
    pv = np.empty(0, dtype=np.int64)
    while keys.size < target:
        want = target - keys.size
        batch = min(budget - drawn, max(1024, int(want * 1.1)))
        if batch <= 0:
            raise GraphInputError(
                f"R-MAT sampling exhausted {budget} draws with {keys.size}/{target} distinct edges"
            )
        u, v = _rmat_draw(rng, batch, p.scale, probs)
        drawn += batch
        ok = u != v
        u, v = u[ok], v[ok]
        k = np.minimum(u, v) * n + np.maximum(u, v)
        allk = np.concatenate([keys, k])
        _, first = np.unique(allk, return_index=True)
        first.sort()
        fresh = first[first >= keys.size] - keys.size
        fresh = fresh[:want]
        keys = np.concatenate([keys, k[fresh]])
        pu = np.concatenate([pu, u[fresh]])
        pv = np.concatenate([pv, v[fresh]])
    return EdgeList(n, np.column_stack([pu, pv]))


def rmat_graph(a: float, b: float, c: float, d: float, scale: int, avg_degree: float, seed: int = 0) -> CsrGraph:
    """Convenience: R-MAT graph with ``2**scale`` vertices and mean degree ``avg_degree``."""
    n = 1 << scale
    params = RmatParams(a, b, c, d, n, int(round(avg_degree * n / 2)), seed)
    return build_csr(canonicalize(generate_rmat(params)))
