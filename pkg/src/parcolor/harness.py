"""Verification, benchmark orchestration and report serialization."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np

from . import _backend
from .graph import CsrGraph, DegreeStats, degree_stats, load_graph, rmat_graph
from .greedy import color_sequential
from .independent_set import MultiHashConfig, jp_color, multihash_color
from .speculative import SpecConfig, color_data_driven, color_topology_driven

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
DEFAULT_REPETITIONS = 10


@dataclass(frozen=True, order=True)
class Violation:
    """An edge (v < w) whose endpoints share ``color``; ``v == w`` with
    ``color == 0`` marks an uncolored vertex."""

    v: int
    w: int
    color: int


def verify_coloring(g: CsrGraph, colors) -> list[Violation]:
    """All violations of a complete proper coloring; empty list means OK."""
    colors = np.asarray(colors)
    if colors.shape != (g.num_vertices,):
        raise ValueError(
            f"coloring has {colors.size} entries, graph has {g.num_vertices} vertices"
        )
    src = g.edge_sources()
    dst = g.col_indices.astype(np.int64)
    bad = (src < dst) & (colors[src] == colors[dst]) & (colors[src] != 0)
    out = [Violation(int(v), int(v), 0) for v in np.flatnonzero(colors <= 0)]
    out += [Violation(int(a), int(b), int(colors[a])) for a, b in zip(src[bad], dst[bad])]
    out.sort()
    return out


def count_colors(colors) -> int:
    colors = np.asarray(colors)
    return int(colors.max()) if colors.size else 0


# -- algorithm registry ---------------------------------------------------------
#
# Each entry takes (graph, options) and returns (colors, iterations, phase_ns).

def _run_serial(g, opts):
    t0 = time.perf_counter_ns()
    colors = color_sequential(g, kernel=opts.get("kernel", "bitset"))
    return colors, 1, {"first_fit": time.perf_counter_ns() - t0}


def _spec_cfg(opts) -> SpecConfig:
    keys = ("policy", "coarsening", "balance", "workers", "deterministic", "max_iterations", "kernel")
    return SpecConfig(**{k: opts[k] for k in keys if k in opts and opts[k] is not None})


def _run_data(g, opts):
    colors, trace = color_data_driven(g, _spec_cfg(opts))
    return colors, trace.iterations, dict(trace.phase_ns)


def _run_topo(g, opts):
    colors, trace = color_topology_driven(g, _spec_cfg(opts))
    return colors, trace.iterations, dict(trace.phase_ns)


def _run_jp(g, opts):
    colors, trace = jp_color(g, seed=opts.get("seed", 0), workers=opts.get("workers", 1))
    return colors, trace.iterations, {}


def _run_multihash(g, opts):
    cfg = MultiHashConfig(
        num_hashes=opts.get("hashes", 2), seed=opts.get("seed", 0), workers=opts.get("workers", 1)
    )
    colors, trace = multihash_color(g, cfg)
    return colors, trace.iterations, {}


ALGORITHMS: dict[str, Callable[[CsrGraph, dict], tuple[np.ndarray, int, dict]]] = {
    "serial": _run_serial,
    "topo": _run_topo,
    "data": _run_data,
    "jp": _run_jp,
    "multihash": _run_multihash,
}


# -- benchmark ------------------------------------------------------------------

@dataclass(frozen=True)
class GraphSource:
    """A Matrix Market / binary CSR path, or R-MAT parameters to generate from."""

    name: str
    path: str | None = None
    rmat: dict | None = None

    @property
    def key(self) -> tuple:
        return (self.name, self.path, json.dumps(self.rmat, sort_keys=True))

    def load(self) -> CsrGraph:
        if self.path is not None:
            return load_graph(self.path)
        if self.rmat is not None:
            p = dict(self.rmat)
            a, b, c, d = p.pop("probs", (0.25, 0.25, 0.25, 0.25))
            return rmat_graph(a, b, c, d, **p)
        raise ValueError(f"graph source {self.name!r} has neither path nor rmat")


@dataclass(frozen=True)
class BenchCell:
    graph: GraphSource
    algorithm: str
    options: dict = field(default_factory=dict)


@dataclass
class RunReport:
    graph: str
    algorithm: str
    config: str  # canonical JSON of the options
    seed: int
    workers: int
    repetitions: int
    valid: bool
    error: str
    num_colors: int
    iterations: int
    time_total_ns: int
    time_first_fit_ns: int
    time_conflict_ns: int
    time_compact_ns: int
    n: int
    m: int
    min_degree: int
    max_degree: int
    avg_degree: float
    degree_variance: float


REPORT_FIELDS = [f for f in RunReport.__dataclass_fields__]
_FLOAT_FIELDS = {"avg_degree", "degree_variance"}
FLOAT_PRECISION = 6


def _blank_report(cell: BenchCell, reps: int, opts: dict) -> RunReport:
    return RunReport(
        graph=cell.graph.name,
        algorithm=cell.algorithm,
        config=json.dumps(opts, sort_keys=True),
        seed=int(opts.get("seed", 0)),
        workers=int(opts.get("workers", 1)),
        repetitions=reps,
        valid=False,
        error="",
        num_colors=0,
        iterations=0,
        time_total_ns=0,
        time_first_fit_ns=0,
        time_conflict_ns=0,
        time_compact_ns=0,
        n=0,
        m=0,
        min_degree=0,
        max_degree=0,
        avg_degree=0.0,
        degree_variance=0.0,
    )


def run_cell(
    cell: BenchCell, repetitions: int, graph: CsrGraph | None = None, warmup: bool = True
) -> RunReport:
    """Run one cell ``repetitions`` times; times are means of computation only.

    With ``warmup`` an extra untimed run first pays any JIT compilation cost.
    """
    opts = {"workers": _backend.max_workers(), **cell.options}
    rep = _blank_report(cell, repetitions, opts)
    try:
        g = graph if graph is not None else cell.graph.load()
    except Exception as exc:  # noqa: BLE001 - any load failure fails the cell
        rep.error = f"load: {type(exc).__name__}: {exc}"
        return rep
    if g.num_vertices:
        st: DegreeStats = degree_stats(g)
        rep.min_degree, rep.max_degree = st.min_degree, st.max_degree
        rep.avg_degree, rep.degree_variance = st.avg_degree, st.degree_variance
    rep.n, rep.m = g.num_vertices, g.num_edges
    algo = ALGORITHMS.get(cell.algorithm)
    if algo is None:
        rep.error = f"unknown algorithm {cell.algorithm!r}"
        return rep
    totals = {"first_fit": 0, "conflict": 0, "compact": 0}
    wall = 0
    try:
        if warmup:
            algo(g, opts)
        for _ in range(repetitions):
            t0 = time.perf_counter_ns()
            colors, iterations, phases = algo(g, opts)
            wall += time.perf_counter_ns() - t0
            bad = verify_coloring(g, colors)
            if bad:
                rep.error = f"verify: {len(bad)} violations, first {bad[0]}"
                return rep
            for k in totals:
                totals[k] += phases.get(k, 0)
    except Exception as exc:  # noqa: BLE001
        rep.error = f"run: {type(exc).__name__}: {exc}"
        return rep
    rep.valid = True
    rep.num_colors = count_colors(colors)
    rep.iterations = int(iterations)
    rep.time_total_ns = wall // repetitions
    rep.time_first_fit_ns = totals["first_fit"] // repetitions
    rep.time_conflict_ns = totals["conflict"] // repetitions
    rep.time_compact_ns = totals["compact"] // repetitions
    return rep


def run_benchmark(
    matrix: Iterable[BenchCell], repetitions: int = DEFAULT_REPETITIONS, warmup: bool = True
) -> list[RunReport]:
    """Run cells one at a time; each source is loaded once and excluded from timing."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    cache: dict[tuple, CsrGraph | Exception] = {}
    reports = []
    for cell in matrix:
        key = cell.graph.key
        if key not in cache:
            try:
                cache[key] = cell.graph.load()
            except Exception as exc:  # noqa: BLE001
                cache[key] = exc
        loaded = cache[key]
        if isinstance(loaded, Exception):
            rep = _blank_report(cell, repetitions, {"workers": _backend.max_workers(), **cell.options})
            rep.error = f"load: {type(loaded).__name__}: {loaded}"
        else:
            rep = run_cell(cell, repetitions, graph=loaded, warmup=warmup)
        if not rep.valid:
            log.warning("cell %s/%s failed: %s", rep.graph, rep.algorithm, rep.error)
        reports.append(rep)
    return reports


# -- manifests --------------------------------------------------------------------

def load_manifest(path: str | os.PathLike) -> tuple[list[BenchCell], int]:
    """Parse a JSON bench manifest into (cells, repetitions); see README for the schema."""
    base = Path(path).parent
    doc = json.loads(Path(path).read_text())
    reps = int(doc.get("repetitions", DEFAULT_REPETITIONS))
    graphs = []
    for entry in doc["graphs"]:
        p = entry.get("path")
        if p is not None and not os.path.isabs(p):
            p = str(base / p)
        graphs.append(GraphSource(name=entry.get("name", p or "rmat"), path=p, rmat=entry.get("rmat")))
    cells = []
    for gsrc in graphs:
        for algo in doc["algorithms"]:
            opts = dict(algo)
            name = opts.pop("algo")
            cells.append(BenchCell(gsrc, name, opts))
    return cells, reps


# -- reports -------------------------------------------------------------------------

def _row(rep: RunReport) -> dict[str, Any]:
    d = asdict(rep)
    for k in _FLOAT_FIELDS:
        d[k] = f"{d[k]:.{FLOAT_PRECISION}f}"
    return d


def emit_report(reports: Iterable[RunReport], fmt: str = "csv") -> bytes:
    """Serialize reports; field order is ``REPORT_FIELDS``."""
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            w.writerow(_row(rep))
    elif fmt in ("jsonl", "json"):
        for rep in reports:
            d = _row(rep)
            for k in _FLOAT_FIELDS:
                d[k] = float(d[k])
            d = {"schema_version": REPORT_SCHEMA_VERSION, **d}
            buf.write(json.dumps(d, separators=(",", ":")) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return buf.getvalue().encode("utf-8")


def write_report(reports, path: str | os.PathLike, fmt: str = "csv") -> None:
    data = emit_report(reports, fmt)
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


# -- coloring files ----------------------------------------------------------------

def write_coloring(colors, path: str | os.PathLike, algorithm: str = "") -> None:
    colors = np.asarray(colors)
    head = f"# parcolor coloring n={colors.size}"
    if algorithm:
        head += f" algorithm={algorithm}"
    body = "\n".join(map(str, colors.tolist()))
    Path(path).write_text(head + "\n" + body + ("\n" if colors.size else ""), encoding="ascii")


def read_coloring(path: str | os.PathLike) -> np.ndarray:
    vals = []
    declared = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            for tok in s[1:].split():
                if tok.startswith("n="):
                    declared = int(tok[2:])
            continue
        try:
            vals.append(int(s))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not an integer color: {s!r}") from None
    if declared is not None and declared != len(vals):
        raise ValueError(f"{path}: header declares n={declared}, file has {len(vals)} colors")
    return np.asarray(vals, dtype=np.int32)
