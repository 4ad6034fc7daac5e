import json

import numpy as np
import pytest

from parcolor import harness
from parcolor.graph import write_matrix_market
from parcolor.greedy import color_sequential
from parcolor.harness import (
    REPORT_FIELDS,
    BenchCell,
    GraphSource,
    Violation,
    count_colors,
    emit_report,
    load_manifest,
    read_coloring,
    run_benchmark,
    verify_coloring,
    write_coloring,
)

import oracles
from corpus import complete, cycle, from_pairs, random_graph


# -- verification -----------------------------------------------------------------------

def test_verify_triangle_ok():
    assert verify_coloring(complete(3), np.array([1, 2, 3])) == []


def test_verify_edge_conflict():
    g = from_pairs(2, [(0, 1)])
    assert verify_coloring(g, np.array([2, 2])) == [Violation(0, 1, 2)]


def test_verify_uncolored_reported():
    g = from_pairs(3, [(0, 1)])
    assert verify_coloring(g, np.array([1, 2, 0])) == [Violation(2, 2, 0)]


def test_verify_length_mismatch():
    with pytest.raises(ValueError):
        verify_coloring(complete(3), np.array([1, 2]))


def test_verify_matches_brute_force(rng):
    for _ in range(300):
        n = int(rng.integers(1, 9))
        g = random_graph(rng, n, float(rng.uniform(0, 1)))
        colors = rng.integers(0, 4, size=n)
        got = [(x.v, x.w, x.color) for x in verify_coloring(g, colors)]
        assert got == oracles.brute_violations(g, colors)


def test_count_colors():
    assert count_colors(np.array([1, 2, 1, 3])) == 3
    assert count_colors(np.zeros(4, dtype=np.int32)) == 0
    assert count_colors(np.array([], dtype=np.int32)) == 0
    assert count_colors(color_sequential(cycle(5))) == 3


def test_greedy_colors_have_no_gaps(rng):
    for _ in range(20):
        g = random_graph(rng, 80, 0.1)
        c = color_sequential(g, order=rng.permutation(80))
        assert np.unique(c).size == count_colors(c)


# -- benchmark orchestration ---------------------------------------------------------------

def _fake(colors_fn, phases):
    calls = []

    def run(g, opts):
        calls.append(opts)
        return colors_fn(g, len(calls)), 2, dict(phases)

    return run, calls


def test_run_benchmark_matrix_and_mean(monkeypatch):
    algo, calls = _fake(lambda g, k: color_sequential(g), {"first_fit": 30, "conflict": 9, "compact": 3})
    monkeypatch.setitem(harness.ALGORITHMS, "fake", algo)
    src = GraphSource("c5", rmat=None, path=None)
    g = cycle(5)
    monkeypatch.setattr(GraphSource, "load", lambda self: g)
    reports = run_benchmark([BenchCell(src, "fake"), BenchCell(src, "serial")], repetitions=3)
    assert len(reports) == 2
    assert len(calls) == 3 + 1  # warm-up included
    r = reports[0]
    assert r.valid and r.repetitions == 3 and r.num_colors == 3 and r.iterations == 2
    assert (r.time_first_fit_ns, r.time_conflict_ns, r.time_compact_ns) == (30, 9, 3)
    assert r.n == 5 and r.m == 10 and r.avg_degree == 2.0
    assert reports[1].valid and reports[1].num_colors == 3


def test_invalid_coloring_fails_cell_and_run_continues(monkeypatch):
    # valid on the warm-up, invalid on a later repetition
    algo, _ = _fake(lambda g, k: np.ones(g.num_vertices, dtype=np.int32) if k == 3 else color_sequential(g), {})
    monkeypatch.setitem(harness.ALGORITHMS, "flaky", algo)
    src = GraphSource("k3")
    monkeypatch.setattr(GraphSource, "load", lambda self: complete(3))
    reports = run_benchmark([BenchCell(src, "flaky"), BenchCell(src, "serial")], repetitions=4)
    assert not reports[0].valid and "verify" in reports[0].error
    assert reports[1].valid


def test_exception_and_missing_file_fail_cells(tmp_path, monkeypatch):
    def boom(g, opts):
        raise RuntimeError("kaput")

    monkeypatch.setitem(harness.ALGORITHMS, "boom", boom)
    p = tmp_path / "k4.mtx"
    write_matrix_market(complete(4), p)
    good, missing = GraphSource("k4", path=str(p)), GraphSource("x", path=str(tmp_path / "none.mtx"))
    reports = run_benchmark(
        [BenchCell(good, "boom"), BenchCell(missing, "serial"), BenchCell(good, "nope"), BenchCell(good, "jp")],
        repetitions=1,
    )
    assert [r.valid for r in reports] == [False, False, False, True]
    assert "kaput" in reports[0].error
    assert reports[1].error.startswith("load")
    assert "unknown algorithm" in reports[2].error


def test_rmat_er_multihash_uses_most_colors():
    src = GraphSource("rmat-er", rmat={"probs": [0.25] * 4, "scale": 14, "avg_degree": 10, "seed": 1})
    cells = [BenchCell(src, a, {"workers": 1}) for a in ("serial", "data", "jp", "multihash")]
    reports = run_benchmark(cells, repetitions=1)
    assert all(r.valid for r in reports)
    counts = {r.algorithm: r.num_colors for r in reports}
    others = [v for k, v in counts.items() if k != "multihash"]
    assert counts["multihash"] > max(others)


def test_repetitions_must_be_positive():
    with pytest.raises(ValueError):
        run_benchmark([], repetitions=0)


def test_load_manifest(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({
        "repetitions": 4,
        "graphs": [{"name": "a", "path": "a.mtx"}, {"name": "r", "rmat": {"probs": [0.25] * 4, "scale": 5, "avg_degree": 4}}],
        "algorithms": [{"algo": "serial"}, {"algo": "data", "policy": "degree", "workers": 2}],
    }))
    cells, reps = load_manifest(tmp_path / "m.json")
    assert reps == 4 and len(cells) == 4
    assert cells[0].graph.path == str(tmp_path / "a.mtx")
    assert cells[1].options == {"policy": "degree", "workers": 2}
    assert cells[2].graph.load().num_vertices == 32


# -- reports -----------------------------------------------------------------------------------

def _reports():
    return [harness._blank_report(BenchCell(GraphSource("c5"), "serial"), 1, {"workers": 1, "seed": 0})]


def test_csv_empty_is_header_only():
    out = emit_report([], "csv").decode()
    assert out == ",".join(REPORT_FIELDS) + "\n"


def test_jsonl_one_line_all_fields():
    (rep,) = _reports()
    rep.avg_degree = 1 / 3
    lines = emit_report([rep], "jsonl").decode().splitlines()
    assert len(lines) == 1
    rec = json.loads(lines[0])
    assert list(rec) == ["schema_version"] + REPORT_FIELDS
    assert rec["avg_degree"] == 0.333333


def test_csv_fixed_precision_and_order():
    (rep,) = _reports()
    rep.degree_variance = 2 / 3
    text = emit_report([rep], "csv").decode().splitlines()
    assert text[0].split(",") == REPORT_FIELDS
    assert text[1].endswith(",0.000000,0.666667")


def test_emit_is_deterministic():
    reps = _reports() * 3
    assert emit_report(reps, "csv") == emit_report(reps, "csv")
    assert emit_report(reps, "jsonl") == emit_report(reps, "jsonl")


def test_emit_unknown_format():
    with pytest.raises(ValueError):
        emit_report([], "xml")


def test_write_report_error_has_path(tmp_path):
    bad = tmp_path / "missing-dir" / "r.csv"
    with pytest.raises(OSError, match="missing-dir"):
        harness.write_report([], bad)


# -- coloring files ------------------------------------------------------------------------------

def test_coloring_file_round_trip(tmp_path):
    p = tmp_path / "c.txt"
    write_coloring(np.array([1, 2, 3], dtype=np.int32), p, algorithm="serial")
    assert p.read_text() == "# parcolor coloring n=3 algorithm=serial\n1\n2\n3\n"
    assert read_coloring(p).tolist() == [1, 2, 3]


def test_coloring_file_rejects_bad_content(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# parcolor coloring n=3\n1\n2\n")
    with pytest.raises(ValueError, match="n=3"):
        read_coloring(p)
    p.write_text("1\nx\n")
    with pytest.raises(ValueError, match=":2:"):
        read_coloring(p)
