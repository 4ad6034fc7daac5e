import json
import subprocess
import sys

import numpy as np
import pytest

from parcolor.cli import main
from parcolor.graph import load_graph, write_matrix_market
from parcolor.harness import read_coloring

from corpus import complete, from_pairs


@pytest.fixture
def k3(tmp_path):
    p = tmp_path / "k3.mtx"
    write_matrix_market(complete(3), p)
    return p


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_writes_scale(tmp_path, capsys):
    out = tmp_path / "er.mtx"
    code, _, _ = _run(capsys, "generate", "--rmat", "0.25,0.25,0.25,0.25", "--scale", 16,
                      "--avg-degree", 10, "--seed", 1, "--out", out)
    assert code == 0
    g = load_graph(out)
    assert g.num_vertices == 2**16
    assert g.num_edges == 2 * 10 * 2**16 // 2


def test_generate_deterministic_and_cache(tmp_path, capsys):
    a, b, cache = tmp_path / "a.mtx", tmp_path / "b.mtx", tmp_path / "a.csr"
    args = ["generate", "--rmat", "0.45,0.15,0.15,0.25", "--scale", 10, "--avg-degree", 8, "--seed", 3]
    assert _run(capsys, *args, "--out", a, "--csr-cache", cache)[0] == 0
    assert _run(capsys, *args, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert np.array_equal(load_graph(cache).col_indices, load_graph(a).col_indices)


@pytest.mark.parametrize(
    "bad",
    [
        ["--scale", "0", "--rmat", "0.25,0.25,0.25,0.25"],
        ["--scale", "4", "--rmat", "0.25,0.25,0.25"],
        ["--scale", "4", "--rmat", "0.9,0.25,0.25,0.25"],
    ],
)
def test_generate_usage_errors(tmp_path, capsys, bad):
    with pytest.raises(SystemExit) as ei:
        code = main(["generate", *bad, "--avg-degree", "4", "--out", str(tmp_path / "x.mtx")])
        raise SystemExit(code)
    assert ei.value.code == 2


def test_generate_unwritable(tmp_path, capsys):
    code, _, err = _run(capsys, "generate", "--rmat", "0.25,0.25,0.25,0.25", "--scale", 4,
                        "--avg-degree", 2, "--out", tmp_path / "nodir" / "x.mtx")
    assert code == 1 and "cannot write" in err


def test_unknown_flag_rejected(k3):
    with pytest.raises(SystemExit) as ei:
        main(["color", str(k3), "--out", "x", "--bogus"])
    assert ei.value.code == 2


def test_missing_required_flag(k3):
    with pytest.raises(SystemExit) as ei:
        main(["color", str(k3)])
    assert ei.value.code == 2


def test_color_serial_triangle(tmp_path, capsys, k3):
    out = tmp_path / "c.txt"
    code, stdout, _ = _run(capsys, "color", k3, "--algo", "serial", "--out", out)
    assert code == 0
    assert out.read_text().splitlines() == ["# parcolor coloring n=3 algorithm=serial", "1", "2", "3"]
    assert "num_colors=3" in stdout and "valid=True" in stdout


def test_color_deterministic_repeatable(tmp_path, capsys):
    g = tmp_path / "g.mtx"
    _run(capsys, "generate", "--rmat", "0.45,0.15,0.15,0.25", "--scale", 11, "--avg-degree", 10, "--out", g)
    outs = []
    for i, workers in enumerate((1, 2, 1)):
        out = tmp_path / f"c{i}.txt"
        code, _, _ = _run(capsys, "color", g, "--algo", "data", "--policy", "degree", "--deterministic",
                          "--seed", 7, "--workers", workers, "--out", out)
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_color_multihash_k2(tmp_path, capsys):
    p = tmp_path / "k2.mtx"
    write_matrix_market(from_pairs(2, [(0, 1)]), p)
    out = tmp_path / "c.txt"
    code, stdout, _ = _run(capsys, "color", p, "--algo", "multihash", "--hashes", 2, "--out", out)
    assert code == 0
    assert sorted(read_coloring(out).tolist()) == [1, 2]


@pytest.mark.parametrize("algo", ["serial", "topo", "data", "jp", "multihash"])
def test_color_every_algorithm(tmp_path, capsys, k3, algo):
    code, stdout, _ = _run(capsys, "color", k3, "--algo", algo, "--no-deterministic", "--workers", 2,
                           "--balance", "edge", "--kernel", "mask", "--out", tmp_path / "c.txt")
    assert code == 0 and "valid=True" in stdout


def test_color_non_convergence(tmp_path, capsys, k3):
    code, _, err = _run(capsys, "color", k3, "--algo", "data", "--max-iterations", 1, "--out", tmp_path / "c.txt")
    assert code == 1 and "iterations" in err


def test_color_bad_graph(tmp_path, capsys):
    p = tmp_path / "bad.mtx"
    p.write_text("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 1\n5 1\n")
    code, _, err = _run(capsys, "color", p, "--out", tmp_path / "c.txt")
    assert code == 2 and "line 3" in err
    code, _, err = _run(capsys, "color", tmp_path / "none.mtx", "--out", tmp_path / "c.txt")
    assert code == 2 and "no such file" in err


def test_verify_ok_tampered_and_mismatch(tmp_path, capsys, k3):
    out = tmp_path / "c.txt"
    _run(capsys, "color", k3, "--algo", "serial", "--out", out)
    code, stdout, _ = _run(capsys, "verify", k3, out)
    assert code == 0 and stdout.strip() == "OK"
    out.write_text("# parcolor coloring n=3\n1\n1\n3\n")
    code, stdout, _ = _run(capsys, "verify", k3, out)
    assert code == 1 and "conflict 0 1 color=1" in stdout
    out.write_text("# parcolor coloring n=2\n1\n2\n")
    code, _, err = _run(capsys, "verify", k3, out)
    assert code == 2 and "2 entries" in err


def test_verify_limit(tmp_path, capsys):
    p = tmp_path / "k5.mtx"
    write_matrix_market(complete(5), p)
    c = tmp_path / "c.txt"
    c.write_text("1\n1\n1\n1\n1\n")
    code, stdout, _ = _run(capsys, "verify", p, c, "--limit", 3)
    assert code == 1
    lines = stdout.splitlines()
    assert len(lines) == 4 and lines[-1] == "... 7 more"


def test_stats(capsys, k3):
    code, stdout, _ = _run(capsys, "stats", k3)
    assert code == 0
    assert stdout.splitlines() == [
        "n=3", "m=6", "min_degree=2", "max_degree=2", "avg_degree=2.000000", "degree_variance=0.000000",
    ]


def _manifest(tmp_path, graphs, reps=2):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"repetitions": reps, "graphs": graphs, "algorithms": [{"algo": "serial"}]}))
    return m


def test_bench_one_record(tmp_path, capsys, k3):
    m = _manifest(tmp_path, [{"name": "k3", "path": str(k3)}])
    code, stdout, _ = _run(capsys, "bench", m, "--format", "jsonl")
    assert code == 0
    (line,) = stdout.splitlines()
    rec = json.loads(line)
    assert rec["valid"] and rec["num_colors"] == 3 and rec["repetitions"] == 2


def test_bench_missing_file_fails(tmp_path, capsys, k3):
    m = _manifest(tmp_path, [{"name": "k3", "path": str(k3)}, {"name": "gone", "path": "gone.mtx"}])
    out = tmp_path / "r.csv"
    code, _, _ = _run(capsys, "bench", m, "--out", out, "--reps", 1)
    assert code == 1
    rows = out.read_text().splitlines()
    assert len(rows) == 3 and ",False,load:" in rows[2]


def test_bench_reps_recorded(tmp_path, capsys, k3):
    m = _manifest(tmp_path, [{"name": "k3", "path": str(k3)}], reps=10)
    code, stdout, _ = _run(capsys, "bench", m, "--format", "jsonl")
    assert json.loads(stdout)["repetitions"] == 10


def test_bench_bad_manifest(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text("{not json")
    code, _, err = _run(capsys, "bench", m)
    assert code == 2 and "bad manifest" in err


def test_backend_flag(tmp_path, capsys, k3):
    from parcolor import _backend

    prev = _backend.get_backend()
    try:
        code, stdout, _ = _run(capsys, "--backend", "numpy", "color", k3, "--algo", "data", "--out", tmp_path / "c.txt")
        assert code == 0 and _backend.get_backend() == "numpy"
    finally:
        _backend.set_backend(prev)


def test_console_script(tmp_path, k3):
    out = tmp_path / "c.txt"
    proc = subprocess.run(
        [sys.executable, "-m", "parcolor.cli", "color", str(k3), "--algo", "jp", "--out", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert read_coloring(out).max() == 3
