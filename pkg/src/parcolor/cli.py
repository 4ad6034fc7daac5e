"""``parcolor`` command-line frontend.

Exit status: 0 on success, 1 when a coloring fails verification or a bench
cell fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from . import _backend
from .graph import (
    GraphInputError,
    degree_stats,
    load_graph,
    rmat_graph,
    save_csr_binary,
    write_matrix_market,
)
from .harness import (
    ALGORITHMS,
    count_colors,
    emit_report,
    load_manifest,
    read_coloring,
    run_benchmark,
    verify_coloring,
    write_coloring,
)
from .speculative import Balance, NonConvergenceError, Policy

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _probs(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated probabilities a,b,c,d")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a probability list: {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parcolor", description="Parallel graph vertex coloring.")
    p.add_argument("--backend", choices=("numba", "numpy"), help="kernel backend (default: $PARCOLOR_BACKEND or numba)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("generate", help="write an R-MAT graph as Matrix Market")
    g.add_argument("--rmat", type=_probs, required=True, metavar="A,B,C,D", help="quadrant probabilities")
    g.add_argument("--scale", type=_positive, required=True, help="log2 of the vertex count")
    g.add_argument("--avg-degree", type=float, required=True, help="target mean degree")
    g.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    g.add_argument("--out", required=True, help="output .mtx path")
    g.add_argument("--csr-cache", metavar="PATH", help="also write the binary CSR cache here")

    c = sub.add_parser("color", help="color a graph and write one color per vertex")
    c.add_argument("graph", help="Matrix Market file or binary CSR cache")
    c.add_argument("--algo", choices=sorted(ALGORITHMS), default="data", help="algorithm (default data)")
    c.add_argument("--policy", choices=[x.value for x in Policy], default=Policy.BASELINE_ID.value,
                   help="conflict loser rule for topo/data (default baseline)")
    c.add_argument("--seed", type=int, default=0, help="hash seed for jp/multihash (default 0)")
    c.add_argument("--workers", type=_positive, default=None, help="worker threads (default: all available)")
    c.add_argument("--coarsening", type=_positive, default=128, help="vertices per chunk (default 128)")
    c.add_argument("--balance", choices=[x.value for x in Balance], default=Balance.UNIFORM.value,
                   help="chunking mode (default uniform)")
    c.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True,
                   help="read colors from the last barrier so results ignore scheduling")
    c.add_argument("--kernel", choices=("bitset", "mask"), default="bitset", help="first-fit kernel (default bitset)")
    c.add_argument("--hashes", type=_positive, default=2, help="hash functions per multihash round (default 2)")
    c.add_argument("--max-iterations", type=_positive, default=None, help="iteration cap (default n+1)")
    c.add_argument("--out", required=True, help="output coloring path")

    v = sub.add_parser("verify", help="check a coloring file against a graph")
    v.add_argument("graph", help="Matrix Market file or binary CSR cache")
    v.add_argument("coloring", help="coloring file written by 'color'")
    v.add_argument("--limit", type=int, default=20, help="max violations to list (default 20, 0 = all)")

    s = sub.add_parser("stats", help="print vertex, edge and degree statistics")
    s.add_argument("graph", help="Matrix Market file or binary CSR cache")

    b = sub.add_parser("bench", help="run a benchmark manifest and emit reports")
    b.add_argument("manifest", help="JSON manifest (see README)")
    b.add_argument("--format", choices=("csv", "jsonl"), default="csv", help="report format (default csv)")
    b.add_argument("--out", default=None, help="report path (default stdout)")
    b.add_argument("--reps", type=_positive, default=None, help="override the manifest repetition count")
    return p


def _load(path: str):
    try:
        return load_graph(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    except ValueError as exc:  # GraphInputError, MatrixMarketError
        raise UsageError(f"{path}: {exc}") from None


def cmd_generate(args) -> int:
    a, b, c, d = args.rmat
    try:
        g = rmat_graph(a, b, c, d, scale=args.scale, avg_degree=args.avg_degree, seed=args.seed)
    except GraphInputError as exc:
        raise UsageError(str(exc)) from None
    try:
        write_matrix_market(
            g, args.out,
            comment=f"rmat a={a} b={b} c={c} d={d} scale={args.scale} avg_degree={args.avg_degree} seed={args.seed}",
        )
        if args.csr_cache:
            save_csr_binary(g, args.csr_cache)
    except OSError as exc:
        print(f"parcolor: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"n={g.num_vertices} edges={g.num_edges // 2}")
    return EXIT_OK


def _color_options(args) -> dict:
    opts = {"seed": args.seed, "workers": args.workers or _backend.max_workers()}
    if args.algo in ("data", "topo"):
        opts.update(policy=args.policy, coarsening=args.coarsening, balance=args.balance,
                    deterministic=args.deterministic, kernel=args.kernel,
                    max_iterations=args.max_iterations)
    elif args.algo == "serial":
        opts["kernel"] = args.kernel
    elif args.algo == "multihash":
        opts["hashes"] = args.hashes
    return opts


def cmd_color(args) -> int:
    g = _load(args.graph)
    t0 = time.perf_counter_ns()
    try:
        colors, iterations, _ = ALGORITHMS[args.algo](g, _color_options(args))
    except NonConvergenceError as exc:
        print(f"parcolor: {exc}", file=sys.stderr)
        return EXIT_FAIL
    elapsed = time.perf_counter_ns() - t0
    try:
        write_coloring(colors, args.out, algorithm=args.algo)
    except OSError as exc:
        print(f"parcolor: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    bad = verify_coloring(g, colors)
    print(f"num_colors={count_colors(colors)} iterations={iterations} time_ns={elapsed} valid={not bad}")
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_verify(args) -> int:
    g = _load(args.graph)
    try:
        colors = read_coloring(args.coloring)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    try:
        bad = verify_coloring(g, colors)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not bad:
        print("OK")
        return EXIT_OK
    shown = bad if args.limit <= 0 else bad[: args.limit]
    for x in shown:
        if x.v == x.w:
            print(f"uncolored {x.v}")
        else:
            print(f"conflict {x.v} {x.w} color={x.color}")
    if len(shown) < len(bad):
        print(f"... {len(bad) - len(shown)} more")
    print(f"{len(bad)} violations", file=sys.stderr)
    return EXIT_FAIL


def cmd_stats(args) -> int:
    g = _load(args.graph)
    print(f"n={g.num_vertices}")
    print(f"m={g.num_edges}")
    if g.num_vertices:
        st = degree_stats(g)
        print(f"min_degree={st.min_degree}")
        print(f"max_degree={st.max_degree}")
        print(f"avg_degree={st.avg_degree:.6f}")
        print(f"degree_variance={st.degree_variance:.6f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        cells, reps = load_manifest(args.manifest)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.manifest}: bad manifest: {exc}") from None
    reports = run_benchmark(cells, args.reps or reps)
    data = emit_report(reports, args.format)
    if args.out:
        try:
            with open(args.out, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            print(f"parcolor: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_FAIL
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK if all(r.valid for r in reports) else EXIT_FAIL


COMMANDS = {
    "generate": cmd_generate,
    "color": cmd_color,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.backend:
        _backend.set_backend(args.backend)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"parcolor {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
