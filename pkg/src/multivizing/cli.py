"""Command-line entry points: ``color``, ``verify`` and ``bench``.

Exit codes: 0 success, 1 I/O error, 2 malformed input, 3 verification
failure (including runs that cannot finish a total coloring).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .distributed import (
    PhaseCapExceeded,
    SimConfig,
    SimulationStalled,
    simulate_coloring,
    verify_output,
)
from .generators import gnp_capped
from .graph_core import Graph, GraphError, PartialColoring, parse_edge_list
from .msva import MsvaExhausted, color_with_msva

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_VERIFY = 0, 1, 2, 3
BENCH_VERSION = "multivizing-bench v1"
BENCH_FIELDS = ["n", "delta", "seed", "mode", "m", "max_degree", "ok", "phases", "lucky_fraction",
                "mean_chain_length", "max_chain_length", "fallbacks", "rounds_total"]


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("distributed", "sequential"), default="distributed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ell", type=int, default=None, help="truncation window (default from n and delta)")
    p.add_argument("--steps-T", dest="steps", type=int, default=None, help="step cap per attempt")
    p.add_argument("--epsilon", type=float, default=1 / 16, help="step-cap factor on ln n")
    p.add_argument("--mis", choices=("luby", "greedy"), default="luby")
    p.add_argument("--max-retries", type=int, default=32, help="sequential mode only")
    p.add_argument("--fallback", choices=("on", "off"), default="on")
    p.add_argument("--rounds", choices=("bound", "observed"), default="bound",
                   help="round charge per phase: length bound or longest chain grown")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multivizing", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("color", help="edge-color a graph with delta+1 colors")
    c.add_argument("--input", required=True, help="edge-list file")
    c.add_argument("--output", help="coloring file (default: stdout)")
    c.add_argument("--summary", help="JSON summary path (default: stderr)")
    c.add_argument("--trace", metavar="PATH", help="write msva attempt traces as JSON lines")
    c.add_argument("--stats-out", metavar="PATH",
                   help="per-phase stats as JSON lines, then the round ledger")
    c.add_argument("--timing", action="store_true", help="include wall time in stats")
    _add_run_options(c)

    v = sub.add_parser("verify", help="check a coloring file against a graph")
    v.add_argument("--input", required=True, help="edge-list file")
    v.add_argument("--coloring", required=True, help="coloring file")

    b = sub.add_parser("bench", help="run a seeded random-graph sweep")
    b.add_argument("--n", type=int, nargs="+", required=True)
    b.add_argument("--delta", type=int, nargs="+", required=True)
    b.add_argument("--seeds", type=int, nargs="+", default=[0])
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out", help="report path (default: stdout)")
    b.add_argument("--workers", type=int, default=1)
    _add_run_options(b)
    return parser


def _config(args) -> SimConfig:
    return SimConfig(ell=args.ell, steps=args.steps, epsilon=args.epsilon, mis=args.mis,
                     seed=args.seed, fallback=args.fallback == "on", rounds=args.rounds)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: Optional[str], text: str, stream) -> None:
    if path is None:
        stream.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


def _load(path: str) -> Graph:
    text = _read(path)
    try:
        return parse_edge_list(text)
    except GraphError as exc:
        raise _Fail(EXIT_PARSE, f"{path}: {exc}") from None


def run_color(graph: Graph, args, trace: Optional[list] = None):
    """Color ``graph`` per the run options; returns ``(coloring, result or None)``."""
    config = _config(args)
    if args.mode == "distributed":
        try:
            result = simulate_coloring(graph, config, trace=trace)
        except (SimulationStalled, PhaseCapExceeded) as exc:
            raise _Fail(EXIT_VERIFY, str(exc)) from None
        return result.coloring, result
    coloring = PartialColoring(graph)
    params = config.params_for(graph)
    try:
        color_with_msva(coloring, params, [args.seed], args.max_retries, config.fallback)
    except MsvaExhausted as exc:
        raise _Fail(EXIT_VERIFY, str(exc)) from None
    return coloring, None


def cmd_color(args, out=sys.stdout, err=sys.stderr) -> int:
    graph = _load(args.input)
    trace = [] if args.trace else None
    coloring, result = run_color(graph, args, trace)
    _write(args.output, formats.format_coloring(coloring), out)
    _write(args.summary, formats.dumps(formats.summary(graph, coloring)) + "\n", err)
    if trace is not None:
        _write(args.trace, formats.json_lines(trace), out)
    if args.stats_out:
        lines = []
        if result is not None:
            lines = [p.to_json(args.timing) for p in result.phases]
            lines.append({"ledger": result.ledger.to_json()})
        _write(args.stats_out, formats.json_lines(lines), out)
    report = verify_output(graph, coloring)
    if not report.ok:
        err.write(f"verification failed: {report.first_problem()}\n")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args, out=sys.stdout, err=sys.stderr) -> int:
    graph = _load(args.input)
    text = _read(args.coloring)
    try:
        colors = formats.parse_coloring(text, graph.m)
    except GraphError as exc:
        raise _Fail(EXIT_PARSE, f"{args.coloring}: {exc}") from None
    report = verify_output(graph, colors)
    out.write(formats.dumps(report.to_json()) + "\n")
    if not report.ok:
        err.write(f"verification failed: {report.first_problem()}\n")
        return EXIT_VERIFY
    return EXIT_OK


def bench_row(n: int, delta: int, seed: int, args) -> dict:
    graph = gnp_capped(n, delta, seed)
    run_args = argparse.Namespace(**{**vars(args), "seed": seed})
    row = {"n": n, "delta": delta, "seed": seed, "mode": args.mode, "m": graph.m,
           "max_degree": graph.delta}
    try:
        coloring, result = run_color(graph, run_args)
    except _Fail:
        return {**row, "ok": False, "phases": "", "lucky_fraction": "", "mean_chain_length": "",
                "max_chain_length": "", "fallbacks": "", "rounds_total": ""}
    row["ok"] = verify_output(graph, coloring).ok
    if result is None:
        row.update(phases=0, lucky_fraction="", mean_chain_length="", max_chain_length="",
                   fallbacks="", rounds_total="")
        return row
    attempted = sum(p.uncolored_before for p in result.phases)
    lucky = sum(p.lucky for p in result.phases)
    mean_len = sum(p.mean_chain_length * p.lucky for p in result.phases) / lucky if lucky else 0.0
    row.update(
        phases=len(result.phases),
        lucky_fraction=round(lucky / attempted, 6) if attempted else 1.0,
        mean_chain_length=round(mean_len, 6),
        max_chain_length=max((p.max_chain_length for p in result.phases), default=0),
        fallbacks=result.fallback_count,
        rounds_total=result.ledger.total,
    )
    return row


def aggregate(rows: list[dict]) -> list[dict]:
    """Mean and population standard deviation of numeric columns per (n, delta, mode)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["n"], r["delta"], r["mode"]), []).append(r)
    out = []
    numeric = ["m", "max_degree", "phases", "lucky_fraction", "mean_chain_length", "max_chain_length",
               "fallbacks", "rounds_total"]
    for (n, delta, mode), rs in groups.items():
        for stat, fn in (("mean", statistics.fmean), ("std", statistics.pstdev)):
            agg = {"n": n, "delta": delta, "seed": stat, "mode": mode,
                   "ok": all(r["ok"] for r in rs)}
            for col in numeric:
                vals = [r[col] for r in rs if r[col] != ""]
                agg[col] = round(fn(vals), 6) if vals else ""
            out.append(agg)
    return out


def cmd_bench(args, out=sys.stdout, err=sys.stderr) -> int:
    jobs = [(n, d, s) for n in args.n for d in args.delta for s in args.seeds]
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        rows = list(pool.map(lambda job: bench_row(*job, args), jobs))
    aggs = aggregate(rows)
    if args.format == "json":
        text = json.dumps({"version": BENCH_VERSION, "runs": rows, "aggregates": aggs},
                          sort_keys=True, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# {BENCH_VERSION}\n")
        writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        writer.writerows(aggs)
        text = buf.getvalue()
    _write(args.out, text, out)
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_VERIFY


COMMANDS = {"color": cmd_color, "verify": cmd_verify, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out, err)
    except _Fail as exc:
        err.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
