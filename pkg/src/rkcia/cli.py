"""Command-line front end.

Subcommands: discover (run the pipeline on a data file), simulate (emit a
random ground truth with samples and, when it fits, the exact visible
distribution), evaluate (score a learned graph against a reference, or
sweep separator bounds against a ground truth), oracle-check (audit the
bounded projection of a ground truth).

Exit codes: 0 success, 2 unreadable or malformed input, 3 contradictory
configuration (including oversized state spaces and mismatched node
sets), 4 stalled node elimination, 5 failed structural properties.
Diagnostics go to standard error (level picked by the RKCIA_LOG
environment variable); results go to files and standard output.

Every emitted file is deterministic for fixed inputs, configuration, and
seed; wall time appears only in the stdout summary line.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .algorithm import RunConfig, run
from .errors import (
    InputError,
    NodeSetMismatch,
    NoRemovableNode,
    PropertyViolation,
    QueryOnHidden,
    StateSpaceTooLarge,
)
from .harness import (
    Metrics,
    as_marked_graph,
    compare,
    forward_sample,
    format_metrics_table,
    marginalize,
    random_cpts,
    random_dag,
    verify_properties,
)
from .indep import exact_backend, gsq_backend, oracle_backend
from .serialization import (
    dag_from_json_obj,
    dataset_from_csv_text,
    dataset_to_csv_text,
    distribution_from_json_obj,
    distribution_to_json_obj,
    graph_to_dot,
    graph_to_json_obj,
    load_graph_obj,
    schema_from_json_obj,
    to_json_text,
)

log = logging.getLogger("rkcia.cli")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

_KIND_FOR_BACKEND = {"oracle": "json-graph", "exact": "json-distribution", "gsq": "csv-samples"}


class ConfigError(Exception):
    """Options that contradict each other or the input."""


def _setup_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("RKCIA_LOG", "").lower(), logging.WARNING)
    root = logging.getLogger("rkcia")
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)


def _parse_k(text: str) -> int | None:
    if text == "unbounded":
        return None
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a non-negative integer or 'unbounded', got {text!r}")
    if k < 0:
        raise argparse.ArgumentTypeError(f"k must be >= 0, got {k}")
    return k


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror or e}") from None


def _read_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def _write(path: Path, text: str) -> None:
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _build_backend(args):
    kind = args.input_kind or _KIND_FOR_BACKEND[args.backend]
    if kind != _KIND_FOR_BACKEND[args.backend]:
        raise ConfigError(
            f"backend {args.backend!r} reads {_KIND_FOR_BACKEND[args.backend]!r} input, not {kind!r}"
        )
    if args.backend == "oracle":
        dag = dag_from_json_obj(_read_json(args.input))
        return oracle_backend(dag)
    if args.backend == "exact":
        dist = distribution_from_json_obj(_read_json(args.input))
        return exact_backend(dist, epsilon=args.epsilon)
    schema = None
    sidecar = Path(args.input + ".schema.json")
    if sidecar.exists():
        schema = schema_from_json_obj(_read_json(str(sidecar)))
        log.info("using schema %s", sidecar)
    data = dataset_from_csv_text(_read_text(args.input), schema)
    return gsq_backend(data, alpha=args.alpha)


def _emit_graph(prefix: str, stem: str, g, fmt: str) -> None:
    if fmt in ("json", "both"):
        _write(Path(f"{prefix}.{stem}.json"), to_json_text(graph_to_json_obj(g)))
    if fmt in ("dot", "both"):
        _write(Path(f"{prefix}.{stem}.dot"), graph_to_dot(g))


def _cmd_discover(args) -> int:
    t0 = time.perf_counter()
    backend = _build_backend(args)
    config = RunConfig(
        k=args.k,
        adjacency_restricted=args.adjacency_restricted,
        trace=args.trace,
        jobs=args.jobs,
        expand_bidirected=args.expand_bidirected,
    )
    if config.adjacency_restricted and config.jobs > 1:
        log.info("adjacency-restricted search is sequential; ignoring jobs=%d", config.jobs)
    result = run(config, backend)
    _emit_graph(args.output, "poipg", result.poipg, args.format)
    network = result.dag if args.expand_bidirected else result.final_pi
    _emit_graph(args.output, "network", network, args.format)
    if args.trace:
        _write(Path(f"{args.output}.trace.tsv"), "".join(line + "\n" for line in result.trace_lines()))
    dt = time.perf_counter() - t0
    print(
        f"discover: nodes={len(result.poipg.nodes)} edges={result.final_pi.n_edges} "
        f"k={result.k} backend={result.backend_descriptor} time={dt:.3f}s"
    )
    return 0


def _cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    dag = random_dag(args.n_visible, args.n_hidden, args.edge_prob, seed=args.seed)
    params = random_cpts(dag, seed=args.seed + 1, min_prob=args.min_prob)
    data = forward_sample(params, args.n_samples, seed=args.seed + 2)
    _write(Path(f"{args.output}.graph.json"), to_json_text(graph_to_json_obj(dag)))
    _write(Path(f"{args.output}.samples.csv"), dataset_to_csv_text(data))
    wrote_dist = False
    if args.distribution is not False:
        try:
            dist = marginalize(params)
        except StateSpaceTooLarge:
            if args.distribution is True:
                raise
            log.warning("joint state space too large; skipping the distribution file")
        else:
            _write(Path(f"{args.output}.dist.json"), to_json_text(distribution_to_json_obj(dist)))
            wrote_dist = True
    dt = time.perf_counter() - t0
    print(
        f"simulate: visible={args.n_visible} hidden={args.n_hidden} edges={len(dag.edges)} "
        f"samples={args.n_samples} distribution={'yes' if wrote_dist else 'no'} "
        f"seed={args.seed} time={dt:.3f}s"
    )
    return 0


def _rows_to_json(rows: list[tuple[str, Metrics]]) -> str:
    return to_json_text([{"label": label, **m.as_dict()} for label, m in rows])


def _cmd_evaluate(args) -> int:
    if args.sweep:
        if not args.input:
            raise ConfigError("--sweep needs --input with a ground-truth graph")
        truth = dag_from_json_obj(_read_json(args.input))
        reference = as_marked_graph(truth)
        backend = oracle_backend(truth)
        rows = []
        unbounded = max(truth.n_visible - 2, 0)
        for label, k in (("k=1", 1), ("k=2", 2), (f"k=unbounded({unbounded})", None)):
            result = run(RunConfig(k=k), backend)
            rows.append((label, compare(result.final_pi, reference)))
    else:
        if not (args.result and args.reference):
            raise ConfigError("evaluate needs --result and --reference (or --sweep with --input)")
        res = load_graph_obj(_read_json(args.result))
        ref = load_graph_obj(_read_json(args.reference))
        rows = [("result", compare(res, ref))]
    if args.format == "json":
        sys.stdout.write(_rows_to_json(rows))
    else:
        print(format_metrics_table(rows))
    return 0


def _cmd_oracle_check(args) -> int:
    t0 = time.perf_counter()
    dag = dag_from_json_obj(_read_json(args.input))
    report = verify_properties(dag, args.k)
    for line in report.lines():
        print(line)
    dt = time.perf_counter() - t0
    print(f"oracle-check: {'ok' if report.ok else 'FAILED'} time={dt:.3f}s")
    if not report.ok:
        return 5
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkcia",
        description="Belief-network structure recovery with bounded-cardinality independence tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="learn a network from a data or graph file")
    p.add_argument("--input", required=True, help="input file path")
    p.add_argument(
        "--input-kind",
        choices=["json-graph", "json-distribution", "csv-samples"],
        help="input flavor; defaults to the one the backend reads",
    )
    p.add_argument("--backend", choices=["oracle", "exact", "gsq"], default="exact")
    p.add_argument("--k", type=_parse_k, default=None, help="separator cardinality bound or 'unbounded'")
    p.add_argument("--alpha", type=float, default=0.05, help="test significance level (gsq)")
    p.add_argument("--epsilon", type=float, default=1e-9, help="mutual-information tolerance (exact)")
    p.add_argument("--output", default="rkcia-out", help="output path prefix")
    p.add_argument("--format", choices=["json", "dot", "both"], default="both")
    p.add_argument("--trace", action="store_true", help="also write the orientation trace")
    p.add_argument("--jobs", type=int, default=1, help="parallel skeleton-search threads")
    p.add_argument(
        "--expand-bidirected",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="realize bidirected edges as hidden common causes in the network file",
    )
    p.add_argument(
        "--adjacency-restricted",
        action="store_true",
        help="draw separator candidates from current neighborhoods only (faster, approximate)",
    )
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("simulate", help="emit a random ground truth, samples, and distribution")
    p.add_argument("--n-visible", type=int, required=True)
    p.add_argument("--n-hidden", type=int, default=0)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--n-samples", type=int, default=10000)
    p.add_argument("--min-prob", type=float, default=0.05, help="probability floor for table rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="rkcia-sim", help="output path prefix")
    p.add_argument(
        "--distribution",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="force or suppress the exact-distribution file (default: emit when it fits)",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate", help="score a learned graph against a reference")
    p.add_argument("--result", help="learned graph JSON")
    p.add_argument("--reference", help="reference graph JSON")
    p.add_argument("--sweep", action="store_true", help="oracle run per bound against --input ground truth")
    p.add_argument("--input", help="ground-truth graph JSON (with --sweep)")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("oracle-check", help="audit the bounded projection of a ground truth")
    p.add_argument("--input", required=True, help="ground-truth graph JSON")
    p.add_argument("--k", type=_parse_k, default=None, help="separator cardinality bound or 'unbounded'")
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ConfigError, StateSpaceTooLarge, NodeSetMismatch, QueryOnHidden, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NoRemovableNode as e:
        print(f"error: node elimination stalled: {e}", file=sys.stderr)
        print(f"remaining nodes: {list(e.remaining)}", file=sys.stderr)
        if e.graph is not None:
            print(json.dumps(graph_to_json_obj(e.graph), sort_keys=True), file=sys.stderr)
        return 4
    except PropertyViolation as e:
        print(f"error: {e}", file=sys.stderr)
        for v in e.violations:
            print(f"  {v}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
