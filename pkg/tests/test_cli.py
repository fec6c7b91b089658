"""Command-line behavior: files written, summary lines, exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

from rkcia.algorithm import RunConfig, run
from rkcia.cli import main
from rkcia.errors import NoRemovableNode, PropertyViolation
from rkcia.graphs import Mark, MixedGraph, TrueDag, Variable
from rkcia.harness import ParamDag, forward_sample
from rkcia.indep import oracle_backend
from rkcia.serialization import (
    dataset_to_csv_text,
    graph_to_json_obj,
    load_graph_obj,
    to_json_text,
)


def binary_vars(n, hidden_from=None):
    cut = n if hidden_from is None else hidden_from
    return [Variable(i, f"X{i}", 2, hidden=i >= cut) for i in range(n)]


def confounded_truth():
    return TrueDag(binary_vars(5, hidden_from=4), [(0, 1), (4, 1), (4, 2), (3, 2)])


def write_graph(path: Path, g) -> str:
    path.write_text(to_json_text(graph_to_json_obj(g)))
    return str(path)


def read_graph(path: Path):
    return load_graph_obj(json.loads(path.read_text()))


def skeleton(g):
    return {(a, b) for a, b, _, _ in g.edges()}


def test_discover_oracle_end_to_end(tmp_path, capsys):
    truth = confounded_truth()
    inp = write_graph(tmp_path / "truth.json", truth)
    out = str(tmp_path / "out")
    code = main(
        ["discover", "--backend", "oracle", "--input", inp, "--k", "1", "--output", out, "--trace"]
    )
    assert code == 0
    for name in ("out.poipg.json", "out.poipg.dot", "out.network.json", "out.network.dot", "out.trace.tsv"):
        assert (tmp_path / name).exists(), name
    expect = run(RunConfig(k=1, trace=True), oracle_backend(truth))
    assert (tmp_path / "out.poipg.json").read_text() == to_json_text(
        graph_to_json_obj(expect.poipg)
    )
    assert (tmp_path / "out.network.json").read_text() == to_json_text(
        graph_to_json_obj(expect.dag)
    )
    assert (tmp_path / "out.trace.tsv").read_text() == "".join(
        line + "\n" for line in expect.trace_lines()
    )
    summary = capsys.readouterr().out.strip()
    assert summary.startswith("discover: nodes=4 edges=3 k=1 backend=oracle(n_visible=4) time=")


def test_discover_can_keep_bidirected_edges(tmp_path):
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    out = str(tmp_path / "net")
    code = main(
        [
            "discover",
            "--backend",
            "oracle",
            "--input",
            inp,
            "--k",
            "1",
            "--output",
            out,
            "--no-expand-bidirected",
            "--format",
            "json",
        ]
    )
    assert code == 0
    assert not (tmp_path / "net.network.dot").exists()
    net = read_graph(tmp_path / "net.network.json")
    assert isinstance(net, MixedGraph)
    assert net.n_nodes == 4
    assert net.edge_marks(1, 2) == (Mark.ARROW, Mark.ARROW)


def test_discover_exact_backend_matches_oracle(tmp_path):
    truth = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    cpts = [
        np.array([[0.5, 0.5]]),
        np.array([[0.9, 0.1], [0.1, 0.9]]),
        np.array([[0.8, 0.2], [0.3, 0.7]]),
    ]
    from rkcia.harness import marginalize
    from rkcia.serialization import distribution_to_json_obj

    dist = marginalize(ParamDag(truth, cpts))
    inp = tmp_path / "dist.json"
    inp.write_text(to_json_text(distribution_to_json_obj(dist)))
    out_e = str(tmp_path / "e")
    out_o = str(tmp_path / "o")
    assert main(["discover", "--backend", "exact", "--input", str(inp), "--k", "1", "--output", out_e]) == 0
    truth_file = write_graph(tmp_path / "truth.json", truth)
    assert main(["discover", "--backend", "oracle", "--input", truth_file, "--k", "1", "--output", out_o]) == 0
    assert (tmp_path / "e.poipg.json").read_text() == (tmp_path / "o.poipg.json").read_text()
    assert (tmp_path / "e.network.json").read_text() == (tmp_path / "o.network.json").read_text()


def test_discover_gsq_reads_the_schema_sidecar(tmp_path, capsys):
    truth = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    cpts = [
        np.array([[0.5, 0.5]]),
        np.array([[0.9, 0.1], [0.1, 0.9]]),
        np.array([[0.9, 0.1], [0.1, 0.9]]),
    ]
    data = forward_sample(ParamDag(truth, cpts), 2000, seed=2)
    inp = tmp_path / "samples.csv"
    inp.write_text(dataset_to_csv_text(data))
    sidecar = tmp_path / "samples.csv.schema.json"
    sidecar.write_text(
        to_json_text({"variables": [{"name": "X0"}, {"name": "X1"}, {"name": "X2"}]})
    )
    out = str(tmp_path / "g")
    code = main(["discover", "--backend", "gsq", "--input", str(inp), "--k", "1", "--output", out])
    assert code == 0
    assert skeleton(read_graph(tmp_path / "g.poipg.json")) == {(0, 1), (1, 2)}
    assert "backend=gsq(alpha=0.05, n=2000)" in capsys.readouterr().out
    sidecar.write_text(to_json_text({"variables": [{"name": "A"}, {"name": "B"}, {"name": "C"}]}))
    code = main(["discover", "--backend", "gsq", "--input", str(inp), "--output", out])
    assert code == 2
    assert "does not match the schema names" in capsys.readouterr().err


def test_discover_backend_and_kind_must_agree(tmp_path, capsys):
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    code = main(
        ["discover", "--backend", "oracle", "--input", inp, "--input-kind", "csv-samples"]
    )
    assert code == 3
    assert "reads 'json-graph' input" in capsys.readouterr().err


def test_discover_unreadable_or_malformed_input(tmp_path, capsys):
    assert main(["discover", "--backend", "oracle", "--input", str(tmp_path / "nope.json")]) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{(")
    assert main(["discover", "--backend", "oracle", "--input", str(bad)]) == 2
    assert "line 1, column 2" in capsys.readouterr().err


def test_argparse_failures_exit_2(capsys):
    assert main(["discover"]) == 2
    assert main(["discover", "--input", "x", "--k", "-1"]) == 2
    assert main(["no-such-command"]) == 2
    capsys.readouterr()
    assert main(["--help"]) == 0


def test_bad_option_values_exit_3(tmp_path, capsys):
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    assert main(["discover", "--backend", "oracle", "--input", inp, "--jobs", "0"]) == 3
    assert "jobs" in capsys.readouterr().err


def test_simulate_outputs_are_deterministic(tmp_path, capsys):
    args = ["simulate", "--n-visible", "4", "--n-hidden", "1", "--n-samples", "50", "--seed", "3"]
    assert main(args + ["--output", str(tmp_path / "a")]) == 0
    assert main(args + ["--output", str(tmp_path / "b")]) == 0
    for suffix in ("graph.json", "samples.csv", "dist.json"):
        first = (tmp_path / f"a.{suffix}").read_text()
        second = (tmp_path / f"b.{suffix}").read_text()
        assert first == second, suffix
    out = capsys.readouterr().out
    assert "simulate: visible=4 hidden=1" in out
    assert "distribution=yes" in out
    truth = read_graph(tmp_path / "a.graph.json")
    assert isinstance(truth, TrueDag) and truth.n_visible == 4


def test_simulate_distribution_tri_state(tmp_path, capsys):
    big = ["simulate", "--n-visible", "21", "--n-samples", "10", "--seed", "0"]
    assert main(big + ["--output", str(tmp_path / "big")]) == 0
    assert not (tmp_path / "big.dist.json").exists()
    assert "distribution=no" in capsys.readouterr().out
    assert main(big + ["--output", str(tmp_path / "forced"), "--distribution"]) == 3
    assert "joint states exceed" in capsys.readouterr().err
    small = ["simulate", "--n-visible", "3", "--n-samples", "10", "--seed", "0"]
    assert main(small + ["--output", str(tmp_path / "off"), "--no-distribution"]) == 0
    assert not (tmp_path / "off.dist.json").exists()


def test_evaluate_pair_table_and_json(tmp_path, capsys):
    truth = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    ref = write_graph(tmp_path / "ref.json", truth)
    learned = MixedGraph(binary_vars(3))
    learned.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    learned.add_edge(1, 2, Mark.TAIL, Mark.ARROW)
    res = write_graph(tmp_path / "res.json", learned)
    assert main(["evaluate", "--result", res, "--reference", ref]) == 0
    table = capsys.readouterr().out
    assert table.splitlines()[0].split() == [
        "label", "precision", "recall", "f1", "extra", "missing", "orient",
    ]
    assert "1.0000" in table
    assert main(["evaluate", "--result", res, "--reference", ref, "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows == [
        {
            "label": "result",
            "skeleton_precision": 1.0,
            "skeleton_recall": 1.0,
            "skeleton_f1": 1.0,
            "extra_edges": 0,
            "missing_edges": 0,
            "orientation_agreement": 1.0,
        }
    ]


def test_evaluate_sweep_labels(tmp_path, capsys):
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    assert main(["evaluate", "--sweep", "--input", inp, "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["label"] for r in rows] == ["k=1", "k=2", "k=unbounded(2)"]
    assert all(r["skeleton_recall"] == 1.0 for r in rows)


def test_evaluate_argument_requirements(tmp_path, capsys):
    assert main(["evaluate"]) == 3
    assert "--result and --reference" in capsys.readouterr().err
    assert main(["evaluate", "--sweep"]) == 3
    assert "--sweep needs --input" in capsys.readouterr().err


def test_evaluate_node_mismatch(tmp_path, capsys):
    res = write_graph(tmp_path / "res.json", TrueDag(binary_vars(3), []))
    ref = write_graph(tmp_path / "ref.json", TrueDag(binary_vars(4), []))
    assert main(["evaluate", "--result", res, "--reference", ref]) == 3
    assert "variable lists differ" in capsys.readouterr().err


def test_oracle_check_reports_ok(tmp_path, capsys):
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    assert main(["oracle-check", "--input", inp, "--k", "1"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "k=1: 3 projected edges"
    assert "oracle-check: ok time=" in out
    assert main(["oracle-check", "--input", inp, "--k", "unbounded"]) == 0
    assert "k=2:" in capsys.readouterr().out


def test_oracle_check_failure_exits_5(tmp_path, capsys, monkeypatch):
    from rkcia.harness import PropertyReport

    def fake(dag, k):
        return PropertyReport(
            k=1,
            n_edges=1,
            checked={"collider-sepset": 1},
            violations=[("collider-sepset", (0, 1, 2), (1,))],
        )

    monkeypatch.setattr("rkcia.cli.verify_properties", fake)
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    assert main(["oracle-check", "--input", inp, "--k", "1"]) == 5
    out = capsys.readouterr().out
    assert "oracle-check: FAILED" in out
    assert "VIOLATION ('collider-sepset', (0, 1, 2), (1,))" in out


def test_stalled_elimination_exits_4(tmp_path, capsys, monkeypatch):
    stuck = MixedGraph(binary_vars(3))
    stuck.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    stuck.add_edge(1, 2, Mark.TAIL, Mark.ARROW)
    stuck.add_edge(2, 0, Mark.TAIL, Mark.ARROW)

    def fake(config, backend, variables=None):
        raise NoRemovableNode("every node keeps an outgoing arrow", (0, 1, 2), stuck)

    monkeypatch.setattr("rkcia.cli.run", fake)
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    assert main(["discover", "--backend", "oracle", "--input", inp]) == 4
    err = capsys.readouterr().err
    assert "node elimination stalled" in err
    assert "remaining nodes: [0, 1, 2]" in err
    dump = json.loads(err.strip().splitlines()[-1])
    assert {e["a"] for e in dump["edges"]} <= {0, 1, 2}


def test_property_violation_exits_5(tmp_path, capsys, monkeypatch):
    def fake(config, backend, variables=None):
        raise PropertyViolation("projection broke", [("full-orientation", (0, 1), "tail/tail")])

    monkeypatch.setattr("rkcia.cli.run", fake)
    inp = write_graph(tmp_path / "truth.json", confounded_truth())
    assert main(["discover", "--backend", "oracle", "--input", inp]) == 5
    err = capsys.readouterr().err
    assert "projection broke" in err
    assert "('full-orientation', (0, 1), 'tail/tail')" in err


def test_discover_jobs_do_not_change_files(tmp_path):
    truth = TrueDag(binary_vars(6, hidden_from=5), [(0, 2), (1, 3), (2, 3), (2, 4), (5, 1), (5, 4)])
    inp = write_graph(tmp_path / "truth.json", truth)
    base = ["discover", "--backend", "oracle", "--input", inp, "--k", "2"]
    assert main(base + ["--output", str(tmp_path / "j1"), "--jobs", "1"]) == 0
    assert main(base + ["--output", str(tmp_path / "j4"), "--jobs", "4"]) == 0
    for name in ("poipg.json", "poipg.dot", "network.json", "network.dot"):
        assert (tmp_path / f"j1.{name}").read_text() == (tmp_path / f"j4.{name}").read_text()
