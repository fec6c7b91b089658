"""File formats: graph JSON, distribution JSON, sample CSV, DOT export.

Graph JSON:
  {"nodes": [{"index", "name", "arity", "hidden"}...],
   "edges": [{"a", "b", "mark_a", "mark_b"}...],
   "constraints": [[a, b, c]...]}
with marks "tail" | "arrow" | "circle".  Fully directed graphs (ground
truths and pipeline outputs) serialize their edges as tail/arrow pairs.

Distribution JSON:
  {"variables": [{"name", "arity"}...], "probabilities": [...]}
row-major with the last listed variable varying fastest.

CSV datasets: first row variable names, every later row one sample of
non-negative state indices.  Arity is inferred as max+1 (at least 2)
unless a schema object pins it down.

All emitters are deterministic: nodes and edges ascending, JSON keys
sorted, trailing newline.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .errors import GraphError, InputError
from .graphs import Dag, Mark, MixedGraph, TrueDag, Variable
from .indep import DiscreteDataset, ExactDistribution


def to_json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    return obj[key]


def _variables_from_json(items, where: str, with_index: bool) -> list[Variable]:
    if not isinstance(items, list):
        raise InputError(f"{where}: expected a list")
    out = []
    for pos, item in enumerate(items):
        spot = f"{where}[{pos}]"
        name = _require(item, "name", spot)
        if not isinstance(name, str):
            raise InputError(f"{spot}: name must be a string")
        arity = item.get("arity", 2)
        if not isinstance(arity, int) or arity < 2:
            raise InputError(f"{spot}: arity must be an integer >= 2, got {arity!r}")
        hidden = item.get("hidden", False)
        if not isinstance(hidden, bool):
            raise InputError(f"{spot}: hidden must be a boolean")
        index = item.get("index", pos) if with_index else pos
        if index != pos:
            raise InputError(f"{spot}: index {index} out of order; nodes must be listed 0..n-1")
        out.append(Variable(index, name, arity, hidden))
    return out


def graph_to_json_obj(g) -> dict:
    if not isinstance(g, (Dag, MixedGraph)):
        raise TypeError(f"cannot serialize {type(g).__name__}")
    nodes = [
        {"index": v.index, "name": v.name, "arity": v.arity, "hidden": v.hidden}
        for v in g.nodes
    ]
    if isinstance(g, Dag):
        edges = [
            {"a": p, "b": c, "mark_a": "tail", "mark_b": "arrow"} for p, c in g.sorted_edges()
        ]
        constraints: list[list[int]] = []
    else:
        edges = [
            {"a": a, "b": b, "mark_a": ma.value, "mark_b": mb.value} for a, b, ma, mb in g.edges()
        ]
        constraints = [list(t) for t in g.constraints()]
    return {"nodes": nodes, "edges": edges, "constraints": constraints}


def _edges_from_json(obj: dict) -> list[tuple[int, int, Mark, Mark]]:
    edges = _require(obj, "edges", "graph")
    if not isinstance(edges, list):
        raise InputError("graph.edges: expected a list")
    out = []
    for pos, e in enumerate(edges):
        spot = f"graph.edges[{pos}]"
        a = _require(e, "a", spot)
        b = _require(e, "b", spot)
        if not isinstance(a, int) or not isinstance(b, int):
            raise InputError(f"{spot}: endpoints must be integers")
        try:
            ma = Mark.from_word(_require(e, "mark_a", spot))
            mb = Mark.from_word(_require(e, "mark_b", spot))
        except GraphError as err:
            raise InputError(f"{spot}: {err}") from None
        out.append((a, b, ma, mb))
    return out


def mixed_from_json_obj(obj: dict) -> MixedGraph:
    nodes = _variables_from_json(_require(obj, "nodes", "graph"), "graph.nodes", True)
    try:
        g = MixedGraph(nodes)
        for a, b, ma, mb in _edges_from_json(obj):
            g.add_edge(a, b, ma, mb)
        for pos, t in enumerate(obj.get("constraints", [])):
            if not (isinstance(t, list) and len(t) == 3 and all(isinstance(v, int) for v in t)):
                raise InputError(f"graph.constraints[{pos}]: expected three integers")
            g.add_constraint(*t)
    except GraphError as err:
        raise InputError(f"graph: {err}") from None
    return g


def dag_from_json_obj(obj: dict) -> TrueDag:
    nodes = _variables_from_json(_require(obj, "nodes", "graph"), "graph.nodes", True)
    directed = []
    for pos, (a, b, ma, mb) in enumerate(_edges_from_json(obj)):
        if ma is Mark.TAIL and mb is Mark.ARROW:
            directed.append((a, b))
        elif ma is Mark.ARROW and mb is Mark.TAIL:
            directed.append((b, a))
        else:
            raise InputError(
                f"graph.edges[{pos}]: a ground-truth graph needs fully directed edges, "
                f"got marks {ma.value}/{mb.value}"
            )
    if obj.get("constraints"):
        raise InputError("graph: a ground-truth graph carries no constraints")
    try:
        return TrueDag(nodes, directed)
    except GraphError as err:
        raise InputError(f"graph: {err}") from None


def load_graph_obj(obj: dict):
    """TrueDag when any node is hidden, MixedGraph otherwise."""
    nodes = _require(obj, "nodes", "graph")
    if isinstance(nodes, list) and any(
        isinstance(v, dict) and v.get("hidden", False) for v in nodes
    ):
        return dag_from_json_obj(obj)
    return mixed_from_json_obj(obj)


def distribution_to_json_obj(d: ExactDistribution) -> dict:
    return {
        "variables": [{"name": v.name, "arity": v.arity} for v in d.variables],
        "probabilities": [float(p) for p in d.probabilities],
    }


def distribution_from_json_obj(obj: dict) -> ExactDistribution:
    variables = _variables_from_json(
        _require(obj, "variables", "distribution"), "distribution.variables", False
    )
    probs = _require(obj, "probabilities", "distribution")
    if not isinstance(probs, list) or not all(isinstance(p, (int, float)) for p in probs):
        raise InputError("distribution.probabilities: expected a list of numbers")
    return ExactDistribution(variables, np.asarray(probs, dtype=float))


def dataset_to_csv_text(d: DiscreteDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([v.name for v in d.variables])
    for row in d.data:
        w.writerow([int(x) for x in row])
    return buf.getvalue()


def dataset_from_csv_text(text: str, variables: list[Variable] | None = None) -> DiscreteDataset:
    """Parse samples; arities come from `variables` or are inferred.

    Errors name the 1-based line and the column at fault.
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise InputError("line 1: empty file, expected a header of variable names")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise InputError("line 1: duplicate column names in header")
    if len(rows) == 1:
        raise InputError("line 2: no data rows after the header")
    data = np.zeros((len(rows) - 1, len(header)), dtype=np.int64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(f"line {i}: expected {len(header)} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                val = int(cell.strip())
            except ValueError:
                raise InputError(
                    f"line {i}, column {header[j]!r}: {cell.strip()!r} is not an integer"
                ) from None
            if val < 0:
                raise InputError(f"line {i}, column {header[j]!r}: state index {val} is negative")
            data[i - 2, j] = val
    if variables is None:
        arities = np.maximum(data.max(axis=0) + 1, 2)
        variables = [Variable(j, name, int(arities[j])) for j, name in enumerate(header)]
    else:
        if [v.name for v in variables] != header:
            raise InputError(
                f"line 1: header {header!r} does not match the schema names "
                f"{[v.name for v in variables]!r}"
            )
    return DiscreteDataset(variables, data)


def schema_from_json_obj(obj: dict) -> list[Variable]:
    return _variables_from_json(_require(obj, "variables", "schema"), "schema.variables", False)


_DOT_MARK = {Mark.TAIL: "none", Mark.ARROW: "normal", Mark.CIRCLE: "odot"}


def _dot_label(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(g) -> str:
    """DOT text; circle marks render as odot arrow ends, hidden nodes dashed."""
    if not isinstance(g, (Dag, MixedGraph)):
        raise TypeError(f"cannot serialize {type(g).__name__}")
    lines = ["digraph g {"]
    for v in g.nodes:
        attrs = [f"label={_dot_label(v.name)}"]
        if v.hidden:
            attrs.append("style=dashed")
        lines.append(f"  n{v.index} [{', '.join(attrs)}];")
    if isinstance(g, Dag):
        for p, c in g.sorted_edges():
            lines.append(f"  n{p} -> n{c};")
    else:
        for a, b, ma, mb in g.edges():
            lines.append(
                f"  n{a} -> n{b} [dir=both, arrowtail={_DOT_MARK[ma]}, arrowhead={_DOT_MARK[mb]}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
