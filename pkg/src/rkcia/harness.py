"""Ground-truth generation, exact marginals, sampling, metrics, and the
structural property suite for the bounded projection.

Everything is deterministic given its seed: node and pair scans run in
ascending index order and random draws happen in a fixed sequence, so a
seed pins down the instance exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dsep import d_separated, rk_including_path_graph, separator_subsets
from .errors import NodeSetMismatch, PropertyViolation, StateSpaceTooLarge
from .graphs import Dag, Mark, MixedGraph, TrueDag, Variable, _toposort
from .indep import DiscreteDataset, ExactDistribution

_STATE_LIMIT = 2**20


@dataclass
class ParamDag:
    """A DAG plus one conditional probability table per node.

    cpts[v] has one row per joint state of v's parents (parents ascending,
    last parent fastest-varying) and one column per state of v.
    """

    dag: TrueDag
    cpts: list[np.ndarray]

    def __post_init__(self):
        n = self.dag.n_nodes
        if len(self.cpts) != n:
            raise ValueError(f"{len(self.cpts)} tables for {n} nodes")
        self.cpts = [np.asarray(t, dtype=float) for t in self.cpts]
        for v in range(n):
            rows = int(np.prod([self.dag.nodes[p].arity for p in self.dag.parents[v]]))
            want = (rows, self.dag.nodes[v].arity)
            if self.cpts[v].shape != want:
                raise ValueError(f"node {v}: table shape {self.cpts[v].shape}, expected {want}")
            bad = np.abs(self.cpts[v].sum(axis=1) - 1.0) > 1e-12
            if bad.any():
                raise ValueError(f"node {v}: row {int(np.argmax(bad))} does not sum to 1")


def random_dag(
    n_visible: int,
    n_hidden: int = 0,
    edge_prob: float = 0.3,
    seed: int = 0,
    confounders_only: bool = True,
    arity: int = 2,
) -> TrueDag:
    """Random DAG: visible nodes first, hidden last.

    Each forward visible pair i < j gets edge i -> j with probability
    edge_prob.  With confounders_only (the default), every hidden node is
    parentless and gets two distinct visible children plus each further
    visible child with probability edge_prob; otherwise hidden nodes join
    the forward-pair scheme like any other node.
    """
    if n_visible < 1:
        raise ValueError(f"need at least one visible node, got {n_visible}")
    if not (0.0 <= edge_prob <= 1.0):
        raise ValueError(f"edge_prob must be in [0,1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    nodes = [Variable(i, f"X{i}", arity) for i in range(n_visible)]
    nodes += [Variable(n_visible + j, f"L{j}", arity, hidden=True) for j in range(n_hidden)]
    edges: list[tuple[int, int]] = []
    if confounders_only:
        for i, j in combinations(range(n_visible), 2):
            if rng.random() < edge_prob:
                edges.append((i, j))
        for j in range(n_hidden):
            h = n_visible + j
            if n_visible >= 2:
                first_two = sorted(rng.choice(n_visible, size=2, replace=False).tolist())
            else:
                first_two = [0]
            for c in first_two:
                edges.append((h, c))
            for c in range(n_visible):
                if c not in first_two and rng.random() < edge_prob:
                    edges.append((h, c))
    else:
        n = n_visible + n_hidden
        for i, j in combinations(range(n), 2):
            if rng.random() < edge_prob:
                edges.append((i, j))
    return TrueDag(nodes, edges)


def random_cpts(dag: TrueDag, seed: int = 0, min_prob: float = 0.05) -> ParamDag:
    """Flat random rows squeezed away from the simplex boundary.

    Each row is min_prob + (1 - arity * min_prob) * (flat simplex draw),
    so every entry is at least min_prob and rows sum to one exactly; the
    margin keeps the induced distribution away from degenerate and
    near-unfaithful parameterizations.
    """
    rng = np.random.default_rng(seed)
    cpts = []
    for v in range(dag.n_nodes):
        arity = dag.nodes[v].arity
        if min_prob * arity >= 1.0:
            raise ValueError(f"min_prob {min_prob} too large for arity {arity}")
        rows = int(np.prod([dag.nodes[p].arity for p in dag.parents[v]]))
        flat = rng.dirichlet(np.ones(arity), size=rows)
        cpts.append(min_prob + (1.0 - arity * min_prob) * flat)
    return ParamDag(dag, cpts)


def _joint_table(p: ParamDag) -> np.ndarray:
    dag = p.dag
    arities = [v.arity for v in dag.nodes]
    total = int(np.prod(arities))
    if total > _STATE_LIMIT:
        raise StateSpaceTooLarge(f"{total} joint states exceed the {_STATE_LIMIT} guard")
    joint = np.ones(arities)
    n = dag.n_nodes
    for v in range(n):
        axes = dag.parents[v] + [v]
        factor = p.cpts[v].reshape([arities[ax] for ax in axes])
        factor = factor.transpose(np.argsort(axes))
        shape = [1] * n
        for ax in axes:
            shape[ax] = arities[ax]
        joint = joint * factor.reshape(shape)
    return joint


def marginalize(p: ParamDag) -> ExactDistribution:
    """Exact joint over the visible block, hidden axes summed out."""
    joint = _joint_table(p)
    m = p.dag.n_visible
    n = p.dag.n_nodes
    if n > m:
        joint = joint.sum(axis=tuple(range(m, n)))
    return ExactDistribution(p.dag.visible_variables(), joint.ravel())


def forward_sample(p: ParamDag, n: int, seed: int = 0) -> DiscreteDataset:
    """Ancestral sampling; hidden columns are dropped from the output."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    dag = p.dag
    arities = [v.arity for v in dag.nodes]
    rng = np.random.default_rng(seed)
    data = np.zeros((n, dag.n_nodes), dtype=np.int64)
    for v in dag.topological_order():
        parents = dag.parents[v]
        if parents:
            dims = [arities[q] for q in parents]
            rows = np.ravel_multi_index([data[:, q] for q in parents], dims)
        else:
            rows = np.zeros(n, dtype=np.intp)
        cum = np.cumsum(p.cpts[v][rows], axis=1)
        draws = rng.random(n)
        states = (draws[:, None] > cum).sum(axis=1)
        data[:, v] = np.minimum(states, arities[v] - 1)
    return DiscreteDataset(dag.visible_variables(), data[:, : dag.n_visible])


@dataclass
class Metrics:
    """Skeleton and orientation agreement between two graphs."""

    skeleton_precision: float
    skeleton_recall: float
    extra_edges: int
    missing_edges: int
    orientation_agreement: float

    def skeleton_f1(self) -> float:
        p, r = self.skeleton_precision, self.skeleton_recall
        if p + r == 0.0:
            return 0.0
        return 2.0 * p * r / (p + r)

    def as_dict(self) -> dict:
        return {
            "skeleton_precision": self.skeleton_precision,
            "skeleton_recall": self.skeleton_recall,
            "skeleton_f1": self.skeleton_f1(),
            "extra_edges": self.extra_edges,
            "missing_edges": self.missing_edges,
            "orientation_agreement": self.orientation_agreement,
        }


def as_marked_graph(g) -> MixedGraph:
    """Visible-block view of a graph with endpoint marks.

    A fully directed graph maps each visible edge to tail/arrow; each
    hidden node marks every pair of its visible children as bidirected
    (pairs already joined by a directed edge are left as they are).
    MixedGraph inputs pass through unchanged.
    """
    if isinstance(g, MixedGraph):
        return g
    if not isinstance(g, Dag):
        raise TypeError(f"cannot view {type(g).__name__} as a marked graph")
    out = MixedGraph(g.visible_variables())
    m = out.n_nodes
    for p, c in g.sorted_edges():
        if p < m and c < m:
            out.add_edge(p, c, Mark.TAIL, Mark.ARROW)
    for h in range(m, g.n_nodes):
        kids = [c for c in g.children[h] if c < m]
        for a, b in combinations(sorted(kids), 2):
            if not out.has_edge(a, b):
                out.add_edge(a, b, Mark.ARROW, Mark.ARROW)
    return out


def compare(result, reference) -> Metrics:
    """Skeleton precision/recall plus exact per-edge mark agreement."""
    res = as_marked_graph(result)
    ref = as_marked_graph(reference)
    if res.nodes != ref.nodes:
        raise NodeSetMismatch(
            f"result has {len(res.nodes)} nodes, reference {len(ref.nodes)}; variable lists differ"
        )
    res_edges = {(a, b) for a, b, _, _ in res.edges()}
    ref_edges = {(a, b) for a, b, _, _ in ref.edges()}
    shared = res_edges & ref_edges
    precision = len(shared) / len(res_edges) if res_edges else 1.0
    recall = len(shared) / len(ref_edges) if ref_edges else 1.0
    agree = sum(1 for a, b in shared if res.edge_marks(a, b) == ref.edge_marks(a, b))
    agreement = agree / len(shared) if shared else 1.0
    return Metrics(
        skeleton_precision=precision,
        skeleton_recall=recall,
        extra_edges=len(res_edges - ref_edges),
        missing_edges=len(ref_edges - res_edges),
        orientation_agreement=agreement,
    )


def format_metrics_table(rows: list[tuple[str, Metrics]]) -> str:
    """Aligned text table, one labelled Metrics row per line."""
    headers = ["label", "precision", "recall", "f1", "extra", "missing", "orient"]
    cells = [headers]
    for label, m in rows:
        cells.append(
            [
                label,
                f"{m.skeleton_precision:.4f}",
                f"{m.skeleton_recall:.4f}",
                f"{m.skeleton_f1():.4f}",
                str(m.extra_edges),
                str(m.missing_edges),
                f"{m.orientation_agreement:.4f}",
            ]
        )
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines)


@dataclass
class PropertyReport:
    """Outcome of the structural property suite for one model and bound."""

    k: int
    n_edges: int
    checked: dict[str, int]
    violations: list[tuple]

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_failed(self) -> None:
        if self.violations:
            raise PropertyViolation(
                f"{len(self.violations)} structural property violations at k={self.k}",
                self.violations,
            )

    def lines(self) -> list[str]:
        out = [f"k={self.k}: {self.n_edges} projected edges"]
        for name in sorted(self.checked):
            n_bad = sum(1 for v in self.violations if v[0] == name)
            out.append(f"  {name}: {self.checked[name]} checked, {n_bad} violations")
        for v in self.violations:
            out.append(f"  VIOLATION {v}")
        return out


def verify_properties(g: TrueDag, k: int | None = None, pi: MixedGraph | None = None) -> PropertyReport:
    """Audit the bounded projection of g against its defining claims.

    Checks, with counterexamples collected rather than raised:
      full-orientation  every projected edge is directed or bidirected;
      directed-path     a directed projected edge implies a directed path
                        between the same endpoints in g;
      collider-sepset   an unshielded collider's midpoint belongs to no
                        separating set of cardinality <= k;
      noncollider-sepset an unshielded non-collider's midpoint belongs to
                        every separating set of cardinality <= k;
      acyclic           the directed projected edges form no cycle.
    """
    m = g.n_visible
    if k is None:
        k = max(m - 2, 0)
    checked = {name: 0 for name in (
        "full-orientation", "directed-path", "collider-sepset", "noncollider-sepset", "acyclic",
    )}
    violations: list[tuple] = []
    if pi is None:
        try:
            pi = rk_including_path_graph(g, k)
        except PropertyViolation as e:
            checked["full-orientation"] = 1
            return PropertyReport(k=k, n_edges=0, checked=checked, violations=list(e.violations))

    for a, b, ma, mb in pi.edges():
        checked["full-orientation"] += 1
        if Mark.CIRCLE in (ma, mb) or (ma is Mark.TAIL and mb is Mark.TAIL):
            violations.append(("full-orientation", (a, b), (ma.value, mb.value)))

    for a, b in pi.directed_edges():
        checked["directed-path"] += 1
        if not g.has_directed_path(a, b):
            violations.append(("directed-path", (a, b)))

    for b in range(m):
        for a, c in combinations(pi.neighbors(b), 2):
            if pi.has_edge(a, c):
                continue
            rest = [v for v in range(m) if v not in (a, b, c)]
            if pi.is_collider(a, b, c):
                checked["collider-sepset"] += 1
                for t in separator_subsets(rest, k - 1) if k >= 1 else ():
                    s = tuple(sorted((b, *t)))
                    if d_separated(g, a, c, s):
                        violations.append(("collider-sepset", (a, b, c), s))
                        break
            else:
                checked["noncollider-sepset"] += 1
                for s in separator_subsets(rest, k):
                    if d_separated(g, a, c, s):
                        violations.append(("noncollider-sepset", (a, b, c), s))
                        break

    checked["acyclic"] += 1
    children: list[list[int]] = [[] for _ in range(m)]
    for a, b in pi.directed_edges():
        children[a].append(b)
    if _toposort(m, children) is None:
        violations.append(("acyclic", tuple(pi.directed_edges())))

    return PropertyReport(k=k, n_edges=pi.n_edges, checked=checked, violations=violations)


def sweep_instances(
    count: int = 200,
    seed: int = 0,
    n_visible: tuple[int, int] = (5, 8),
    n_hidden: tuple[int, int] = (0, 3),
    edge_prob: float = 0.3,
) -> list[TrueDag]:
    """Deterministic family of random confounded models for the sweeps."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        nv = int(rng.integers(n_visible[0], n_visible[1] + 1))
        nh = int(rng.integers(n_hidden[0], n_hidden[1] + 1))
        sub = int(rng.integers(0, 2**63 - 1))
        out.append(random_dag(nv, nh, edge_prob, seed=sub))
    return out
