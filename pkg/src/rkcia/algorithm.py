"""Structure recovery from bounded-cardinality independence queries.

The pipeline runs six stages on the visible variables:

  A/B  start from the complete graph; for every pair, search conditioning
       sets of cardinality <= k in canonical order (ascending size, then
       lexicographic) and drop the edge on the first independence found,
       recording that set symmetrically in the separator table.
  C    every surviving edge starts circle/circle; each unshielded triple
       a-b-c either becomes a collider at b (arrowheads on both edges,
       when b is outside the recorded separator of a and c) or records the
       non-collider constraint (a, b, c).
  D    closure under four orientation rules, rescanned from the first
       rule after every change until nothing applies.
  E    every circle opposite an arrowhead hardens to a tail.
  F    a working copy is emptied by repeatedly deleting the lowest-index
       removable node; each circle/circle edge deleted this way is
       oriented in the retained graph as pointing at the deleted node.
       The elimination order doubles as a reverse topological order of
       the final DAG.

Bidirected edges stand for a hidden common cause of their endpoints; the
output DAG realizes each one as a synthetic parentless hidden node with
the two endpoints as children.  They are excluded from the elimination
copy, since neither endpoint is an ancestor of the other.

Determinism: every scan (pairs, triples, rule instances, subset
enumeration) runs in ascending index order, so identical inputs and
configuration reproduce identical results, including the trace.  The
trace is a list of events, one per mutation: tab-separated step id,
comma-separated node list, old marks, new marks, where each mark
character lines up with the listed node at the same position
('-' tail, '>' arrowhead, 'o' circle).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .dsep import separator_subsets
from .errors import GraphError, MissingSepset, NoRemovableNode
from .graphs import Dag, Mark, MixedGraph, Variable, mark_chars


@dataclass(frozen=True)
class TraceEvent:
    """One recorded mutation: a mark change, edge removal, or constraint."""

    step: str
    nodes: tuple[int, ...]
    old: str
    new: str

    def line(self) -> str:
        return "\t".join((self.step, ",".join(str(v) for v in self.nodes), self.old, self.new))


class SepsetTable:
    """Separator recorded for each pair whose edge was removed."""

    def __init__(self):
        self._sets: dict[tuple[int, int], tuple[int, ...]] = {}

    @staticmethod
    def _key(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def record(self, a: int, b: int, s: Sequence[int]) -> None:
        self._sets[self._key(a, b)] = tuple(s)

    def get(self, a: int, b: int) -> tuple[int, ...] | None:
        return self._sets.get(self._key(a, b))

    def require(self, a: int, b: int) -> tuple[int, ...]:
        s = self.get(a, b)
        if s is None:
            raise MissingSepset(f"pair ({a},{b}) was never separated; skeleton stage is broken")
        return s

    def items(self) -> list[tuple[tuple[int, int], tuple[int, ...]]]:
        return sorted(self._sets.items())

    def __len__(self) -> int:
        return len(self._sets)

    def __contains__(self, pair) -> bool:
        return self._key(*pair) in self._sets

    def __eq__(self, other):
        if not isinstance(other, SepsetTable):
            return NotImplemented
        return self._sets == other._sets

    def __repr__(self):
        return f"SepsetTable({self._sets!r})"


@dataclass
class RunConfig:
    """Knobs for one pipeline run.

    k=None means the effective maximum, card(visible) - 2, which makes
    the bounded search equivalent to the unrestricted one.
    """

    k: int | None = None
    adjacency_restricted: bool = False
    trace: bool = False
    jobs: int = 1
    expand_bidirected: bool = True

    def __post_init__(self):
        if self.k is not None and self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    def resolve_k(self, n_visible: int) -> int:
        if self.k is None:
            return max(n_visible - 2, 0)
        return self.k


@dataclass
class RunResult:
    """Everything a pipeline run produces.

    closure_pi holds the marks right after the rule closure (stage D):
    the only marks that carry evidence, suitable for auditing against a
    reference projection.  poipg adds stage E's hardening, final_pi adds
    stage F's elimination-driven orientations, and dag is the fully
    directed output with bidirected edges expanded to hidden causes.
    """

    k: int
    backend_descriptor: str
    closure_pi: MixedGraph
    poipg: MixedGraph
    final_pi: MixedGraph
    dag: Dag
    sepsets: SepsetTable
    trace: tuple[TraceEvent, ...]
    removal_order: tuple[int, ...]

    def trace_lines(self) -> list[str]:
        return [e.line() for e in self.trace]


def _note(trace, step: str, nodes: tuple[int, ...], old: str, new: str) -> None:
    if trace is not None:
        trace.append(TraceEvent(step, nodes, old, new))


def _edge_render(g: MixedGraph, a: int, b: int) -> tuple[tuple[int, int], str]:
    lo, hi = (a, b) if a < b else (b, a)
    return (lo, hi), mark_chars(*g.edge_marks(lo, hi))


def _set_arrow(g: MixedGraph, trace, step: str, at: int, toward: int) -> bool:
    """Put an arrowhead at `at` on edge {at, toward}; False if already there."""
    if g.get_mark(at, toward) is Mark.ARROW:
        return False
    nodes, old = _edge_render(g, at, toward)
    g.set_mark(at, toward, Mark.ARROW)
    _note(trace, step, nodes, old, _edge_render(g, at, toward)[1])
    return True


def _orient_out(g: MixedGraph, trace, step: str, frm: int, to: int) -> bool:
    """Orient edge {frm, to} as frm -> to; False if already oriented so."""
    m_frm = g.get_mark(frm, to)
    m_to = g.get_mark(to, frm)
    if m_frm is Mark.TAIL and m_to is Mark.ARROW:
        return False
    nodes, old = _edge_render(g, frm, to)
    # arrow first: a tail opposite a circle is outside the edge vocabulary
    g.set_mark(to, frm, Mark.ARROW)
    g.set_mark(frm, to, Mark.TAIL)
    _note(trace, step, nodes, old, _edge_render(g, frm, to)[1])
    return True


def _first_separator(backend, a: int, b: int, candidates: Sequence[int], k: int):
    for s in separator_subsets(candidates, k):
        if backend.query(a, b, s):
            return s
    return None


def step_ab_skeleton(
    backend,
    variables: Sequence[Variable],
    k: int,
    adjacency_restricted: bool = False,
    jobs: int = 1,
    trace=None,
) -> tuple[MixedGraph, SepsetTable]:
    """Complete graph minus every pair separable at cardinality <= k.

    Surviving edges are circle/circle.  By default the candidate pool for
    a pair is every other variable, which makes the per-pair searches
    independent and safe to farm out across threads; results are applied
    in ascending pair order either way, so the thread count never changes
    the outcome.  The adjacency-restricted variant draws candidates from
    the current neighborhoods, level by level, and stays sequential.
    """
    g = MixedGraph.complete(variables)
    sepsets = SepsetTable()
    n = g.n_nodes
    pairs = list(combinations(range(n), 2))

    def drop(a: int, b: int, s) -> None:
        g.remove_edge(a, b)
        sepsets.record(a, b, s)
        _note(trace, "B", (a, b), "oo", "absent")

    if adjacency_restricted:
        for size in range(k + 1):
            for a, b in pairs:
                if not g.has_edge(a, b):
                    continue
                pool = sorted((set(g.neighbors(a)) | set(g.neighbors(b))) - {a, b})
                if len(pool) < size:
                    continue
                for s in combinations(pool, size):
                    if backend.query(a, b, s):
                        drop(a, b, s)
                        break
        return g, sepsets

    def search(pair):
        a, b = pair
        pool = [v for v in range(n) if v not in (a, b)]
        return _first_separator(backend, a, b, pool, k)

    if jobs > 1 and pairs:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            found = dict(zip(pairs, pool.map(search, pairs)))
    else:
        found = {pair: search(pair) for pair in pairs}
    for a, b in pairs:
        s = found[(a, b)]
        if s is not None:
            drop(a, b, s)
    return g, sepsets


def step_c_colliders(g: MixedGraph, sepsets: SepsetTable, trace=None) -> MixedGraph:
    """Orient or constrain every unshielded triple from the separator table."""
    for b in range(g.n_nodes):
        adj = g.neighbors(b)
        for a, c in combinations(adj, 2):
            if g.has_edge(a, c):
                continue
            if b in sepsets.require(a, c):
                g.add_constraint(a, b, c)
                x, y = (a, c) if a < c else (c, a)
                _note(trace, "C", (x, b, y), "", "noncollider")
            else:
                _set_arrow(g, trace, "C", b, a)
                _set_arrow(g, trace, "C", b, c)
    return g


def _rule_d1(g: MixedGraph, trace) -> bool:
    # directed path from a to b plus an edge between them: arrowhead at b
    n = g.n_nodes
    for a in range(n):
        for b in range(n):
            if a == b or not g.has_edge(a, b):
                continue
            if g.get_mark(b, a) is Mark.ARROW:
                continue
            if g.has_directed_path(a, b):
                _set_arrow(g, trace, "D1", b, a)
                return True
    return False


def _rule_d2(g: MixedGraph, trace) -> bool:
    # collider a-b-c with a,c nonadjacent, plus a constrained midpoint d
    # between a and c, with d adjacent to b: arrowhead at b on {b,d}
    n = g.n_nodes
    for a, c in combinations(range(n), 2):
        if g.has_edge(a, c):
            continue
        for b in range(n):
            if b in (a, c) or not g.is_collider(a, b, c):
                continue
            for d in g.neighbors(b):
                if d in (a, c) or not g.has_constraint(a, d, c):
                    continue
                if g.get_mark(b, d) is Mark.ARROW:
                    continue
                _set_arrow(g, trace, "D2", b, d)
                return True
    return False


def _rule_d3(g: MixedGraph, sepsets: SepsetTable, trace) -> bool:
    # discriminating path from a to b for m, with m's path neighbors p, r
    # closing a triangle p-m-r: m inside Sepset(a,b) records the
    # non-collider constraint, m outside makes m a collider of p and r
    n = g.n_nodes
    for a in range(n):
        for b in range(n):
            if a == b or g.has_edge(a, b):
                continue
            for m in range(n):
                if m in (a, b):
                    continue
                for path in g.find_definite_discriminating_paths(a, b, m):
                    i = path.index(m)
                    p, r = path[i - 1], path[i + 1]
                    if not g.has_edge(p, r):
                        continue
                    if m in sepsets.require(a, b):
                        if g.has_constraint(p, m, r):
                            continue
                        g.add_constraint(p, m, r)
                        x, y = (p, r) if p < r else (r, p)
                        _note(trace, "D3", (x, m, y), "", "noncollider")
                        return True
                    changed = _set_arrow(g, trace, "D3", m, p)
                    changed = _set_arrow(g, trace, "D3", m, r) or changed
                    if changed:
                        return True
    return False


def _rule_d4(g: MixedGraph, trace) -> bool:
    # arrowhead into a constrained midpoint m from p forces m -> r
    for x, m, y in g.constraints():
        for p, r in ((x, y), (y, x)):
            if not g.has_edge(m, r):
                continue
            if g.get_mark(m, p) is not Mark.ARROW:
                continue
            if _orient_out(g, trace, "D4", m, r):
                return True
    return False


def step_d_closure(g: MixedGraph, sepsets: SepsetTable, trace=None) -> MixedGraph:
    """Apply the four orientation rules to a fixpoint.

    Rules are tried in priority order and only the first applicable
    instance (ascending index order within each rule) fires per pass;
    every change restarts the scan from the first rule.
    """
    while (
        _rule_d1(g, trace)
        or _rule_d2(g, trace)
        or _rule_d3(g, sepsets, trace)
        or _rule_d4(g, trace)
    ):
        pass
    return g


def step_e(g: MixedGraph, trace=None) -> MixedGraph:
    """Harden every circle opposite an arrowhead into a tail."""
    for a, b, ma, mb in list(g.edges()):
        if ma is Mark.CIRCLE and mb is Mark.ARROW:
            g.set_mark(a, b, Mark.TAIL)
            _note(trace, "E", (a, b), mark_chars(ma, mb), mark_chars(Mark.TAIL, mb))
        elif mb is Mark.CIRCLE and ma is Mark.ARROW:
            g.set_mark(b, a, Mark.TAIL)
            _note(trace, "E", (a, b), mark_chars(ma, mb), mark_chars(ma, Mark.TAIL))
    return g


def legally_removable(g: MixedGraph, a: int) -> bool:
    """No constraint centered on a, and no incident edge with an arrowhead
    at the far end."""
    if g.constraints_at_midpoint(a):
        return False
    return all(g.get_mark(b, a) is not Mark.ARROW for b in g.neighbors(a))


def step_f_extend(g: MixedGraph, trace=None) -> tuple[Dag, tuple[int, ...]]:
    """Empty a working copy by removing removable nodes; orient g fully.

    Bidirected edges leave the working copy up front (a hidden common
    cause makes neither endpoint an ancestor of the other, and the
    arrowheads would otherwise block both endpoints forever); constraints
    that lose an edge this way go with them.  Each deleted circle/circle
    edge {a,b}, a the deleted node, becomes a <- b in g.  Returns the
    output DAG, bidirected edges expanded to parentless hidden causes
    H_0, H_1, ... appended after the visible block, plus the node removal
    order.
    """
    work = g.copy()
    bidirected = [
        (a, b) for a, b, ma, mb in work.edges() if ma is Mark.ARROW and mb is Mark.ARROW
    ]
    for a, b in bidirected:
        work.remove_edge(a, b)
    work.prune_constraints()

    remaining = list(range(work.n_nodes))
    order: list[int] = []
    while remaining:
        pick = next((v for v in remaining if legally_removable(work, v)), None)
        if pick is None:
            raise NoRemovableNode(
                f"{len(remaining)} nodes left, none removable", remaining, graph=work
            )
        for b in work.neighbors(pick):
            ma, mb = work.edge_marks(pick, b)
            if ma is Mark.CIRCLE and mb is Mark.CIRCLE:
                nodes, old = _edge_render(g, pick, b)
                g.set_mark(pick, b, Mark.ARROW)
                g.set_mark(b, pick, Mark.TAIL)
                _note(trace, "F", nodes, old, _edge_render(g, pick, b)[1])
            work.remove_edge(pick, b)
        work.drop_constraints_involving(pick)
        remaining.remove(pick)
        order.append(pick)

    for a, b, ma, mb in g.edges():
        assert ma is not Mark.CIRCLE and mb is not Mark.CIRCLE, (a, b, ma, mb)

    nodes = list(g.nodes)
    edges = list(g.directed_edges())
    base = len(nodes)
    for j, (a, b) in enumerate(bidirected):
        h = Variable(base + j, f"H_{j}", arity=2, hidden=True)
        nodes.append(h)
        edges.append((h.index, a))
        edges.append((h.index, b))
    return Dag(nodes, edges), tuple(order)


def run(config: RunConfig, backend, variables: Sequence[Variable] | None = None) -> RunResult:
    """Full pipeline over the backend's variables (or an explicit list)."""
    if variables is None:
        variables = backend.variables
    variables = list(variables)
    for v in variables:
        if v.hidden:
            raise ValueError(f"pipeline variables must be visible, got hidden {v.name!r}")
    k = config.resolve_k(len(variables))
    trace: list[TraceEvent] = []
    g, sepsets = step_ab_skeleton(
        backend,
        variables,
        k,
        adjacency_restricted=config.adjacency_restricted,
        jobs=config.jobs,
        trace=trace,
    )
    step_c_colliders(g, sepsets, trace)
    step_d_closure(g, sepsets, trace)
    closure_pi = g.copy()
    step_e(g, trace)
    poipg = g.copy()
    dag, order = step_f_extend(g, trace)
    return RunResult(
        k=k,
        backend_descriptor=getattr(backend, "descriptor", "unknown"),
        closure_pi=closure_pi,
        poipg=poipg,
        final_pi=g,
        dag=dag,
        sepsets=sepsets,
        trace=tuple(trace),
        removal_order=order,
    )
