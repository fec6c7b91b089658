"""Graph types: ground-truth DAGs and endpoint-marked mixed graphs.

A mixed graph keeps one edge per unordered node pair with a mark at each
end (tail, arrow, circle) plus a set of non-collider constraints: the
triple (a, b, c) records that the edges a-b and b-c must never meet
head-to-head at b.  Legal edge shapes are directed (tail/arrow),
bidirected (arrow/arrow), partially directed (circle/arrow) and unoriented
(circle/circle); tail/tail and tail/circle edges are rejected outright.

Marks only ever harden: a circle may become a tail or an arrow, but a tail
or arrow can never be rewritten to anything else.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import EdgeAbsent, GraphError, IllegalEdgeType, IllegalRemark


class Mark(enum.Enum):
    """Mark at one end of a mixed-graph edge."""

    TAIL = "tail"
    ARROW = "arrow"
    CIRCLE = "circle"

    @property
    def char(self) -> str:
        return _MARK_CHAR[self]

    @classmethod
    def from_word(cls, word: str) -> "Mark":
        try:
            return cls(word)
        except ValueError:
            raise GraphError(f"unknown mark {word!r}") from None

    @classmethod
    def from_char(cls, ch: str) -> "Mark":
        if ch == "-":
            return cls.TAIL
        if ch in (">", "<"):
            return cls.ARROW
        if ch == "o":
            return cls.CIRCLE
        raise GraphError(f"unknown mark character {ch!r}")


_MARK_CHAR = {Mark.TAIL: "-", Mark.ARROW: ">", Mark.CIRCLE: "o"}

# The only edge shapes a mixed graph may hold, as (mark_low, mark_high) pairs.
_LEGAL_PAIRS = frozenset(
    {
        (Mark.TAIL, Mark.ARROW),
        (Mark.ARROW, Mark.TAIL),
        (Mark.ARROW, Mark.ARROW),
        (Mark.CIRCLE, Mark.ARROW),
        (Mark.ARROW, Mark.CIRCLE),
        (Mark.CIRCLE, Mark.CIRCLE),
    }
)


def mark_chars(ma: Mark, mb: Mark) -> str:
    """Two-character rendering of an edge's marks, e.g. 'o>' or '->'."""
    return ma.char + mb.char


@dataclass(frozen=True)
class Variable:
    """A discrete variable; hidden ones never appear in queries or outputs."""

    index: int
    name: str
    arity: int = 2
    hidden: bool = False

    def __post_init__(self):
        if self.arity < 2:
            raise GraphError(f"variable {self.name!r}: arity must be >= 2, got {self.arity}")


def _check_nodes(nodes: list[Variable]) -> None:
    seen_hidden = False
    for pos, v in enumerate(nodes):
        if v.index != pos:
            raise GraphError(f"node at position {pos} has index {v.index}; indices must be 0..n-1 in order")
        if v.hidden:
            seen_hidden = True
        elif seen_hidden:
            raise GraphError(f"visible variable {v.name!r} follows a hidden one; hidden variables must come last")


def _toposort(n: int, children: list[list[int]]) -> list[int] | None:
    indegree = [0] * n
    for kids in children:
        for w in kids:
            indegree[w] += 1
    ready = [v for v in range(n) if indegree[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in children[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                heapq.heappush(ready, w)
    return order if len(order) == n else None


class Dag:
    """Fully oriented acyclic graph: ordered (parent, child) edges.

    Hidden variables, when present, occupy the highest indices, so the
    visible block is always 0..n_visible-1.
    """

    def __init__(self, nodes: Iterable[Variable], edges: Iterable[tuple[int, int]] = ()):
        self.nodes = list(nodes)
        _check_nodes(self.nodes)
        n = len(self.nodes)
        self.edges: set[tuple[int, int]] = set()
        self.parents: list[list[int]] = [[] for _ in range(n)]
        self.children: list[list[int]] = [[] for _ in range(n)]
        for p, c in edges:
            if p == c:
                raise GraphError(f"self loop at node {p}")
            if not (0 <= p < n and 0 <= c < n):
                raise GraphError(f"edge ({p},{c}) outside node range 0..{n - 1}")
            if (p, c) in self.edges:
                raise GraphError(f"duplicate edge ({p},{c})")
            self.edges.add((p, c))
        for p, c in self.edges:
            self.parents[c].append(p)
            self.children[p].append(c)
        for lst in self.parents:
            lst.sort()
        for lst in self.children:
            lst.sort()
        if _toposort(n, self.children) is None:
            raise GraphError("graph has a directed cycle")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_visible(self) -> int:
        return sum(1 for v in self.nodes if not v.hidden)

    def visible_variables(self) -> list[Variable]:
        return [v for v in self.nodes if not v.hidden]

    def hidden_variables(self) -> list[Variable]:
        return [v for v in self.nodes if v.hidden]

    def topological_order(self) -> list[int]:
        order = _toposort(self.n_nodes, self.children)
        assert order is not None  # constructor rejected cycles
        return order

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def has_directed_path(self, a: int, b: int) -> bool:
        """True iff b is reachable from a along one or more edges."""
        if a == b:
            raise GraphError("endpoints must be distinct")
        stack = [a]
        seen = {a}
        while stack:
            v = stack.pop()
            for w in self.children[v]:
                if w == b:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n_nodes}, edges={sorted(self.edges)})"


class TrueDag(Dag):
    """Ground-truth causal model: what oracle queries and samplers run on."""


class MixedGraph:
    """Endpoint-marked graph over visible variables, with constraints."""

    def __init__(self, nodes: Iterable[Variable]):
        self.nodes = list(nodes)
        _check_nodes(self.nodes)
        for v in self.nodes:
            if v.hidden:
                raise GraphError(f"mixed graphs hold visible variables only, got hidden {v.name!r}")
        self._edges: dict[tuple[int, int], tuple[Mark, Mark]] = {}
        self._adj: list[set[int]] = [set() for _ in self.nodes]
        self._constraints: set[tuple[int, int, int]] = set()

    @classmethod
    def complete(cls, nodes: Iterable[Variable]) -> "MixedGraph":
        """Complete graph with every edge unoriented (circle/circle)."""
        g = cls(nodes)
        n = len(g.nodes)
        for a in range(n):
            for b in range(a + 1, n):
                g.add_edge(a, b, Mark.CIRCLE, Mark.CIRCLE)
        return g

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def _key(self, a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def has_edge(self, a: int, b: int) -> bool:
        return self._key(a, b) in self._edges

    def add_edge(self, a: int, b: int, mark_a: Mark, mark_b: Mark) -> None:
        if a == b:
            raise GraphError(f"self loop at node {a}")
        n = self.n_nodes
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError(f"edge ({a},{b}) outside node range 0..{n - 1}")
        key = self._key(a, b)
        if key in self._edges:
            raise GraphError(f"edge {key} already present")
        pair = (mark_a, mark_b) if a < b else (mark_b, mark_a)
        if pair not in _LEGAL_PAIRS:
            raise IllegalEdgeType(f"edge {key} with marks {mark_chars(*pair)} is outside the vocabulary")
        self._edges[key] = pair
        self._adj[a].add(b)
        self._adj[b].add(a)

    def remove_edge(self, a: int, b: int) -> None:
        key = self._key(a, b)
        if key not in self._edges:
            raise EdgeAbsent(f"no edge between {a} and {b}")
        del self._edges[key]
        self._adj[a].discard(b)
        self._adj[b].discard(a)

    def edge_marks(self, a: int, b: int) -> tuple[Mark, Mark]:
        """Marks of edge {a,b} as (mark at a, mark at b)."""
        key = self._key(a, b)
        try:
            lo, hi = self._edges[key]
        except KeyError:
            raise EdgeAbsent(f"no edge between {a} and {b}") from None
        return (lo, hi) if a < b else (hi, lo)

    def get_mark(self, at: int, toward: int) -> Mark | None:
        """Mark at `at`'s end of edge {at, toward}; None when nonadjacent."""
        key = self._key(at, toward)
        pair = self._edges.get(key)
        if pair is None:
            return None
        return pair[0] if at == key[0] else pair[1]

    def set_mark(self, at: int, toward: int, mark: Mark) -> None:
        """Harden the mark at `at`'s end of edge {at, toward}.

        Re-setting the same value is a no-op; replacing a tail or arrow
        with a different mark raises IllegalRemark.
        """
        key = self._key(at, toward)
        pair = self._edges.get(key)
        if pair is None:
            raise EdgeAbsent(f"no edge between {at} and {toward}")
        pos = 0 if at == key[0] else 1
        current = pair[pos]
        if current is mark:
            return
        if current is not Mark.CIRCLE:
            raise IllegalRemark(
                f"edge {key}: mark at {at} is {current.value}, cannot become {mark.value}"
            )
        new_pair = (mark, pair[1]) if pos == 0 else (pair[0], mark)
        if new_pair not in _LEGAL_PAIRS:
            raise IllegalEdgeType(
                f"edge {key} would become {mark_chars(*new_pair)}, outside the vocabulary"
            )
        self._edges[key] = new_pair

    def neighbors(self, a: int) -> list[int]:
        return sorted(self._adj[a])

    def edges(self) -> Iterator[tuple[int, int, Mark, Mark]]:
        """Edges as (a, b, mark_a, mark_b) with a < b, ascending."""
        for (a, b) in sorted(self._edges):
            lo, hi = self._edges[(a, b)]
            yield a, b, lo, hi

    def directed_edges(self) -> Iterator[tuple[int, int]]:
        """Fully oriented edges as (tail_end, arrow_end) pairs, ascending."""
        for a, b, ma, mb in self.edges():
            if ma is Mark.TAIL and mb is Mark.ARROW:
                yield a, b
            elif ma is Mark.ARROW and mb is Mark.TAIL:
                yield b, a

    def add_constraint(self, a: int, b: int, c: int) -> None:
        """Record that edges a-b and b-c must not meet head-to-head at b."""
        if len({a, b, c}) != 3:
            raise GraphError(f"constraint nodes must be distinct, got ({a},{b},{c})")
        if not (self.has_edge(a, b) and self.has_edge(b, c)):
            raise EdgeAbsent(f"constraint ({a},{b},{c}) needs both edges present")
        x, y = (a, c) if a < c else (c, a)
        self._constraints.add((x, b, y))

    def has_constraint(self, a: int, b: int, c: int) -> bool:
        x, y = (a, c) if a < c else (c, a)
        return (x, b, y) in self._constraints

    def constraints(self) -> list[tuple[int, int, int]]:
        """All constraints as (x, midpoint, y) with x < y, ascending."""
        return sorted(self._constraints)

    def constraints_at_midpoint(self, b: int) -> list[tuple[int, int, int]]:
        return sorted(t for t in self._constraints if t[1] == b)

    def drop_constraints_involving(self, v: int) -> None:
        self._constraints = {t for t in self._constraints if v not in t}

    def prune_constraints(self) -> None:
        """Drop constraints whose two edges are no longer both present."""
        self._constraints = {
            (x, b, y)
            for (x, b, y) in self._constraints
            if self.has_edge(x, b) and self.has_edge(b, y)
        }

    def is_collider(self, a: int, b: int, c: int) -> bool:
        """True iff both edges a-b and c-b exist and carry arrowheads at b."""
        return (
            self.get_mark(b, a) is Mark.ARROW
            and self.get_mark(b, c) is Mark.ARROW
            and a != c
        )

    def is_definite_noncollider(self, a: int, b: int, c: int) -> bool:
        """b cannot be head-to-head between a and c: witnessed by a recorded
        constraint or by a tail at b on either edge."""
        if self.has_constraint(a, b, c):
            return True
        return self.get_mark(b, a) is Mark.TAIL or self.get_mark(b, c) is Mark.TAIL

    def has_directed_path(self, a: int, b: int) -> bool:
        """True iff b is reachable from a along fully oriented tail->arrow edges."""
        if a == b:
            raise GraphError("endpoints must be distinct")
        stack = [a]
        seen = {a}
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                if w in seen:
                    continue
                ma, mw = self.edge_marks(v, w)
                if ma is Mark.TAIL and mw is Mark.ARROW:
                    if w == b:
                        return True
                    seen.add(w)
                    stack.append(w)
        return False

    def find_definite_discriminating_paths(self, a: int, b: int, m: int) -> list[tuple[int, ...]]:
        """Paths a, v1, ..., vj, m, b that pin down m's status at b's edge.

        Requires a and b nonadjacent, m adjacent to b, at least one vertex
        between a and m, and every such vertex to be a collider on the
        path and a parent of b.  That shape makes the path's blocking
        behavior hinge on m alone, which is what the discrimination rule
        needs; admitting definite non-colliders in the interior would let
        a conditioning set block the path away from m and the inference
        through.  Depth-first search with index-ascending neighbor order;
        the list comes back in discovery order.
        """
        if len({a, b, m}) != 3:
            raise GraphError("a, b, m must be distinct")
        if self.has_edge(a, b) or not self.has_edge(m, b):
            return []
        paths: list[tuple[int, ...]] = []
        on_path = {a}
        path = [a]

        def is_parent_of_b(v: int) -> bool:
            return self.get_mark(v, b) is Mark.TAIL and self.get_mark(b, v) is Mark.ARROW

        def extend() -> None:
            last = path[-1]
            for nxt in self.neighbors(last):
                if nxt in on_path or nxt == b:
                    continue
                # stepping past `last` fixes both its path edges; interior
                # vertices before m must collide on the path
                if len(path) >= 2 and not self.is_collider(path[-2], last, nxt):
                    continue
                if nxt == m:
                    if len(path) >= 2:
                        paths.append(tuple(path) + (m, b))
                    continue
                if not is_parent_of_b(nxt):
                    continue
                on_path.add(nxt)
                path.append(nxt)
                extend()
                path.pop()
                on_path.discard(nxt)

        extend()
        return paths

    def copy(self) -> "MixedGraph":
        g = MixedGraph(self.nodes)
        g._edges = dict(self._edges)
        g._adj = [set(s) for s in self._adj]
        g._constraints = set(self._constraints)
        return g

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self._edges == other._edges
            and self._constraints == other._constraints
        )

    def __repr__(self):
        shapes = ", ".join(f"{a}{mark_chars(ma, mb)}{b}" for a, b, ma, mb in self.edges())
        return f"MixedGraph(n={self.n_nodes}, [{shapes}])"
