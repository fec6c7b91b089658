"""Trail-based separation queries on a DAG and bounded separator search.

Separation follows the standard reading: a trail is active given a
conditioning set when every collider on it lies in the set or has a
descendant there, and no other vertex on it lies in the set; two nodes are
separated when no active trail joins them.  Queries walk (node, direction)
states, linear in the number of edges, with the destination treated as
absorbing so that the direction of the final edge is reported faithfully.
An exhaustive trail enumerator lives in the test suite as the independent
check of this implementation.

Everything here also serves the brute-force construction of the
bounded-separator projection of a ground-truth DAG onto its visible
variables, the reference object the orientation rules are audited against.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import PropertyViolation
from .graphs import Dag, Mark, MixedGraph

_UP = 0    # last edge pointed away from the node
_DOWN = 1  # last edge pointed into the node


def _ancestors_of(g: Dag, seeds: Iterable[int]) -> set[int]:
    out = set(seeds)
    stack = list(out)
    while stack:
        v = stack.pop()
        for p in g.parents[v]:
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def _arrival_flags(g: Dag, src: int, dst: int, s: set[int]) -> tuple[bool, bool]:
    """Whether an active trail from src reaches dst (into dst, out of dst).

    dst is absorbing: trails may end there but never pass through, so each
    flag reflects a genuine simple trail whose final edge has that
    direction.
    """
    anc = _ancestors_of(g, s)
    into = out = False
    n = g.n_nodes
    seen = bytearray(2 * n)
    stack: list[tuple[int, int]] = [(src, _UP)]
    seen[2 * src + _UP] = 1
    while stack:
        v, d = stack.pop()
        if v == dst:
            if d == _DOWN:
                into = True
            else:
                out = True
            if into and out:
                break
            continue
        if d == _UP:
            if v not in s:
                for p in g.parents[v]:
                    if not seen[2 * p + _UP]:
                        seen[2 * p + _UP] = 1
                        stack.append((p, _UP))
                for c in g.children[v]:
                    if not seen[2 * c + _DOWN]:
                        seen[2 * c + _DOWN] = 1
                        stack.append((c, _DOWN))
        else:
            if v not in s:
                for c in g.children[v]:
                    if not seen[2 * c + _DOWN]:
                        seen[2 * c + _DOWN] = 1
                        stack.append((c, _DOWN))
            if v in anc:
                for p in g.parents[v]:
                    if not seen[2 * p + _UP]:
                        seen[2 * p + _UP] = 1
                        stack.append((p, _UP))
    return into, out


def _check_query(g: Dag, a: int, b: int, s: set[int]) -> None:
    if a == b:
        raise ValueError("query endpoints must be distinct")
    if a in s or b in s:
        raise ValueError("conditioning set must not contain the endpoints")
    n = g.n_nodes
    for v in (a, b, *s):
        if not (0 <= v < n):
            raise ValueError(f"node {v} outside graph range 0..{n - 1}")


def d_separated(g: Dag, a: int, b: int, s: Iterable[int] = ()) -> bool:
    """True iff every trail between a and b is blocked given s."""
    s = set(s)
    _check_query(g, a, b, s)
    into, out = _arrival_flags(g, a, b, s)
    return not (into or out)


def active_trail_into(g: Dag, src: int, dst: int, s: Iterable[int] = ()) -> bool:
    """True iff some active trail from src ends in an edge pointing into dst."""
    s = set(s)
    _check_query(g, src, dst, s)
    into, _ = _arrival_flags(g, src, dst, s)
    return into


def separator_subsets(candidates: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
    """Subsets of the candidates up to cardinality k, in the canonical
    order: ascending size, lexicographic within each size."""
    pool = sorted(candidates)
    for size in range(min(k, len(pool)) + 1):
        yield from combinations(pool, size)


def find_separator(
    g: Dag,
    a: int,
    b: int,
    k: int | None = None,
    candidates: Sequence[int] | None = None,
) -> tuple[int, ...] | None:
    """First subset, in canonical order, of cardinality <= k separating a, b.

    k=None means the effective maximum, n_visible - 2.  Candidates default
    to all visible variables except the endpoints.
    """
    if candidates is None:
        candidates = [v for v in range(g.n_visible) if v not in (a, b)]
    if k is None:
        k = max(g.n_visible - 2, 0)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    for s in separator_subsets(candidates, k):
        if d_separated(g, a, b, s):
            return s
    return None


def rk_including_path_graph(g: Dag, k: int | None = None) -> MixedGraph:
    """Exhaustive bounded-separator projection of g onto its visible block.

    A pair keeps an edge iff no visible subset of cardinality <= k
    separates it.  Each end is a tail iff some visible subset of
    cardinality <= k-1 blocks every trail arriving into that end from the
    other; otherwise it is an arrow.  Every edge comes out directed or
    bidirected, never circle-marked.
    """
    m = g.n_visible
    if k is None:
        k = max(m - 2, 0)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    pi = MixedGraph(g.visible_variables())
    for a, b in combinations(range(m), 2):
        others = [v for v in range(m) if v not in (a, b)]
        if any(d_separated(g, a, b, s) for s in separator_subsets(others, k)):
            continue
        mark_a = Mark.ARROW
        mark_b = Mark.ARROW
        if k >= 1:
            if any(not active_trail_into(g, b, a, s) for s in separator_subsets(others, k - 1)):
                mark_a = Mark.TAIL
            if any(not active_trail_into(g, a, b, s) for s in separator_subsets(others, k - 1)):
                mark_b = Mark.TAIL
        if mark_a is Mark.TAIL and mark_b is Mark.TAIL:
            raise PropertyViolation(
                f"edge {{{a},{b}}} came out tail/tail; projection edges must be directed or bidirected",
                [("full-orientation", (a, b), "tail/tail")],
            )
        pi.add_edge(a, b, mark_a, mark_b)
    return pi
