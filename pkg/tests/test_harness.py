"""Model generation, exact marginals, sampling, metrics, property audits."""

from itertools import product

import numpy as np
import pytest

from rkcia.errors import NodeSetMismatch, PropertyViolation, StateSpaceTooLarge
from rkcia.graphs import Mark, MixedGraph, TrueDag, Variable
from rkcia.harness import (
    Metrics,
    ParamDag,
    as_marked_graph,
    compare,
    format_metrics_table,
    forward_sample,
    marginalize,
    random_cpts,
    random_dag,
    sweep_instances,
    verify_properties,
)


def binary_vars(n, hidden_from=None):
    cut = n if hidden_from is None else hidden_from
    return [Variable(i, f"X{i}", 2, hidden=i >= cut) for i in range(n)]


def test_random_dag_layout():
    g = random_dag(5, 2, seed=3)
    assert g.n_nodes == 7 and g.n_visible == 5
    assert [v.name for v in g.nodes] == ["X0", "X1", "X2", "X3", "X4", "L0", "L1"]
    assert [v.hidden for v in g.nodes] == [False] * 5 + [True] * 2
    for h in (5, 6):
        assert g.parents[h] == []
        kids = g.children[h]
        assert len(kids) >= 2 and all(c < 5 for c in kids)


def test_random_dag_determinism_and_validation():
    a = random_dag(6, 1, seed=9)
    b = random_dag(6, 1, seed=9)
    assert a == b
    c = random_dag(6, 1, seed=10)
    assert a.sorted_edges() != c.sorted_edges()
    with pytest.raises(ValueError):
        random_dag(0)
    with pytest.raises(ValueError):
        random_dag(3, edge_prob=1.5)


def test_random_dag_edge_prob_extremes():
    full = random_dag(4, 1, edge_prob=1.0, seed=0)
    want = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert [e for e in full.sorted_edges() if e[0] < 4] == want
    assert sorted(full.children[4]) == [0, 1, 2, 3]
    empty = random_dag(4, edge_prob=0.0, seed=0)
    assert empty.sorted_edges() == []


def test_random_dag_unrestricted_hidden():
    g = random_dag(3, 2, edge_prob=1.0, confounders_only=False, seed=0)
    n = 5
    assert g.sorted_edges() == [(i, j) for i in range(n) for j in range(i + 1, n)]
    assert g.parents[3] == [0, 1, 2]


def test_random_cpts_margin_and_validation():
    g = TrueDag(binary_vars(3), [(0, 2), (1, 2)])
    p = random_cpts(g, seed=1, min_prob=0.05)
    assert p.cpts[0].shape == (1, 2)
    assert p.cpts[2].shape == (4, 2)
    for t in p.cpts:
        assert np.all(t >= 0.05 - 1e-12)
        assert np.allclose(t.sum(axis=1), 1.0, atol=1e-12)
    again = random_cpts(g, seed=1, min_prob=0.05)
    for t1, t2 in zip(p.cpts, again.cpts):
        assert np.array_equal(t1, t2)
    with pytest.raises(ValueError):
        random_cpts(g, min_prob=0.5)


def test_param_dag_validation():
    g = TrueDag(binary_vars(2), [(0, 1)])
    with pytest.raises(ValueError):
        ParamDag(g, [np.array([[0.5, 0.5]])])
    with pytest.raises(ValueError):
        ParamDag(g, [np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]])])
    with pytest.raises(ValueError):
        ParamDag(g, [np.array([[0.5, 0.5]]), np.array([[0.6, 0.5], [0.5, 0.5]])])


def test_marginalize_matches_state_enumeration():
    # visible 0, 1, 2 and hidden 3 with 3 -> 0, 3 -> 2, 0 -> 1: walk every
    # joint state by hand, multiply CPT entries, sum out the hidden axis
    g = TrueDag(binary_vars(4, hidden_from=3), [(3, 0), (3, 2), (0, 1)])
    p = random_cpts(g, seed=7)
    arities = [2, 2, 2, 2]

    def row_of(parents, state):
        r = 0
        for q in parents:
            r = r * arities[q] + state[q]
        return r

    table = np.zeros((2, 2, 2))
    for state in product(range(2), repeat=4):
        prob = 1.0
        for v in range(4):
            prob *= p.cpts[v][row_of(g.parents[v], state), state[v]]
        table[state[:3]] += prob
    dist = marginalize(p)
    assert dist.variables == g.visible_variables()
    assert np.allclose(dist.table(), table, atol=1e-12)
    assert abs(dist.table().sum() - 1.0) < 1e-9


def test_marginalize_rejects_huge_state_spaces():
    g = TrueDag(binary_vars(21), [])
    p = random_cpts(g)
    with pytest.raises(StateSpaceTooLarge):
        marginalize(p)


def test_forward_sample_shape_and_determinism():
    g = TrueDag(binary_vars(4, hidden_from=3), [(3, 0), (3, 2), (0, 1)])
    p = random_cpts(g, seed=7)
    d = forward_sample(p, 50, seed=2)
    assert d.data.shape == (50, 3)
    assert d.variables == g.visible_variables()
    again = forward_sample(p, 50, seed=2)
    assert np.array_equal(d.data, again.data)
    other = forward_sample(p, 50, seed=3)
    assert not np.array_equal(d.data, other.data)
    with pytest.raises(ValueError):
        forward_sample(p, 0)


def test_forward_sample_tracks_the_exact_marginal():
    g = TrueDag(binary_vars(2), [(0, 1)])
    p = random_cpts(g, seed=5)
    exact = marginalize(p).table()
    d = forward_sample(p, 40000, seed=11)
    freq = np.zeros((2, 2))
    for x0, x1 in d.data:
        freq[x0, x1] += 1
    freq /= d.n_samples
    assert np.abs(freq - exact).max() < 0.02


def test_metrics_fields():
    m = Metrics(1.0, 0.75, 2, 1, 0.9)
    assert abs(m.skeleton_f1() - 6.0 / 7.0) < 1e-12
    assert Metrics(0.0, 0.0, 0, 3, 1.0).skeleton_f1() == 0.0
    d = m.as_dict()
    assert d["extra_edges"] == 2 and d["missing_edges"] == 1
    assert abs(d["skeleton_f1"] - 6.0 / 7.0) < 1e-12


def test_compare_hand_case():
    ref = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    res = MixedGraph(binary_vars(3))
    res.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    res.add_edge(0, 2, Mark.TAIL, Mark.ARROW)
    m = compare(res, ref)
    assert m.skeleton_precision == 0.5
    assert m.skeleton_recall == 0.5
    assert m.extra_edges == 1 and m.missing_edges == 1
    assert m.orientation_agreement == 1.0
    assert m.skeleton_f1() == 0.5


def test_compare_identity_and_empty():
    g = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    m = compare(g, g)
    assert m.as_dict() == {
        "skeleton_precision": 1.0,
        "skeleton_recall": 1.0,
        "skeleton_f1": 1.0,
        "extra_edges": 0,
        "missing_edges": 0,
        "orientation_agreement": 1.0,
    }
    empty = TrueDag(binary_vars(3), [])
    m = compare(empty, empty)
    assert m.skeleton_precision == 1.0 and m.skeleton_recall == 1.0


def test_compare_counts_mark_disagreement():
    ref = MixedGraph(binary_vars(2))
    ref.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    res = MixedGraph(binary_vars(2))
    res.add_edge(0, 1, Mark.ARROW, Mark.ARROW)
    m = compare(res, ref)
    assert m.skeleton_precision == 1.0 and m.orientation_agreement == 0.0


def test_compare_rejects_mismatched_variables():
    with pytest.raises(NodeSetMismatch):
        compare(TrueDag(binary_vars(3), []), TrueDag(binary_vars(4), []))


def test_as_marked_graph_confounder_semantics():
    g = TrueDag(binary_vars(4, hidden_from=3), [(0, 1), (3, 1), (3, 2)])
    marked = as_marked_graph(g)
    assert marked.n_nodes == 3
    assert marked.edge_marks(0, 1) == (Mark.TAIL, Mark.ARROW)
    assert marked.edge_marks(1, 2) == (Mark.ARROW, Mark.ARROW)
    # a directed edge between the children wins over the bidirected mark
    g2 = TrueDag(binary_vars(4, hidden_from=3), [(0, 1), (1, 2), (3, 1), (3, 2)])
    marked2 = as_marked_graph(g2)
    assert marked2.edge_marks(1, 2) == (Mark.TAIL, Mark.ARROW)
    passthrough = MixedGraph(binary_vars(2))
    assert as_marked_graph(passthrough) is passthrough
    with pytest.raises(TypeError):
        as_marked_graph(42)


def test_format_metrics_table_frozen():
    text = format_metrics_table([("m", Metrics(1.0, 1.0, 0, 0, 1.0))])
    assert text == (
        "label  precision  recall  f1      extra  missing  orient\n"
        "m      1.0000     1.0000  1.0000  0      0        1.0000"
    )
    two = format_metrics_table(
        [
            ("oracle k=1", Metrics(1.0, 0.75, 2, 1, 0.9)),
            ("g2", Metrics(0.5, 0.5, 1, 1, 1.0)),
        ]
    )
    lines = two.splitlines()
    assert len(lines) == 3
    assert lines[1].split() == ["oracle", "k=1", "1.0000", "0.7500", "0.8571", "2", "1", "0.9000"]
    assert lines[2].split() == ["g2", "0.5000", "0.5000", "0.5000", "1", "1", "1.0000"]


def test_verify_properties_clean_chain():
    g = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    report = verify_properties(g, 1)
    assert report.ok
    assert report.k == 1 and report.n_edges == 2
    assert report.checked == {
        "full-orientation": 2,
        "directed-path": 2,
        "collider-sepset": 0,
        "noncollider-sepset": 1,
        "acyclic": 1,
    }
    report.raise_if_failed()
    assert report.lines()[0] == "k=1: 2 projected edges"


def test_verify_properties_default_k():
    g = TrueDag(binary_vars(5), [(0, 1), (1, 2), (2, 3), (3, 4)])
    assert verify_properties(g).k == 3


def test_verify_properties_flags_unsupported_marks():
    g = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    pi = MixedGraph(binary_vars(3))
    pi.add_edge(0, 1, Mark.ARROW, Mark.TAIL)
    pi.add_edge(1, 2, Mark.TAIL, Mark.ARROW)
    pi.add_edge(0, 2, Mark.CIRCLE, Mark.CIRCLE)
    report = verify_properties(g, 1, pi=pi)
    tags = sorted({v[0] for v in report.violations})
    # 1 -> 0 has no directed path in the chain, and circles are not a
    # committed orientation
    assert tags == ["directed-path", "full-orientation"]
    with pytest.raises(PropertyViolation) as info:
        report.raise_if_failed()
    assert list(info.value.violations) == report.violations


def test_verify_properties_flags_false_collider():
    # the chain separates 0 from 2 by {1}, so a collider at 1 is wrong
    g = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    pi = MixedGraph(binary_vars(3))
    pi.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    pi.add_edge(1, 2, Mark.ARROW, Mark.TAIL)
    report = verify_properties(g, 1, pi=pi)
    tags = {v[0] for v in report.violations}
    assert "collider-sepset" in tags
    assert ("collider-sepset", (0, 1, 2), (1,)) in report.violations


def test_verify_properties_flags_false_noncollider():
    # the collider model separates 0 from 2 by the empty set, which a
    # non-collider midpoint at 1 forbids
    g = TrueDag(binary_vars(3), [(0, 1), (2, 1)])
    pi = MixedGraph(binary_vars(3))
    pi.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    pi.add_edge(1, 2, Mark.TAIL, Mark.ARROW)
    report = verify_properties(g, 1, pi=pi)
    tags = {v[0] for v in report.violations}
    assert "noncollider-sepset" in tags
    assert ("noncollider-sepset", (0, 1, 2), ()) in report.violations


def test_verify_properties_flags_cycles():
    g = TrueDag(binary_vars(3), [(0, 1), (1, 2), (0, 2)])
    pi = MixedGraph(binary_vars(3))
    pi.add_edge(0, 1, Mark.TAIL, Mark.ARROW)
    pi.add_edge(1, 2, Mark.TAIL, Mark.ARROW)
    pi.add_edge(0, 2, Mark.ARROW, Mark.TAIL)
    report = verify_properties(g, 2, pi=pi)
    assert "acyclic" in {v[0] for v in report.violations}


def test_property_report_lines_name_violations():
    g = TrueDag(binary_vars(3), [(0, 1), (1, 2)])
    pi = MixedGraph(binary_vars(3))
    pi.add_edge(0, 1, Mark.CIRCLE, Mark.CIRCLE)
    report = verify_properties(g, 1, pi=pi)
    text = "\n".join(report.lines())
    assert "full-orientation: 1 checked, 1 violations" in text
    assert "VIOLATION" in text


def test_sweep_instances_deterministic_family():
    a = sweep_instances(count=6, seed=0)
    b = sweep_instances(count=6, seed=0)
    assert len(a) == 6
    assert all(x == y for x, y in zip(a, b))
    assert all(5 <= g.n_visible <= 8 for g in a)
    assert all(0 <= g.n_nodes - g.n_visible <= 3 for g in a)
    c = sweep_instances(count=6, seed=1)
    assert any(x != y for x, y in zip(a, c))


def test_projection_properties_hold_on_random_models():
    for i, g in enumerate(sweep_instances(count=10, seed=4)):
        for k in (1, g.n_visible - 2):
            report = verify_properties(g, k)
            assert report.ok, (i, k, report.violations)
