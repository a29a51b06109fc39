import numpy as np
import pytest

from spnforest import (
    SpnGraph,
    collapse_unary,
    log_likelihood,
    merge_graphs,
    structure_stats,
    validate,
)

from conftest import random_spn


def single_leaf_graph(p=0.3):
    g = SpnGraph(1)
    g.set_root(g.add_leaf(0, p))
    return g


def test_single_leaf_is_valid():
    assert validate(single_leaf_graph()).ok


def test_sum_over_different_variables_reports_completeness():
    g = SpnGraph(2)
    a = g.add_leaf(0, 0.4)
    b = g.add_leaf(1, 0.6)
    g.set_root(g.add_sum([a, b], [0.5, 0.5]))
    report = validate(g)
    assert not report.ok
    assert any("completeness" in v for v in report.violations)


def test_product_over_same_variable_reports_decomposability():
    g = SpnGraph(2)
    a = g.add_leaf(0, 0.4)
    b = g.add_leaf(0, 0.6)
    g.set_root(g.add_product([a, b]))
    report = validate(g)
    assert not report.ok
    assert any("decomposability" in v for v in report.violations)


def test_denormalized_weights_reported():
    g = SpnGraph(1)
    a = g.add_leaf(0, 0.4)
    b = g.add_leaf(0, 0.6)
    nid = g.add_sum([a, b], [0.5, 0.5])
    g.nodes[nid].weights = np.array([0.7, 0.5])
    g.set_root(nid)
    report = validate(g)
    assert any("weights sum" in v for v in report.violations)


def test_cycle_detected():
    g = SpnGraph(1)
    a = g.add_leaf(0, 0.5)
    b = g.add_leaf(0, 0.5)
    s1 = g.add_sum([a, b], [0.5, 0.5])
    s2 = g.add_sum([s1, a], [0.5, 0.5])
    g.nodes[s1].children[1] = s2  # introduce a cycle
    g.touch()
    g.root = s2
    report = validate(g)
    assert any("cycle" in v for v in report.violations)


def test_stats_single_leaf():
    s = structure_stats(single_leaf_graph())
    assert (s.n_nodes, s.n_edges, s.n_layers) == (1, 0, 1)
    assert s.n_leaf == 1


def test_stats_product_of_two_leaves():
    g = SpnGraph(2)
    a = g.add_leaf(0, 0.5)
    b = g.add_leaf(1, 0.5)
    g.set_root(g.add_product([a, b]))
    s = structure_stats(g)
    assert (s.n_edges, s.n_layers) == (2, 2)


def test_stats_edges_equal_child_list_lengths():
    g, _ = random_spn(5)
    s = structure_stats(g)
    total = sum(len(g.nodes[n].children) for n in g.topological_order())
    assert s.n_edges == total
    assert s.n_layers >= 1


def test_merge_single_graph_identity_remap():
    g, _ = random_spn(1)
    merged, remaps = merge_graphs([g])
    assert np.array_equal(remaps[0], np.arange(len(g.nodes)))
    assert len(merged.nodes) == len(g.nodes)


def test_merge_two_graphs_node_count():
    g1, _ = random_spn(2, n_vars=5)
    g2, _ = random_spn(3, n_vars=5)
    merged, _ = merge_graphs([g1, g2])
    assert len(merged.nodes) == len(g1.nodes) + len(g2.nodes)


def test_merge_universe_mismatch():
    g1, _ = random_spn(2, n_vars=5)
    g2, _ = random_spn(3, n_vars=6)
    with pytest.raises(ValueError):
        merge_graphs([g1, g2])


def test_merge_preserves_evaluation():
    rng = np.random.default_rng(0)
    graphs = [random_spn(s, n_vars=6)[0] for s in (4, 5)]
    merged, remaps = merge_graphs(graphs)
    x = (rng.random((40, 6)) < 0.5).astype(int)
    for g, remap in zip(graphs, remaps):
        got = log_likelihood(merged, x, root=int(remap[g.root]))
        want = log_likelihood(g, x)
        np.testing.assert_array_equal(got, want)


def test_merge_carries_slices():
    g, _ = random_spn(6)
    merged, remaps = merge_graphs([g, g])
    assert len(merged.slices) == 2 * len(g.slices)


def test_collapse_unary_removes_degenerate_nodes():
    g = SpnGraph(2)
    a = g.add_leaf(0, 0.4)
    s = g.add_sum([a], [1.0])
    b = g.add_leaf(1, 0.7)
    p = g.add_product([s, b])
    wrap = g.add_product([p])
    g.set_root(wrap)
    out = collapse_unary(g)
    assert validate(out).ok
    assert all(
        len(out.nodes[n].children) != 1
        for n in out.topological_order()
        if out.nodes[n].kind != "leaf"
    )
    x = np.array([[1, 0], [0, 1], [1, 1], [0, 0]])
    np.testing.assert_allclose(log_likelihood(out, x), log_likelihood(g, x))


def test_add_sum_child_rescales_weights():
    g = SpnGraph(1)
    a = g.add_leaf(0, 0.2)
    b = g.add_leaf(0, 0.8)
    s = g.add_sum([a, b], [0.5, 0.5])
    c = g.add_leaf(0, 0.5)
    g.add_sum_child(s, c, 0.25)
    np.testing.assert_allclose(g.nodes[s].weights, [0.375, 0.375, 0.25])
