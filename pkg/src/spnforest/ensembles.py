"""Ensembles of SPNs: uniform forest mixing and cross-network residual links.

A forest mixes component networks under one new sum node with uniform
weights. Residual linking copies one random component, then walks its sum
nodes in BFS order and, for each, searches the other components for nodes
whose scope covers it; matches are structurally marginalized down to the
exact scope and added as extra mixture children with slice-proportional
weights. The informed variant accepts a link only when it improves the
gate node's mean log value on its own training slice.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .graph import merge_graphs
from .inference import log_values, prune_to_scope

WEIGHT_FLOOR = 1e-6
PER_NODE_LINK_CAP = 3


@dataclass
class EnsembleConfig:
    n_components: int = 10
    k: float = 0.1
    informed: bool = False
    seed: int = 0
    per_node_cap: int = PER_NODE_LINK_CAP  # None/inf disables the cap

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError("k must be in [0, 1]")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")


@dataclass
class ResidualLinkRecord:
    component: int
    source: int
    target: int
    pruned_target: int
    scope_size: int
    weight: float
    accepted: bool
    gate_delta: float = float("nan")


def write_link_audit(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["component", "source", "target", "scope_size",
             "initial_weight", "accepted", "gate_delta"]
        )
        for r in records:
            writer.writerow(
                [r.component, r.source, r.target, r.scope_size,
                 repr(r.weight), int(r.accepted), repr(r.gate_delta)]
            )


def build_rspf(components):
    """Mix components under a single sum node with uniform weights 1/n."""
    if not components:
        raise ValueError("component list is empty")
    merged, remaps = merge_graphs(components)
    roots = [int(remaps[i][g.root]) for i, g in enumerate(components)]
    n = len(components)
    root = merged.add_sum(roots, np.full(n, 1.0 / n))
    merged.set_root(root)
    return merged


def residual_weight(c1, c2, n_existing):
    """Initial mixture weight of a new residual child.

    Slice-proportional: c2/(c1+c2); falls back to a uniform re-split when
    slice counts are missing and to a small floor when c2 is zero.
    """
    if c1 is None or c2 is None:
        return 1.0 / (n_existing + 1)
    if c2 <= 0 or c1 + c2 <= 0:
        return WEIGHT_FLOOR
    return c2 / (c1 + c2)


def _slice_count(graph, nid):
    rows = graph.slices.get(nid)
    return None if rows is None else int(len(rows))


def _gate_mean_ll(graph, node, rows_data):
    vals, _ = log_values(graph, rows_data, root=node)
    return float(vals[:, node].mean())


def build_resspn(components, data=None, config=None):
    """Draw residual links from a copy of one random component.

    Returns (graph, records, snapshot) where the graph is the full mixture
    over components plus the link-carrying copy, records audit every
    candidate link, and snapshot is the mixture state right after the
    first donor component was processed (pre-EM), for diagnostics.
    """
    config = config or EnsembleConfig()
    if len(components) < 2:
        raise ValueError("need at least 2 components")
    n_vars = components[0].n_vars
    if any(g.n_vars != n_vars for g in components):
        raise ValueError("universe size mismatch across components")
    if config.informed and data is None:
        raise ValueError("informed gating requires training data")
    rng = np.random.default_rng(config.seed)
    data = None if data is None else np.asarray(data)

    chosen = int(rng.integers(len(components)))
    copy = components[chosen].copy()
    merged, remaps = merge_graphs(list(components) + [copy])
    copy_remap = remaps[-1]
    copy_root = int(copy_remap[copy.root])
    copy_node_ids = set(int(i) for i in copy_remap)
    copy_size = len(copy_remap)

    # gate candidates: BFS over the copy excluding its root, sums only
    gate_order = [
        nid for nid in merged.bfs_order(copy_root)[1:]
        if merged.nodes[nid].kind == "sum"
    ]
    cap = config.per_node_cap
    records = []
    snapshot = None
    donor_indices = [i for i in range(len(components)) if i != chosen]
    for donor in donor_indices:
        donor_root = int(remaps[donor][components[donor].root])
        donor_bfs = merged.bfs_order(donor_root)
        eta = 0
        for s1 in gate_order:
            links_here = 0
            s1_scope = merged.scopes[s1]
            c1 = _slice_count(merged, s1)
            gate_rows = merged.slices.get(s1)
            for s2 in donor_bfs:
                if cap is not None and links_here >= cap:
                    break
                if not s1_scope <= merged.scopes[s2]:
                    continue
                pruned = prune_to_scope(merged, s2, s1_scope)
                node = merged.nodes[s1]
                if pruned == s1 or pruned in node.children:
                    continue
                w = residual_weight(c1, _slice_count(merged, s2), len(node.children))
                rec = ResidualLinkRecord(
                    component=donor, source=s1, target=s2, pruned_target=pruned,
                    scope_size=len(s1_scope), weight=w, accepted=True,
                )
                if config.informed:
                    if gate_rows is None or len(gate_rows) == 0:
                        rec.accepted = False
                        records.append(rec)
                        continue
                    rows_data = data[gate_rows]
                    before = _gate_mean_ll(merged, s1, rows_data)
                    old_children = list(node.children)
                    old_weights = node.weights
                    merged.add_sum_child(s1, pruned, w)
                    after = _gate_mean_ll(merged, s1, rows_data)
                    rec.gate_delta = after - before
                    if after > before:
                        eta += 1
                        links_here += 1
                    else:
                        rec.accepted = False
                        node.children = old_children
                        node.weights = old_weights
                        merged.touch()
                else:
                    merged.add_sum_child(s1, pruned, w)
                    eta += 1
                    links_here += 1
                records.append(rec)
            # budget check sits after the full inner loop, so the last
            # gate node may overshoot k * |copy|
            if eta > config.k * copy_size:
                break
        if donor == donor_indices[0]:
            snap = merged.copy()
            snap_root = snap.add_sum(
                [int(remaps[i][components[i].root]) for i in range(len(components))]
                + [copy_root],
                np.full(len(components) + 1, 1.0 / (len(components) + 1)),
            )
            snap.set_root(snap_root)
            snapshot = snap

    n = len(components) + 1
    root = merged.add_sum(
        [int(remaps[i][components[i].root]) for i in range(len(components))]
        + [copy_root],
        np.full(n, 1.0 / n),
    )
    merged.set_root(root)
    # links only point from the copy into donor arenas, so the result
    # stays acyclic; assert cheaply by ordering
    assert all(rec.pruned_target not in copy_node_ids for rec in records)
    return merged, records, snapshot
