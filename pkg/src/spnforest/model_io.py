"""Canonical JSON model serialization.

Nodes are written in topological order (children before parents) with
ids renumbered 0..n-1, children in stored order, and floats rendered
with 17 significant digits. The writer is hand-rolled so that repeated
save/load cycles are byte-identical; the loader re-validates.
"""

import json

import numpy as np

from .graph import SpnGraph, collapse_unary, validate


def _fmt(x):
    return format(float(x), ".17g")


def dumps_model(graph):
    """Serialize the reachable part of the graph to canonical JSON text.

    Degenerate one-child sums/products are collapsed first.
    """
    graph = collapse_unary(graph)
    order = graph.topological_order()
    renum = {nid: i for i, nid in enumerate(order)}
    lines = [
        "{",
        f'  "n_vars": {graph.n_vars},',
        f'  "root": {renum[graph.root]},',
        '  "nodes": [',
    ]
    for i, nid in enumerate(order):
        node = graph.nodes[nid]
        if node.kind == "leaf":
            entry = (f'    {{"id": {renum[nid]}, "kind": "leaf", '
                     f'"var": {node.var}, "p": {_fmt(node.p)}}}')
        else:
            children = ", ".join(str(renum[c]) for c in node.children)
            if node.kind == "product":
                entry = (f'    {{"id": {renum[nid]}, "kind": "product", '
                         f'"children": [{children}]}}')
            else:
                weights = ", ".join(_fmt(w) for w in node.weights)
                entry = (f'    {{"id": {renum[nid]}, "kind": "sum", '
                         f'"children": [{children}], "weights": [{weights}]}}')
        lines.append(entry + ("," if i < len(order) - 1 else ""))
    lines += ["  ]", "}", ""]
    return "\n".join(lines)


def save_model(graph, path):
    report = validate(graph)
    if not report.ok:
        raise ValueError(f"refusing to save an invalid model: {report}")
    with open(path, "w") as fh:
        fh.write(dumps_model(graph))


def loads_model(text, source="<string>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{source}: parse failure at line {exc.lineno}: {exc.msg}")
    try:
        graph = SpnGraph(doc["n_vars"])
        by_id = {}
        for entry in doc["nodes"]:
            kind = entry["kind"]
            if kind == "leaf":
                nid = graph.add_leaf(entry["var"], entry["p"])
            elif kind == "product":
                nid = graph.add_product([by_id[c] for c in entry["children"]])
            elif kind == "sum":
                weights = entry["weights"]
                total = sum(weights)
                if abs(total - 1.0) > 1e-9:
                    raise ValueError(
                        f"sum node {entry['id']}: weights sum to {total!r}, not 1"
                    )
                nid = graph.add_sum([by_id[c] for c in entry["children"]], weights)
                # keep the serialized weights bit-exact (add_sum renormalizes)
                graph.nodes[nid].weights = np.asarray(weights, dtype=float)
            else:
                raise ValueError(f"unknown node kind {kind!r}")
            by_id[entry["id"]] = nid
        graph.set_root(by_id[doc["root"]])
    except KeyError as exc:
        raise ValueError(f"{source}: missing field {exc}")
    report = validate(graph)
    if not report.ok:
        raise ValueError(f"{source}: model fails validation: {report}")
    return graph


def load_model(path):
    with open(path) as fh:
        return loads_model(fh.read(), source=path)
