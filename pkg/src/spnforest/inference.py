"""Exact log-space evaluation and marginal queries.

Evaluation runs one bottom-up pass over the nodes reachable from the query
root; shared nodes are evaluated once. Sum nodes use log-sum-exp with a
max shift so that 100-variable products cannot underflow.
"""

import numpy as np
from scipy.special import logsumexp

from .graph import MARG


def _as_matrix(graph, x):
    x = np.asarray(x)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != graph.n_vars:
        raise ValueError(
            f"instance length {x.shape[1]} does not match universe {graph.n_vars}"
        )
    return x.astype(np.int64, copy=False), squeeze


def log_values(graph, x, root=None):
    """Per-node log values for a batch of (possibly partial) assignments.

    Returns (matrix of shape (n_rows, n_nodes), topo order). Columns not
    reachable from `root` stay NaN. Entries equal to MARG in `x` mark
    marginalized variables: their leaves evaluate to log 1 = 0.
    """
    x, _ = _as_matrix(graph, x)
    order = graph.topological_order(root)
    vals = np.full((x.shape[0], len(graph.nodes)), np.nan)
    for nid in order:
        node = graph.nodes[nid]
        if node.kind == "leaf":
            col = x[:, node.var]
            lv = np.where(col == 1, np.log(node.p), np.log1p(-node.p))
            vals[:, nid] = np.where(col == MARG, 0.0, lv)
        elif node.kind == "product":
            vals[:, nid] = vals[:, node.children].sum(axis=1)
        else:
            with np.errstate(divide="ignore"):
                logw = np.log(node.weights)
            vals[:, nid] = logsumexp(vals[:, node.children] + logw, axis=1)
    return vals, order


def log_likelihood(graph, x, root=None):
    """log S(x) for full binary assignments (scalar for a single row)."""
    xm, squeeze = _as_matrix(graph, x)
    if not np.isin(xm, (0, 1)).all():
        raise ValueError("log_likelihood requires full assignments over {0,1}")
    vals, _ = log_values(graph, xm, root=root)
    out = vals[:, root if root is not None else graph.root]
    return out[0] if squeeze else out


def log_marginal(graph, evidence, root=None):
    """log P(evidence); entries equal to MARG are summed out.

    Marginalized-variable leaves evaluate to 1, so an all-MARG query
    returns the log partition function (0 for a normalized SPN).
    """
    em, squeeze = _as_matrix(graph, evidence)
    if not np.isin(em, (0, 1, MARG)).all():
        raise ValueError("evidence entries must be 0, 1, or MARG")
    vals, _ = log_values(graph, em, root=root)
    out = vals[:, root if root is not None else graph.root]
    return out[0] if squeeze else out


def prune_to_scope(graph, node, keep):
    """Structurally marginalize `node` down to the variables in `keep`.

    New nodes are appended to the same arena; the returned id evaluates,
    for every assignment of the keep-variables, to the marginal of the
    original node over scope(node) \\ keep. When keep equals a subnode's
    scope the subnode itself is reused, so no copies are made for the
    identity case.
    """
    keep = frozenset(keep)
    if not keep:
        raise ValueError("keep scope must be non-empty")
    if not keep <= graph.scopes[node]:
        raise ValueError("keep must be a subset of the node scope")
    memo = {}

    def rec(nid, kp):
        if graph.scopes[nid] == kp:
            return nid
        key = (nid, kp)
        if key in memo:
            return memo[key]
        nd = graph.nodes[nid]
        rows = graph.slices.get(nid)
        if nd.kind == "product":
            kept = []
            for c in nd.children:
                ck = kp & graph.scopes[c]
                if ck:
                    kept.append(rec(c, ck))
            res = kept[0] if len(kept) == 1 else graph.add_product(kept, rows=rows)
        elif nd.kind == "sum":
            # children share the node's scope, so marginalizing each child
            # to kp keeps the mixture complete with unchanged weights
            res = graph.add_sum([rec(c, kp) for c in nd.children], nd.weights, rows=rows)
        else:  # leaf outside keep would have empty kp; never reached
            raise AssertionError("leaf reached with mismatching keep scope")
        memo[key] = res
        return res

    return rec(node, keep)
