"""Batch EM for sum-node weights and Bernoulli leaf parameters.

The E-step runs one bottom-up pass (log values) and one top-down pass of
log-derivatives per data batch; the M-step renormalizes expected child
counts at every sum node and re-estimates leaves from responsibility-
weighted counts. Everything stays in log space until the final counts.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .graph import clamp_leaf_p
from .inference import log_values


@dataclass
class EmConfig:
    max_iters: int = 1000
    window: int = 5
    var_tol: float = 1e-7
    leaf_alpha: float = 0.1
    update_leaves: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.var_tol <= 0:
            raise ValueError("var_tol must be > 0")
        if self.leaf_alpha < 0:
            raise ValueError("leaf_alpha must be >= 0")


@dataclass
class EmTrace:
    mean_train_ll: list = field(default_factory=list)
    stop_reason: str = "max_iters"

    def __len__(self):
        return len(self.mean_train_ll)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "mean_train_ll"])
            for i, ll in enumerate(self.mean_train_ll):
                writer.writerow([i, repr(ll)])


def log_derivatives(graph, x, vals=None, order=None):
    """Top-down derivatives d_i = d log S / d log S_i, in log space.

    d_root = 0. A sum parent i passes d_i + log w_ij + log S_j - log S_i
    to child j; a product parent passes d_i unchanged (the child's log
    value cancels against its contribution to the parent). exp(d_i) is the
    usual responsibility S_i * (dS/dS_i) / S.
    """
    if vals is None or order is None:
        vals, order = log_values(graph, x)
    n_rows = vals.shape[0]
    d = np.full((n_rows, len(graph.nodes)), -np.inf)
    d[:, graph.root] = 0.0
    for nid in reversed(order):
        node = graph.nodes[nid]
        if node.kind == "leaf":
            continue
        di = d[:, nid]
        if node.kind == "product":
            for c in node.children:
                np.logaddexp(d[:, c], di, out=d[:, c])
        else:
            with np.errstate(divide="ignore"):
                logw = np.log(node.weights)
            base = di - vals[:, nid]
            for j, c in enumerate(node.children):
                np.logaddexp(d[:, c], base + logw[j] + vals[:, c], out=d[:, c])
    return d


def em_step(graph, data, config=None):
    """One batch EM update in place.

    Returns the mean train log-likelihood of the PRE-update parameters.
    """
    config = config or EmConfig()
    data = np.asarray(data)
    vals, order = log_values(graph, data)
    root_ll = vals[:, graph.root]
    if np.isneginf(root_ll).any():
        row = int(np.flatnonzero(np.isneginf(root_ll))[0])
        raise ValueError(f"row {row} has zero likelihood; cannot run EM")
    mean_ll = float(root_ll.mean())
    d = log_derivatives(graph, data, vals=vals, order=order)

    new_weights = {}
    for nid in order:
        node = graph.nodes[nid]
        if node.kind != "sum":
            continue
        base = d[:, nid] - vals[:, nid]
        with np.errstate(divide="ignore"):
            logw = np.log(node.weights)
        counts = np.array([
            np.exp(logsumexp(base + logw[j] + vals[:, c]))
            for j, c in enumerate(node.children)
        ])
        total = counts.sum()
        if total > 0:
            new_weights[nid] = counts / total
    if config.update_leaves:
        a = config.leaf_alpha
        for nid in order:
            node = graph.nodes[nid]
            if node.kind != "leaf":
                continue
            r = np.exp(d[:, nid])
            denom = r.sum() + 2.0 * a
            if denom > 0:
                p = (float(r @ data[:, node.var]) + a) / denom
                node.p = clamp_leaf_p(p)
    for nid, w in new_weights.items():
        graph.nodes[nid].weights = w
    graph.touch()
    return mean_ll


def em_fit(graph, data, config=None):
    """Iterate em_step with the variance-window stopping rule.

    Stops when the population variance of the last `window` mean train
    log-likelihoods drops below `var_tol`, or at `max_iters`. Mutates the
    graph in place and returns (graph, EmTrace).
    """
    config = config or EmConfig()
    data = np.asarray(data)
    if data.shape[1] != graph.n_vars:
        raise ValueError("data universe does not match graph")
    trace = EmTrace()
    for _ in range(config.max_iters):
        trace.mean_train_ll.append(em_step(graph, data, config))
        if len(trace) >= config.window:
            window = np.array(trace.mean_train_ll[-config.window:])
            if window.var() < config.var_tol:
                trace.stop_reason = "converged"
                break
    return graph, trace
