"""Randomized top-down structure learning for binary data.

Learns tree-shaped networks by recursive feature splitting and instance
clustering. Splits are decided by coin flips (constant time) instead of
independence tests; a pairwise G-test splitter is available as an
optional mode for comparisons. Every node records the training rows it
was learned from, which later drives residual-link weight initialization
and informed gating.
"""

import math
from dataclasses import dataclass

import numpy as np

from .graph import SpnGraph


@dataclass
class LearnConfig:
    mu: int = 100
    beta: float = 0.6
    gamma: float = 5.0
    alpha: float = 1.0
    cluster_mode: str = "random"  # "random" or "kmeans"
    rho: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if self.mu < 1:
            raise ValueError("mu must be >= 1")
        if self.cluster_mode not in ("random", "kmeans"):
            raise ValueError(f"unknown cluster_mode {self.cluster_mode!r}")


def sample_mu(n_rows, gamma, rng):
    """Uniform integer from [1, floor(n_rows/gamma)], clamped to >= 1."""
    if n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    hi = max(1, int(n_rows // gamma))
    return int(rng.integers(1, hi + 1))


def leaf_probability(column, alpha):
    """Smoothed Bernoulli estimate (count + alpha) / (n + 2 alpha)."""
    n = len(column)
    ones = int(np.sum(column)) if n else 0
    if n == 0 and alpha == 0:
        return 0.5
    return (ones + alpha) / (n + 2.0 * alpha)


def random_split_features(variables, beta, rng):
    """Random bipartition of the variables; fails with probability beta.

    Returns (part1, part2); failure is signaled by part2 being empty.
    Conditioned on success, the bipartition is uniform over all splits
    with two non-empty parts.
    """
    variables = list(variables)
    if len(variables) < 2:
        raise ValueError("need at least 2 variables to split")
    if rng.random() < beta:
        return variables, []
    while True:
        mask = rng.random(len(variables)) < 0.5
        if mask.any() and not mask.all():
            break
    part1 = [v for v, m in zip(variables, mask) if m]
    part2 = [v for v, m in zip(variables, mask) if not m]
    return part1, part2


def random_cluster_rows(n_rows, rng):
    """Uniform random 2-group assignment, resampled until both non-empty."""
    if n_rows < 2:
        raise ValueError("need at least 2 rows to cluster")
    while True:
        mask = rng.random(n_rows) < 0.5
        if mask.any() and not mask.all():
            return np.flatnonzero(mask), np.flatnonzero(~mask)


def kmeans_cluster_rows(data, rng, n_restarts=3, max_iters=50):
    """2-means on 0/1 row vectors; best squared-distance objective of
    `n_restarts` runs, re-initialized whenever a cluster empties."""
    n_rows = data.shape[0]
    if n_rows < 2:
        raise ValueError("need at least 2 rows to cluster")
    data = data.astype(float)
    best = None
    best_obj = math.inf
    for _ in range(n_restarts):
        for _attempt in range(20):
            centers = data[rng.choice(n_rows, size=2, replace=False)]
            assign = None
            for _it in range(max_iters):
                d = ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
                new_assign = d.argmin(axis=1)
                if assign is not None and np.array_equal(new_assign, assign):
                    break
                assign = new_assign
                if not (assign == 0).any() or not (assign == 1).any():
                    break
                centers = np.stack([data[assign == k].mean(axis=0) for k in (0, 1)])
            if (assign == 0).any() and (assign == 1).any():
                obj = ((data - centers[assign]) ** 2).sum()
                if obj < best_obj:
                    best_obj = obj
                    best = assign.copy()
                break
        else:
            continue
    if best is None:
        # all restarts collapsed (e.g. identical rows): fall back to a
        # random non-empty assignment
        return random_cluster_rows(n_rows, rng)
    return np.flatnonzero(best == 0), np.flatnonzero(best == 1)


def cluster_instances(data, mode, rng):
    """Partition rows into two non-empty groups."""
    if mode == "random":
        return random_cluster_rows(data.shape[0], rng)
    if mode == "kmeans":
        return kmeans_cluster_rows(data, rng)
    raise ValueError(f"unknown cluster mode {mode!r}")


def g_test_split_features(data, variables, rho):
    """Group variables by pairwise G-test dependence.

    Computes G = 2 sum O ln(O/E) on each 2x2 contingency table and links a
    pair when G > rho; returns the connected components. Constant columns
    are treated as independent of everything.
    """
    variables = list(variables)
    if len(variables) < 2:
        raise ValueError("need at least 2 variables")
    n = data.shape[0]
    if n < 2:
        raise ValueError("need at least 2 rows")
    parent = {v: v for v in variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    cols = {v: data[:, v].astype(float) for v in variables}
    ones = {v: cols[v].sum() for v in variables}
    for i, vi in enumerate(variables):
        if ones[vi] in (0, n):
            continue
        for vj in variables[i + 1:]:
            if ones[vj] in (0, n):
                continue
            o11 = float(cols[vi] @ cols[vj])
            o10 = ones[vi] - o11
            o01 = ones[vj] - o11
            o00 = n - o11 - o10 - o01
            g = 0.0
            for o, ri, cj in (
                (o11, ones[vi], ones[vj]),
                (o10, ones[vi], n - ones[vj]),
                (o01, n - ones[vi], ones[vj]),
                (o00, n - ones[vi], n - ones[vj]),
            ):
                if o > 0:
                    g += 2.0 * o * math.log(o * n / (ri * cj))
            if g > rho:
                ri_, rj_ = find(vi), find(vj)
                if ri_ != rj_:
                    parent[ri_] = rj_
    groups = {}
    for v in variables:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def full_factorization(data, variables=None, alpha=1.0):
    """Standalone fully factorized model: one smoothed leaf per variable."""
    data = np.asarray(data)
    if variables is None:
        variables = list(range(data.shape[1]))
    variables = sorted(variables)
    if not variables:
        raise ValueError("variable set must be non-empty")
    graph = SpnGraph(data.shape[1])
    rows = np.arange(data.shape[0], dtype=np.int64)
    leaves = [
        graph.add_leaf(v, leaf_probability(data[:, v], alpha), rows=rows)
        for v in variables
    ]
    graph.set_root(leaves[0] if len(leaves) == 1 else graph.add_product(leaves, rows=rows))
    return graph


def learn_extra_spn(data, variables=None, config=None, rng=None):
    """Learn a randomized tree SPN from binary data.

    Recursion: a single variable becomes a smoothed Bernoulli leaf; slices
    below `mu` rows are fully factorized; otherwise a coin decides between
    a random feature bipartition (product node) and instance clustering
    (sum node with child weights |D_i|/|D|). Per-node training-row slices
    are recorded on the returned graph.
    """
    config = config or LearnConfig()
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("data must be a non-empty 2-D matrix")
    if variables is None:
        variables = list(range(data.shape[1]))
    variables = sorted(variables)
    if not variables:
        raise ValueError("variable set must be non-empty")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    graph = SpnGraph(data.shape[1])
    all_rows = np.arange(data.shape[0], dtype=np.int64)

    def build_leaf(rows, var):
        p = leaf_probability(data[rows, var], config.alpha)
        return graph.add_leaf(var, p, rows=rows)

    def build_factorization(rows, vs):
        if len(vs) == 1:
            return build_leaf(rows, vs[0])
        return graph.add_product([build_leaf(rows, v) for v in vs], rows=rows)

    def recurse(rows, vs):
        if len(vs) == 1:
            return build_leaf(rows, vs[0])
        if len(rows) < config.mu:
            return build_factorization(rows, vs)
        part1, part2 = random_split_features(vs, config.beta, rng)
        if part2:
            return graph.add_product(
                [recurse(rows, part1), recurse(rows, part2)], rows=rows
            )
        if config.cluster_mode == "random" and rng.random() < config.beta:
            # clustering "failed" too: force a feature bipartition so the
            # recursion always makes progress
            part1, part2 = random_split_features(vs, 0.0, rng)
            return graph.add_product(
                [recurse(rows, part1), recurse(rows, part2)], rows=rows
            )
        if len(rows) < 2:
            return build_factorization(rows, vs)
        g1, g2 = cluster_instances(data[rows][:, vs], config.cluster_mode, rng)
        groups = [rows[g1], rows[g2]]
        weights = [len(g) / len(rows) for g in groups]
        return graph.add_sum(
            [recurse(g, vs) for g in groups], weights, rows=rows
        )

    graph.set_root(recurse(all_rows, variables))
    return graph
