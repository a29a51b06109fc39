"""
Learning a sum-product network and asking it questions
======================================================

Learn a single ExtraSPN from synthetic binary data, check that it is a
valid density, and run marginal queries -- both evaluation-time (set an
entry to MARG) and structural (prune the graph down to a sub-scope).
"""

import itertools

import numpy as np

from spnforest import (
    MARG,
    LearnConfig,
    brute_force_marginal,
    learn_extra_spn,
    log_likelihood,
    log_marginal,
    prune_to_scope,
    structure_stats,
    validate,
)

rng = np.random.default_rng(7)

# Synthetic data: three cluster prototypes over 8 binary variables,
# each row a noisy copy of one prototype.
prototypes = rng.integers(0, 2, size=(3, 8))
labels = rng.integers(0, 3, size=500)
flips = rng.random((500, 8)) < 0.1
data = np.where(flips, 1 - prototypes[labels], prototypes[labels]).astype(np.uint8)

# Learn. mu is the minimum slice size before the learner gives up and
# fully factorizes; beta is the probability a feature split "fails" and
# a clustering step happens instead.
graph = learn_extra_spn(data, config=LearnConfig(mu=40, beta=0.5), rng=rng)

report = validate(graph, require_full_scope=True)
print("valid:", report.ok)
print(structure_stats(graph))

# A valid SPN is a normalized density: the likelihoods of all 2^8
# assignments sum to one.
grid = np.array(list(itertools.product((0, 1), repeat=8)), dtype=np.uint8)
print("sum over all assignments:", np.exp(log_likelihood(graph, grid)).sum())

# Marginal query: what is P(x0=1, x3=0), everything else summed out?
evidence = np.full(8, MARG)
evidence[0], evidence[3] = 1, 0
fast = np.exp(log_marginal(graph, evidence))
print("P(x0=1, x3=0) =", fast)

# The same number by brute force -- enumerate the 2^6 completions.
print("brute force      =", brute_force_marginal(graph, evidence))

# Structural marginalization: build a new root whose scope is {0, 3}.
# It lives in the same arena and agrees with the query above.
sub_root = prune_to_scope(graph, graph.root, [0, 3])
x = np.zeros(8, dtype=np.uint8)
x[0] = 1
print("pruned graph     =", np.exp(log_likelihood(graph, x, root=sub_root)))
