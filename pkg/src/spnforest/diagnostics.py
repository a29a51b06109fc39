"""Pairwise mutual-information diagnostics and the enumeration oracle.

Mutual information is reported in nats, diagonals fixed to 0. The model
matrix needs only four tractable marginal queries per variable pair; the
empirical matrix smooths each 2x2 joint cell before normalizing. The
brute-force marginal enumerates assignment completions and serves as the
independent oracle for the fast marginal path throughout the test suite.
"""

import itertools

import numpy as np
from scipy.special import logsumexp

from .graph import MARG
from .inference import log_likelihood, log_marginal


def _pair_mi(joint):
    """MI in nats from a 2x2 joint; 0*ln(0) treated as 0."""
    pi = joint.sum(axis=1)
    pj = joint.sum(axis=0)
    mi = 0.0
    for a in (0, 1):
        for b in (0, 1):
            p = joint[a, b]
            if p > 0:
                mi += p * np.log(p / (pi[a] * pj[b]))
    return mi


def empirical_pairwise_mi(data, alpha=0.5):
    """Pairwise MI matrix from joint 2x2 counts, alpha added per cell."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("data must be a non-empty 2-D matrix")
    n_rows, n_vars = data.shape
    ones = data.sum(axis=0)
    n11 = data.T @ data
    mi = np.zeros((n_vars, n_vars))
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            c11 = n11[i, j]
            c10 = ones[i] - c11
            c01 = ones[j] - c11
            c00 = n_rows - c11 - c10 - c01
            joint = np.array([[c00, c01], [c10, c11]]) + alpha
            joint /= joint.sum()
            mi[i, j] = mi[j, i] = _pair_mi(joint)
    return mi


def model_pairwise_mi(graph, norm_tol=1e-4):
    """Pairwise MI from the model's own two-variable marginals.

    Four marginal queries per pair; each pair's joint must sum to 1
    within `norm_tol` or the model is reported as invalid.
    """
    n = graph.n_vars
    pairs = list(itertools.combinations(range(n), 2))
    evidence = np.full((4 * len(pairs), n), MARG, dtype=np.int64)
    for q, (i, j) in enumerate(pairs):
        for c, (a, b) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            evidence[4 * q + c, i] = a
            evidence[4 * q + c, j] = b
    probs = np.exp(log_marginal(graph, evidence))
    mi = np.zeros((n, n))
    for q, (i, j) in enumerate(pairs):
        joint = probs[4 * q: 4 * q + 4].reshape(2, 2)
        total = joint.sum()
        if abs(total - 1.0) > norm_tol:
            raise ValueError(
                f"pair ({i},{j}): joint sums to {total!r}; model is not normalized"
            )
        joint /= total
        mi[i, j] = mi[j, i] = _pair_mi(joint)
    return mi


def mi_gap(model_mi, empirical_mi):
    """Frobenius norm of the off-diagonal difference."""
    model_mi = np.asarray(model_mi)
    empirical_mi = np.asarray(empirical_mi)
    if model_mi.shape != empirical_mi.shape:
        raise ValueError("matrix dimension mismatch")
    diff = model_mi - empirical_mi
    np.fill_diagonal(diff, 0.0)
    return float(np.sqrt((diff ** 2).sum()))


def write_mi_csv(mi, path):
    n = mi.shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(str(i) for i in range(n)) + "\n")
        for row in mi:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def brute_force_marginal(graph, evidence):
    """P(evidence) by summing exp(log_likelihood) over all completions.

    Uses only full-instance evaluation, independent of the fast
    marginalization path. Limited to 20 variables.
    """
    if graph.n_vars > 20:
        raise ValueError("brute force capped at 20 variables")
    evidence = np.asarray(evidence, dtype=np.int64)
    if evidence.ndim != 1 or len(evidence) != graph.n_vars:
        raise ValueError("evidence length must match the universe")
    free = np.flatnonzero(evidence == MARG)
    filled = np.tile(evidence, (2 ** len(free), 1))
    if len(free):
        combos = np.array(list(itertools.product((0, 1), repeat=len(free))))
        filled[:, free] = combos
    lls = np.atleast_1d(log_likelihood(graph, filled))
    return float(np.exp(logsumexp(lls)))
